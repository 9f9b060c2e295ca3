//! Seeded random generation of systems, topologies, traces, relations,
//! covers, knowledgebases, and presheaves for the property suites.

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::consistency::Knowledgebase;
use crate::relations::Relation;
use crate::specifications::Subpresheaf;
use crate::state_traces::{enumerate_traces, StateId, StateSpace, System, Trace};
use crate::topology::{enumerate_maximal_covers, FiniteTopology, MaximalCover, OpenSet};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn usize_in(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// A system of `vars` variables with `states` states each; one in four
    /// variables receives a nontrivial proset order instead of the total
    /// one.
    pub fn system(&mut self, vars: usize, states: usize) -> System {
        let mut spec = Vec::new();
        for v in 0..vars {
            let labels: Vec<String> = (0..states).map(|s| format!("v{v}s{s}")).collect();
            let space = if states > 1 && self.chance(0.25) {
                let npairs = self.usize_in(1, states);
                let pairs: Vec<(StateId, StateId)> = (0..npairs)
                    .map(|_| {
                        (
                            self.usize_in(0, states - 1) as StateId,
                            self.usize_in(0, states - 1) as StateId,
                        )
                    })
                    .collect();
                StateSpace::with_order(labels, &pairs).expect("valid order spec")
            } else {
                StateSpace::total(labels).expect("nonempty labels")
            };
            spec.push((format!("v{v}"), space));
        }
        System::new(spec).expect("distinct names")
    }

    /// A random subset of `of`; may be empty.
    pub fn subset(&mut self, of: OpenSet) -> OpenSet {
        OpenSet::from_vars(of.members().filter(|_| self.rng.gen_bool(0.5)))
    }

    pub fn nonempty_subset(&mut self, of: OpenSet) -> OpenSet {
        assert!(!of.is_empty());
        loop {
            let s = self.subset(of);
            if !s.is_empty() {
                return s;
            }
        }
    }

    /// A topology generated from a random subbasis; retries until the open
    /// count stays at or below `max_opens`.
    pub fn topology(&mut self, universe: OpenSet, max_opens: usize) -> FiniteTopology {
        loop {
            let n = self.usize_in(1, 4);
            let subbasis: Vec<OpenSet> = (0..n).map(|_| self.subset(universe)).collect();
            let top = FiniteTopology::generate(universe, &subbasis).expect("subbasis in universe");
            if top.opens().len() <= max_opens {
                return top;
            }
        }
    }

    /// A uniform choice among all traces on the domain with at most
    /// `max_columns` columns (including the empty trace).
    pub fn trace(&mut self, system: &System, domain: OpenSet, max_columns: usize) -> Trace {
        let all = enumerate_traces(system, domain, max_columns);
        all[self.usize_in(0, all.len() - 1)].clone()
    }

    /// An explicit relation of up to `max_traces` traces of at most
    /// `max_columns` columns.
    pub fn relation(
        &mut self,
        system: &System,
        domain: OpenSet,
        max_columns: usize,
        max_traces: usize,
    ) -> Relation {
        let all = enumerate_traces(system, domain, max_columns);
        let count = self.usize_in(0, max_traces.min(all.len()));
        let mut traces = BTreeSet::new();
        for _ in 0..count {
            traces.insert(all[self.usize_in(0, all.len() - 1)].clone());
        }
        Relation::explicit(domain, traces).expect("domains match")
    }

    /// A uniform choice among the maximal covers of the topology.
    pub fn cover(&mut self, topology: &FiniteTopology) -> MaximalCover {
        let all = enumerate_maximal_covers(topology);
        all[self.usize_in(0, all.len() - 1)].clone()
    }

    /// A knowledgebase of up to `max_valuations` random relations on random
    /// nonempty domains.
    pub fn knowledgebase(
        &mut self,
        system: &System,
        max_valuations: usize,
        max_columns: usize,
        max_traces: usize,
    ) -> Knowledgebase {
        let n = self.usize_in(1, max_valuations);
        let valuations = (0..n)
            .map(|_| {
                let domain = self.nonempty_subset(system.universe());
                self.relation(system, domain, max_columns, max_traces)
            })
            .collect();
        Knowledgebase::new(valuations).expect("nonempty list")
    }

    /// The restriction closure of a random partial carrier over the
    /// topology.
    pub fn subpresheaf(
        &mut self,
        system: &System,
        topology: &FiniteTopology,
        max_columns: usize,
        max_traces_per_open: usize,
    ) -> Subpresheaf {
        let opens: Vec<OpenSet> = topology.opens().iter().copied().collect();
        let mut partial: BTreeMap<OpenSet, BTreeSet<Trace>> = BTreeMap::new();
        let picks = self.usize_in(0, opens.len());
        for _ in 0..picks {
            let open = opens[self.usize_in(0, opens.len() - 1)];
            let entry = partial.entry(open).or_default();
            let all = enumerate_traces(system, open, max_columns);
            for _ in 0..self.usize_in(0, max_traces_per_open) {
                entry.insert(all[self.usize_in(0, all.len() - 1)].clone());
            }
        }
        Subpresheaf::restriction_closure(topology, partial).expect("keys are open")
    }
}
