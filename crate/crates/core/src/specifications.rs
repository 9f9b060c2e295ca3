//! Specifications: subpresheaves of chaos paired with contexts, ordered by
//! refinement, with pointwise meet and join.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::state_traces::{enumerate_traces, System, Trace};
use crate::topology::{cover_join, cover_meet, FiniteTopology, MaximalCover, OpenSet};

fn empty_section() -> &'static BTreeSet<Trace> {
    static EMPTY: OnceLock<BTreeSet<Trace>> = OnceLock::new();
    EMPTY.get_or_init(BTreeSet::new)
}

/// A subpresheaf of chaos: per-open trace sets closed under restriction.
/// Stored sparsely; an absent open has the empty section.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Subpresheaf {
    carrier: BTreeMap<OpenSet, BTreeSet<Trace>>,
}

impl Subpresheaf {
    pub fn empty() -> Subpresheaf {
        Subpresheaf::default()
    }

    /// Smallest subpresheaf containing the input: adds the restriction of
    /// every given trace to every smaller open of the topology.
    pub fn restriction_closure(
        topology: &FiniteTopology,
        partial: BTreeMap<OpenSet, BTreeSet<Trace>>,
    ) -> Result<Subpresheaf> {
        let mut carrier: BTreeMap<OpenSet, BTreeSet<Trace>> = BTreeMap::new();
        for (open, traces) in partial {
            if !topology.contains(open) {
                return Err(Error::Domain(format!("carrier key {open:?} is not open")));
            }
            for t in traces {
                if t.domain() != open {
                    return Err(Error::Domain(format!(
                        "carrier at {open:?} contains a trace on {:?}",
                        t.domain()
                    )));
                }
                for sub in topology.opens_within(open) {
                    carrier
                        .entry(sub)
                        .or_default()
                        .insert(t.restrict(sub).expect("sub within open"));
                }
            }
        }
        carrier.retain(|_, ts| !ts.is_empty());
        Ok(Subpresheaf { carrier })
    }

    /// Bounded chaos: every open carries all traces of at most `bound`
    /// columns.
    pub fn bounded_chaos(system: &System, topology: &FiniteTopology, bound: usize) -> Subpresheaf {
        let carrier = topology
            .opens()
            .iter()
            .map(|&o| (o, enumerate_traces(system, o, bound).into_iter().collect()))
            .collect();
        Subpresheaf { carrier }
    }

    pub fn section(&self, open: OpenSet) -> &BTreeSet<Trace> {
        self.carrier.get(&open).unwrap_or_else(|| empty_section())
    }

    pub fn carrier(&self) -> &BTreeMap<OpenSet, BTreeSet<Trace>> {
        &self.carrier
    }

    pub fn contains(&self, t: &Trace) -> bool {
        self.section(t.domain()).contains(t)
    }

    /// Exhaustive check of the subpresheaf condition over the topology.
    pub fn is_subpresheaf(&self, topology: &FiniteTopology) -> bool {
        for (open, traces) in &self.carrier {
            if !topology.contains(*open) {
                return false;
            }
            for t in traces {
                if t.domain() != *open {
                    return false;
                }
                for sub in topology.opens_within(*open) {
                    if !self
                        .section(sub)
                        .contains(&t.restrict(sub).expect("sub within open"))
                    {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Pointwise intersection (a subpresheaf again).
    pub fn meet(&self, other: &Subpresheaf) -> Subpresheaf {
        let mut carrier = BTreeMap::new();
        for (open, ts) in &self.carrier {
            let common: BTreeSet<Trace> =
                ts.intersection(other.section(*open)).cloned().collect();
            if !common.is_empty() {
                carrier.insert(*open, common);
            }
        }
        Subpresheaf { carrier }
    }

    /// Pointwise union (a subpresheaf again).
    pub fn join(&self, other: &Subpresheaf) -> Subpresheaf {
        let mut carrier = self.carrier.clone();
        for (open, ts) in &other.carrier {
            carrier.entry(*open).or_default().extend(ts.iter().cloned());
        }
        Subpresheaf { carrier }
    }

    /// Pointwise inclusion.
    pub fn included_in(&self, other: &Subpresheaf) -> bool {
        self.carrier
            .iter()
            .all(|(open, ts)| ts.is_subset(other.section(*open)))
    }
}

/// A specification: a subpresheaf of chaos together with a context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Specification {
    pub presheaf: Subpresheaf,
    pub context: MaximalCover,
}

/// Refinement: pointwise carrier inclusion and cover refinement.
pub fn spec_refines(a: &Specification, b: &Specification) -> Result<bool> {
    Ok(a.presheaf.included_in(&b.presheaf) && a.context.refines(&b.context)?)
}

pub fn spec_meet(
    a: &Specification,
    b: &Specification,
    topology: &FiniteTopology,
) -> Result<Specification> {
    Ok(Specification {
        presheaf: a.presheaf.meet(&b.presheaf),
        context: cover_meet(&a.context, &b.context, topology)?,
    })
}

pub fn spec_join(a: &Specification, b: &Specification) -> Result<Specification> {
    Ok(Specification {
        presheaf: a.presheaf.join(&b.presheaf),
        context: cover_join(&a.context, &b.context)?,
    })
}

/// Top of the lattice at a bound: bounded chaos with the trivial context.
pub fn top_specification(
    system: &System,
    topology: &FiniteTopology,
    bound: usize,
) -> Specification {
    Specification {
        presheaf: Subpresheaf::bounded_chaos(system, topology, bound),
        context: MaximalCover::trivial(topology),
    }
}

/// Bottom of the lattice: the empty presheaf with the finest context.
pub fn bottom_specification(topology: &FiniteTopology) -> Specification {
    Specification {
        presheaf: Subpresheaf::empty(),
        context: crate::topology::finest_context(topology),
    }
}
