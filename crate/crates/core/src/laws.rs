//! Randomized property suites: the information-algebra axioms, the tuple
//! axioms, the sequential-algebra laws, and the cover lattice, each checked
//! against definitional oracles on seeded small instances.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::kleene::{check_cka_laws, seq_compose, SeqAlgebraInstance};
use crate::relations::{combine, glue_pair, Relation};
use crate::sampling::Sampler;
use crate::state_traces::{System, Trace};
use crate::topology::{cover_join, cover_meet, enumerate_maximal_covers, OpenSet};

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

const BOUND: usize = 3;

fn note(failures: &mut Vec<String>, axiom: &str, holds: bool, detail: &str) {
    if !holds && failures.len() < 10 {
        failures.push(format!("{axiom}: {detail}"));
    }
}

fn sub_relation(s: &mut Sampler, r: &Relation, system: &System) -> Relation {
    let traces: BTreeSet<Trace> = r
        .traces(system)
        .iter()
        .filter(|_| s.chance(0.5))
        .cloned()
        .collect();
    Relation::explicit(r.label(), traces).expect("same domain")
}

/// Chain of subsets `a ⊆ b ⊆ of` for projection-transitivity style checks.
fn chain(s: &mut Sampler, of: OpenSet) -> (OpenSet, OpenSet) {
    let b = s.subset(of);
    let a = s.subset(b);
    (a, b)
}

/// The information-algebra axioms, the ordered axioms, and the adjointness
/// inclusions, on random explicit relations.
pub fn run_info_suite(seed: u64, cases: usize) -> Result<SuiteReport> {
    let mut s = Sampler::new(seed);
    let mut failures = Vec::new();
    for case in 0..cases {
        let nvars = s.usize_in(1, 3);
        let system = s.system(nvars, 2);
        let universe = system.universe();
        let u = s.subset(universe);
        let w = s.subset(universe);
        let q_extra = s.subset(universe);
        let phi = s.relation(&system, u, BOUND, 3);
        let psi = s.relation(&system, w, BOUND, 3);
        let chi = s.relation(&system, q_extra, BOUND, 3);
        let sys = &system;
        let detail = format!("case {case}: phi = {phi:?}, psi = {psi:?}, chi = {chi:?}");
        let f = &mut failures;

        let pp = combine(sys, &phi, &psi);
        note(f, "I1 commutativity", pp.eq_semantic(&combine(sys, &psi, &phi), sys), &detail);
        let left = combine(sys, &pp, &chi);
        let right = combine(sys, &phi, &combine(sys, &psi, &chi));
        note(f, "I1 associativity", left.eq_semantic(&right, sys), &detail);

        let (sub_a, sub_b) = chain(&mut s, u);
        note(f, "I2 labelling", phi.project(sub_b)?.label() == sub_b, &detail);
        note(
            f,
            "I3 transitivity",
            phi.project(sub_b)?
                .project(sub_a)?
                .eq_semantic(&phi.project(sub_a)?, sys),
            &detail,
        );
        note(f, "I4 identity projection", phi.project(u)?.eq_semantic(&phi, sys), &detail);
        note(f, "I5 combination labelling", pp.label() == u.union(w), &detail);

        // I6: U subset Q subset U union W
        let q = u.union(s.subset(w));
        note(
            f,
            "I6 combination",
            pp.project(q)?
                .eq_semantic(&combine(sys, &phi, &psi.project(q.inter(w))?), sys),
            &detail,
        );

        note(
            f,
            "I7 neutrality",
            combine(sys, &phi, &Relation::neutral(u, BOUND)).eq_semantic(&phi, sys),
            &detail,
        );
        note(
            f,
            "I8 nullity",
            combine(sys, &phi, &Relation::null(w)).eq_semantic(&Relation::null(u.union(w)), sys),
            &detail,
        );
        note(
            f,
            "I8 null projection",
            phi.project(sub_a)?.is_empty() == phi.is_empty(),
            &detail,
        );
        note(
            f,
            "I9 idempotence",
            combine(sys, &phi, &phi.project(sub_b)?).eq_semantic(&phi, sys),
            &detail,
        );

        note(f, "O2 null is bottom", Relation::null(u).refines(&phi, sys), &detail);
        let phi_sub = sub_relation(&mut s, &phi, sys);
        let psi_sub = sub_relation(&mut s, &psi, sys);
        let phi_sub2 = sub_relation(&mut s, &phi_sub, sys);
        note(f, "O1 reflexive", phi.refines(&phi, sys), &detail);
        note(
            f,
            "O1 transitive",
            !phi_sub2.refines(&phi_sub, sys)
                || !phi_sub.refines(&phi, sys)
                || phi_sub2.refines(&phi, sys),
            &detail,
        );
        note(
            f,
            "O1 antisymmetric",
            !(phi_sub.refines(&phi, sys) && phi.refines(&phi_sub, sys))
                || phi.eq_semantic(&phi_sub, sys),
            &detail,
        );
        note(
            f,
            "O3 combination monotone",
            combine(sys, &phi_sub, &psi_sub).refines(&pp, sys),
            &format!("case {case}: phi' = {phi_sub:?}, psi' = {psi_sub:?}"),
        );
        note(
            f,
            "O4 projection monotone",
            phi_sub.project(sub_b)?.refines(&phi.project(sub_b)?, sys),
            &format!("case {case}: phi' = {phi_sub:?}"),
        );

        // adjointness: a relation sits inside the join of its projections,
        // and a join projects into each operand
        let r = s.relation(&system, u.union(w), BOUND, 3);
        note(
            f,
            "adjointness lower",
            r.refines(&combine(sys, &r.project(u)?, &r.project(w)?), sys),
            &format!("case {case}: r = {r:?}"),
        );
        note(f, "adjointness upper U", pp.project(u)?.refines(&phi, sys), &detail);
        note(f, "adjointness upper W", pp.project(w)?.refines(&psi, sys), &detail);

        if failures.len() >= 10 {
            break;
        }
    }
    Ok(SuiteReport { suite: "info".into(), cases, failures })
}

/// The tuple axioms on random traces; the gluing axiom is driven by pairs
/// that agree by construction.
pub fn run_tuple_suite(seed: u64, cases: usize) -> Result<SuiteReport> {
    let mut s = Sampler::new(seed);
    let mut failures = Vec::new();
    for case in 0..cases {
        let nvars = s.usize_in(1, 3);
        let system = s.system(nvars, 2);
        let universe = system.universe();
        let u = s.subset(universe);
        let w = s.subset(universe);
        let z = s.trace(&system, u.union(w), BOUND);
        let x = z.restrict(u)?;
        let y = z.restrict(w)?;
        let mut local = Vec::new();
        let detail = || format!("case {case}: z = {z:?}, U = {u:?}, W = {w:?}");
        if x.domain() != u {
            local.push(format!("T1: {}", detail()));
        }
        let (sub_a, sub_b) = chain(&mut s, u);
        if x.restrict(sub_b)?.restrict(sub_a)? != x.restrict(sub_a)? {
            local.push(format!("T2: {}", detail()));
        }
        if x.restrict(u)? != x {
            local.push(format!("T3: {}", detail()));
        }
        match glue_pair(&x, &y) {
            Err(e) => local.push(format!("T4 precondition: {} ({e})", detail())),
            Ok(glued) => {
                if glued.is_empty() {
                    local.push(format!("T4 empty glue: {}", detail()));
                }
                if !glued.contains(&z) {
                    local.push(format!("T4 misses source: {}", detail()));
                }
                for g in &glued {
                    if g.restrict(u)? != x || g.restrict(w)? != y {
                        local.push(format!("T4 bad witness {g:?}: {}", detail()));
                    }
                }
            }
        }
        let sup = u.union(s.subset(universe));
        let extended = x.extend_constant(&system, sup)?;
        if extended.restrict(u)? != x {
            local.push(format!("T5: {}", detail()));
        }
        failures.extend(local);
        if failures.len() >= 10 {
            break;
        }
    }
    Ok(SuiteReport { suite: "tuple".into(), cases, failures })
}

/// The sequential-algebra laws on random relation samples at one domain,
/// plus the fixed witness showing the exchange inclusion is strict.
pub fn run_cka_suite(seed: u64, cases: usize) -> Result<SuiteReport> {
    let mut s = Sampler::new(seed);
    let mut failures = Vec::new();
    for case in 0..cases {
        let nvars = s.usize_in(1, 2);
        let system = s.system(nvars, 2);
        let domain = system.universe();
        let instance = SeqAlgebraInstance::new(domain, BOUND)?;
        let sample: Vec<Relation> = (0..4)
            .map(|_| s.relation(&system, domain, BOUND, 3))
            .collect();
        let report = check_cka_laws(&system, instance, &sample)?;
        for outcome in report.outcomes.iter().filter(|o| !o.holds) {
            failures.push(format!(
                "case {case}: {} ({})",
                outcome.name,
                outcome.counterexample.as_deref().unwrap_or("no detail")
            ));
        }
        if failures.len() >= 10 {
            break;
        }
    }
    // strictness witness: both factors compose to [0,1,0] but the meets are
    // disjoint, so the left side is empty while the right side is not
    let system = Sampler::new(seed).system(1, 2);
    let domain = system.universe();
    let single = |cols: &[u8]| {
        Relation::singleton(
            Trace::new(&system, domain, cols.iter().map(|&c| vec![c]).collect())
                .expect("valid witness trace"),
        )
    };
    let a = single(&[0]);
    let d = single(&[0]);
    let b = single(&[0, 1, 0]);
    let c = single(&[0, 1, 0]);
    let lhs = seq_compose(
        &system,
        &a.intersect(&b, &system)?,
        &c.intersect(&d, &system)?,
    )?;
    let rhs = seq_compose(&system, &a, &c)?.intersect(&seq_compose(&system, &b, &d)?, &system)?;
    if !(lhs.is_empty() && !rhs.is_empty()) {
        failures.push("strictness witness failed to separate the exchange sides".into());
    }
    Ok(SuiteReport { suite: "cka".into(), cases, failures })
}

/// The cover lattice against brute-force enumeration: meet is the greatest
/// lower bound and join the least upper bound among all maximal covers.
pub fn run_lattice_suite(seed: u64, spaces: usize) -> Result<SuiteReport> {
    let mut s = Sampler::new(seed);
    let mut failures = Vec::new();
    for case in 0..spaces {
        let nvars = s.usize_in(1, 6);
        let universe = OpenSet::full(nvars);
        let top = s.topology(universe, 24);
        let covers = enumerate_maximal_covers(&top);
        let pairs: Vec<(usize, usize)> = if covers.len() <= 12 {
            (0..covers.len())
                .flat_map(|i| (0..covers.len()).map(move |j| (i, j)))
                .collect()
        } else {
            (0..40)
                .map(|_| {
                    (
                        s.usize_in(0, covers.len() - 1),
                        s.usize_in(0, covers.len() - 1),
                    )
                })
                .collect()
        };
        for (i, j) in pairs {
            let (u, w) = (&covers[i], &covers[j]);
            let meet = cover_meet(u, w, &top)?;
            let join = cover_join(u, w)?;
            let mut bad = |what: &str| {
                if failures.len() < 10 {
                    failures.push(format!("case {case}: {what} for u = {u:?}, w = {w:?}"));
                }
            };
            if !(meet.refines(u)? && meet.refines(w)?) {
                bad("meet is not a lower bound");
            }
            if !(u.refines(&join)? && w.refines(&join)?) {
                bad("join is not an upper bound");
            }
            for c in &covers {
                if c.refines(u)? && c.refines(w)? && !c.refines(&meet)? {
                    bad("meet is not greatest");
                }
                if u.refines(c)? && w.refines(c)? && !join.refines(c)? {
                    bad("join is not least");
                }
            }
        }
        if failures.len() >= 10 {
            break;
        }
    }
    Ok(SuiteReport { suite: "lattice".into(), cases: spaces, failures })
}
