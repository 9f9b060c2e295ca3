//! Sequential composition of relations at a fixed domain and a checker for
//! the concurrent-Kleene-algebra laws on sampled relations.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::relations::Relation;
use crate::state_traces::{concat_traces, enumerate_product_states, System, Trace};
use crate::topology::OpenSet;

/// A fixed domain with a column bound for law testing.
#[derive(Clone, Copy, Debug)]
pub struct SeqAlgebraInstance {
    pub domain: OpenSet,
    pub bound: usize,
}

impl SeqAlgebraInstance {
    pub fn new(domain: OpenSet, bound: usize) -> Result<SeqAlgebraInstance> {
        if bound < 1 {
            return Err(Error::Domain("sequential bound must be at least 1".into()));
        }
        Ok(SeqAlgebraInstance { domain, bound })
    }
}

/// Sequential composition: concatenations of nonempty traces whose endpoints
/// match. The shared column is kept once.
pub fn seq_compose(system: &System, r: &Relation, s: &Relation) -> Result<Relation> {
    if r.label() != s.label() {
        return Err(Error::Domain(format!(
            "sequential composition needs one domain, got {:?} and {:?}",
            r.label(),
            s.label()
        )));
    }
    let mut out = BTreeSet::new();
    for f in r.traces(system).iter() {
        if f.is_empty() {
            continue;
        }
        for g in s.traces(system).iter() {
            if g.is_empty() || f.last() != g.first() {
                continue;
            }
            out.insert(concat_traces(f, g)?);
        }
    }
    Relation::explicit(r.label(), out)
}

/// The unit of sequential composition: all single-column traces on the
/// domain.
pub fn skip(system: &System, domain: OpenSet) -> Relation {
    let traces = enumerate_product_states(system, domain)
        .into_iter()
        .map(|col| Trace::new(system, domain, vec![col]).expect("one column is a chain"))
        .collect();
    Relation::explicit(domain, traces).expect("domains match")
}

#[derive(Clone, Debug)]
pub struct LawOutcome {
    pub name: &'static str,
    pub holds: bool,
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug)]
pub struct LawReport {
    pub outcomes: Vec<LawOutcome>,
}

impl LawReport {
    pub fn all_hold(&self) -> bool {
        self.outcomes.iter().all(|o| o.holds)
    }
}

struct Harness<'a> {
    system: &'a System,
    sample: &'a [Relation],
    outcomes: Vec<LawOutcome>,
}

impl<'a> Harness<'a> {
    fn law<F>(&mut self, name: &'static str, mut body: F)
    where
        F: FnMut(&System, &[Relation]) -> Result<Option<String>>,
    {
        let outcome = match body(self.system, self.sample) {
            Ok(None) => LawOutcome { name, holds: true, counterexample: None },
            Ok(Some(ce)) => LawOutcome { name, holds: false, counterexample: Some(ce) },
            Err(e) => LawOutcome { name, holds: false, counterexample: Some(e.to_string()) },
        };
        self.outcomes.push(outcome);
    }
}

fn pairs(sample: &[Relation]) -> impl Iterator<Item = (&Relation, &Relation)> {
    sample
        .iter()
        .flat_map(move |a| sample.iter().map(move |b| (a, b)))
}

/// Verifies the algebra laws on the sample: meet is an idempotent commutative
/// multiplication distributing over unions; sequential composition is
/// associative with skip as unit and the empty relation as annihilator and
/// distributes over unions on both sides; and the exchange inclusion holds in
/// both printed orientations.
pub fn check_cka_laws(
    system: &System,
    instance: SeqAlgebraInstance,
    sample: &[Relation],
) -> Result<LawReport> {
    for r in sample {
        if r.label() != instance.domain {
            return Err(Error::Domain(format!(
                "sample relation on {:?} does not live on the instance domain {:?}",
                r.label(),
                instance.domain
            )));
        }
    }
    let unit = skip(system, instance.domain);
    let zero = Relation::null(instance.domain);
    let mut h = Harness { system, sample, outcomes: Vec::new() };

    h.law("meet idempotent", |sys, sample| {
        for a in sample {
            if !a.intersect(a, sys)?.eq_semantic(a, sys) {
                return Ok(Some(format!("a = {a:?}")));
            }
        }
        Ok(None)
    });
    h.law("meet commutative", |sys, sample| {
        for (a, b) in pairs(sample) {
            if !a.intersect(b, sys)?.eq_semantic(&b.intersect(a, sys)?, sys) {
                return Ok(Some(format!("a = {a:?}, b = {b:?}")));
            }
        }
        Ok(None)
    });
    h.law("meet associative", |sys, sample| {
        for (a, b) in pairs(sample) {
            for c in sample {
                let left = a.intersect(b, sys)?.intersect(c, sys)?;
                let right = a.intersect(&b.intersect(c, sys)?, sys)?;
                if !left.eq_semantic(&right, sys) {
                    return Ok(Some(format!("a = {a:?}, b = {b:?}, c = {c:?}")));
                }
            }
        }
        Ok(None)
    });
    h.law("meet distributes over union", |sys, sample| {
        for (a, b) in pairs(sample) {
            for c in sample {
                let left = a.intersect(&b.union(c, sys)?, sys)?;
                let right = a.intersect(b, sys)?.union(&a.intersect(c, sys)?, sys)?;
                if !left.eq_semantic(&right, sys) {
                    return Ok(Some(format!("a = {a:?}, b = {b:?}, c = {c:?}")));
                }
            }
        }
        Ok(None)
    });
    h.law("seq associative", |sys, sample| {
        for (a, b) in pairs(sample) {
            for c in sample {
                let left = seq_compose(sys, &seq_compose(sys, a, b)?, c)?;
                let right = seq_compose(sys, a, &seq_compose(sys, b, c)?)?;
                if !left.eq_semantic(&right, sys) {
                    return Ok(Some(format!("a = {a:?}, b = {b:?}, c = {c:?}")));
                }
            }
        }
        Ok(None)
    });
    h.law("skip is a two-sided unit", |sys, sample| {
        for a in sample {
            // the unit law needs the empty trace excluded from a
            let cleaned: BTreeSet<Trace> = a
                .traces(sys)
                .iter()
                .filter(|t| !t.is_empty())
                .cloned()
                .collect();
            let a = Relation::explicit(a.label(), cleaned)?;
            if !seq_compose(sys, &a, &unit)?.eq_semantic(&a, sys)
                || !seq_compose(sys, &unit, &a)?.eq_semantic(&a, sys)
            {
                return Ok(Some(format!("a = {a:?}")));
            }
        }
        Ok(None)
    });
    h.law("empty relation annihilates", |sys, sample| {
        for a in sample {
            if !seq_compose(sys, a, &zero)?.is_empty()
                || !seq_compose(sys, &zero, a)?.is_empty()
            {
                return Ok(Some(format!("a = {a:?}")));
            }
        }
        Ok(None)
    });
    h.law("seq distributes over union", |sys, sample| {
        for (a, b) in pairs(sample) {
            for c in sample {
                let left = seq_compose(sys, a, &b.union(c, sys)?)?;
                let right = seq_compose(sys, a, b)?.union(&seq_compose(sys, a, c)?, sys)?;
                if !left.eq_semantic(&right, sys) {
                    return Ok(Some(format!("left: a = {a:?}, b = {b:?}, c = {c:?}")));
                }
                let left = seq_compose(sys, &b.union(c, sys)?, a)?;
                let right = seq_compose(sys, b, a)?.union(&seq_compose(sys, c, a)?, sys)?;
                if !left.eq_semantic(&right, sys) {
                    return Ok(Some(format!("right: a = {a:?}, b = {b:?}, c = {c:?}")));
                }
            }
        }
        Ok(None)
    });
    h.law("exchange inclusion", |sys, sample| {
        for (a, b) in pairs(sample) {
            for (c, d) in pairs(sample) {
                let left = seq_compose(sys, &a.intersect(b, sys)?, &c.intersect(d, sys)?)?;
                let right = seq_compose(sys, a, c)?.intersect(&seq_compose(sys, b, d)?, sys)?;
                if !left.refines(&right, sys) {
                    return Ok(Some(format!(
                        "a = {a:?}, b = {b:?}, c = {c:?}, d = {d:?}"
                    )));
                }
                // the swapped orientation also holds for a symmetric meet
                let swapped =
                    seq_compose(sys, b, c)?.intersect(&seq_compose(sys, a, d)?, sys)?;
                if !left.refines(&swapped, sys) {
                    return Ok(Some(format!(
                        "swapped: a = {a:?}, b = {b:?}, c = {c:?}, d = {d:?}"
                    )));
                }
            }
        }
        Ok(None)
    });
    Ok(LawReport { outcomes: h.outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_traces::{enumerate_traces, StateSpace};

    fn sys1() -> System {
        System::new(vec![(
            "v".into(),
            StateSpace::total(vec!["0".into(), "1".into()]).unwrap(),
        )])
        .unwrap()
    }

    fn rel(system: &System, domain: OpenSet, columns: &[&[u8]]) -> Relation {
        let traces = columns
            .iter()
            .map(|cols| {
                Trace::new(system, domain, cols.iter().map(|&c| vec![c]).collect()).unwrap()
            })
            .collect();
        Relation::explicit(domain, traces).unwrap()
    }

    #[test]
    fn composition_keeps_the_shared_column_once() {
        let sys = sys1();
        let d = OpenSet::singleton(0);
        let r = rel(&sys, d, &[&[0, 1]]);
        let s = rel(&sys, d, &[&[1, 0]]);
        let out = seq_compose(&sys, &r, &s).unwrap();
        assert!(out.eq_semantic(&rel(&sys, d, &[&[0, 1, 0]]), &sys));
        // mismatched endpoints compose to nothing
        assert!(seq_compose(&sys, &r, &r).unwrap().is_empty());
    }

    #[test]
    fn skip_counts_product_states() {
        let sys = sys1();
        let d = OpenSet::singleton(0);
        let unit = skip(&sys, d);
        assert_eq!(unit.len(&sys), 2);
        assert!(seq_compose(&sys, &unit, &unit).unwrap().eq_semantic(&unit, &sys));
    }

    #[test]
    fn exchange_is_strict() {
        let sys = sys1();
        let d = OpenSet::singleton(0);
        let a = rel(&sys, d, &[&[0]]);
        let dd = rel(&sys, d, &[&[0]]);
        let b = rel(&sys, d, &[&[0, 1, 0]]);
        let c = b.clone();
        let ac = seq_compose(&sys, &a, &c).unwrap();
        let bd = seq_compose(&sys, &b, &dd).unwrap();
        let expect = rel(&sys, d, &[&[0, 1, 0]]);
        assert!(ac.eq_semantic(&expect, &sys));
        assert!(bd.eq_semantic(&expect, &sys));
        let left = seq_compose(
            &sys,
            &a.intersect(&b, &sys).unwrap(),
            &c.intersect(&dd, &sys).unwrap(),
        )
        .unwrap();
        assert!(left.is_empty());
        assert!(!ac.intersect(&bd, &sys).unwrap().is_empty());
    }

    #[test]
    fn laws_hold_on_the_full_bounded_universe() {
        let sys = sys1();
        let d = OpenSet::singleton(0);
        let instance = SeqAlgebraInstance::new(d, 3).unwrap();
        // every union of a partition of the bounded universe into three parts
        let universe = enumerate_traces(&sys, d, 3);
        let mut parts: Vec<BTreeSet<Trace>> = vec![BTreeSet::new(); 3];
        for (i, t) in universe.into_iter().enumerate() {
            parts[i % 3].insert(t);
        }
        let sample: Vec<Relation> = parts
            .into_iter()
            .map(|p| Relation::explicit(d, p).unwrap())
            .collect();
        let report = check_cka_laws(&sys, instance, &sample).unwrap();
        for outcome in &report.outcomes {
            assert!(outcome.holds, "law failed: {:?}", outcome);
        }
    }

    #[test]
    fn label_mismatch_is_rejected() {
        let sys = System::new(vec![
            ("a".into(), StateSpace::total(vec!["0".into(), "1".into()]).unwrap()),
            ("b".into(), StateSpace::total(vec!["0".into(), "1".into()]).unwrap()),
        ])
        .unwrap();
        let r = rel(&sys, OpenSet::singleton(0), &[&[0]]);
        let s = rel(&sys, OpenSet::singleton(1), &[&[0]]);
        assert!(seq_compose(&sys, &r, &s).is_err());
    }
}
