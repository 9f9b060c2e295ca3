//! The ordered, adjoint information algebra of relations over traces:
//! labelling, projection, combination via synchronized shuffles, neutral
//! and null elements.

use std::borrow::Cow;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::state_traces::{enumerate_traces, StateId, System, Trace};
use crate::topology::OpenSet;

/// How a relation's trace set is stored. `Universal` is the bounded
/// stand-in for the (infinite) universal relation `1_U`: all traces on the
/// domain with at most `bound` columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationKind {
    Explicit(BTreeSet<Trace>),
    Universal { bound: usize },
}

/// A valuation of the information algebra: a domain plus a finite set of
/// traces on that exact domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    domain: OpenSet,
    kind: RelationKind,
}

impl Relation {
    pub fn explicit(domain: OpenSet, traces: BTreeSet<Trace>) -> Result<Relation> {
        for t in &traces {
            if t.domain() != domain {
                return Err(Error::Domain(format!(
                    "relation on {domain:?} contains a trace on {:?}",
                    t.domain()
                )));
            }
        }
        Ok(Relation { domain, kind: RelationKind::Explicit(traces) })
    }

    pub fn singleton(t: Trace) -> Relation {
        let domain = t.domain();
        Relation {
            domain,
            kind: RelationKind::Explicit(BTreeSet::from([t])),
        }
    }

    /// The null element `0_U`: the empty relation.
    pub fn null(domain: OpenSet) -> Relation {
        Relation { domain, kind: RelationKind::Explicit(BTreeSet::new()) }
    }

    /// The neutral element `1_U`, truncated at `bound` columns.
    pub fn neutral(domain: OpenSet, bound: usize) -> Relation {
        Relation { domain, kind: RelationKind::Universal { bound } }
    }

    /// The labelling operation `d`.
    pub fn label(&self) -> OpenSet {
        self.domain
    }

    pub fn kind(&self) -> &RelationKind {
        &self.kind
    }

    pub fn is_universal(&self) -> bool {
        matches!(self.kind, RelationKind::Universal { .. })
    }

    /// The truncation bound of a universal relation.
    pub fn bound(&self) -> Option<usize> {
        match self.kind {
            RelationKind::Explicit(_) => None,
            RelationKind::Universal { bound } => Some(bound),
        }
    }

    /// The trace set, expanding a universal relation on demand.
    pub fn traces<'a>(&'a self, system: &System) -> Cow<'a, BTreeSet<Trace>> {
        match &self.kind {
            RelationKind::Explicit(ts) => Cow::Borrowed(ts),
            RelationKind::Universal { bound } => Cow::Owned(
                enumerate_traces(system, self.domain, *bound).into_iter().collect(),
            ),
        }
    }

    pub fn to_explicit(&self, system: &System) -> Relation {
        Relation {
            domain: self.domain,
            kind: RelationKind::Explicit(self.traces(system).into_owned()),
        }
    }

    pub fn len(&self, system: &System) -> usize {
        match &self.kind {
            RelationKind::Explicit(ts) => ts.len(),
            RelationKind::Universal { .. } => self.traces(system).len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match &self.kind {
            RelationKind::Explicit(ts) => ts.is_empty(),
            RelationKind::Universal { .. } => false, // always contains []
        }
    }

    pub fn contains(&self, system: &System, t: &Trace) -> bool {
        self.traces(system).contains(t)
    }

    /// Projection: elementwise restriction, deduped. Projecting a bounded
    /// universal relation yields the bounded universal relation on the
    /// subdomain (chaos is flasque and restriction never adds columns).
    pub fn project(&self, sub: OpenSet) -> Result<Relation> {
        if !sub.is_subset(self.domain) {
            return Err(Error::Domain(format!(
                "cannot project a relation on {:?} to {:?}",
                self.domain, sub
            )));
        }
        match &self.kind {
            RelationKind::Universal { bound } => Ok(Relation::neutral(sub, *bound)),
            RelationKind::Explicit(ts) => {
                let projected: Result<BTreeSet<Trace>> =
                    ts.iter().map(|t| t.restrict(sub)).collect();
                Ok(Relation { domain: sub, kind: RelationKind::Explicit(projected?) })
            }
        }
    }

    /// Refinement: labels equal and trace-set inclusion.
    pub fn refines(&self, other: &Relation, system: &System) -> bool {
        self.domain == other.domain
            && self.traces(system).is_subset(&other.traces(system))
    }

    /// Set equality after expanding universal relations.
    pub fn eq_semantic(&self, other: &Relation, system: &System) -> bool {
        self.domain == other.domain && self.traces(system) == other.traces(system)
    }

    /// Pointwise intersection at a common label.
    pub fn intersect(&self, other: &Relation, system: &System) -> Result<Relation> {
        if self.domain != other.domain {
            return Err(Error::Domain("intersection needs a common label".into()));
        }
        let ts = self
            .traces(system)
            .intersection(&other.traces(system))
            .cloned()
            .collect();
        Ok(Relation { domain: self.domain, kind: RelationKind::Explicit(ts) })
    }

    /// Pointwise union at a common label.
    pub fn union(&self, other: &Relation, system: &System) -> Result<Relation> {
        if self.domain != other.domain {
            return Err(Error::Domain("union needs a common label".into()));
        }
        let ts = self
            .traces(system)
            .union(&other.traces(system))
            .cloned()
            .collect();
        Ok(Relation { domain: self.domain, kind: RelationKind::Explicit(ts) })
    }
}

fn merge_column(
    union: OpenSet,
    xd: OpenSet,
    xcol: &[StateId],
    yd: OpenSet,
    ycol: &[StateId],
) -> Vec<StateId> {
    union
        .members()
        .map(|v| match xd.index_of(v) {
            Some(i) => xcol[i],
            None => ycol[yd.index_of(v).expect("var in union")],
        })
        .collect()
}

/// All nondegenerate traces on the union domain restricting to `x` and to
/// `y`, by synchronized-shuffle (lattice path) enumeration. Requires the
/// operands to agree on their overlap.
pub fn glue_pair(x: &Trace, y: &Trace) -> Result<BTreeSet<Trace>> {
    let xd = x.domain();
    let yd = y.domain();
    let overlap = xd.inter(yd);
    if x.restrict(overlap)? != y.restrict(overlap)? {
        return Err(Error::GluePrecondition(format!(
            "operands disagree on the overlap {overlap:?}"
        )));
    }
    let union = xd.union(yd);
    if x.is_empty() || y.is_empty() {
        // Agreement forces both operands empty: a nonempty trace restricts
        // to the point trace on the empty overlap, never to [].
        return Ok(BTreeSet::from([Trace::empty(union)]));
    }
    let nx = x.num_columns();
    let ny = y.num_columns();
    // agreement of column pairs on the overlap
    let ox: Vec<usize> = overlap.members().map(|v| xd.index_of(v).unwrap()).collect();
    let oy: Vec<usize> = overlap.members().map(|v| yd.index_of(v).unwrap()).collect();
    let agree = |i: usize, j: usize| {
        ox.iter()
            .zip(&oy)
            .all(|(&a, &b)| x.columns()[i][a] == y.columns()[j][b])
    };
    let mut agree_tab = vec![vec![false; ny]; nx];
    for (i, row) in agree_tab.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = agree(i, j);
        }
    }

    let mut out = BTreeSet::new();
    if !agree_tab[0][0] {
        return Ok(out);
    }
    // Depth-first enumeration of monotone lattice paths through agreeing
    // grid points. Steps that advance only one side keep the merged
    // columns distinct because the advanced operand is nondegenerate
    // outside the (pinned) overlap; diagonal steps are distinct on both
    // parts.
    let mut cols: Vec<Vec<StateId>> = Vec::with_capacity(nx + ny);
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        i: usize,
        j: usize,
        x: &Trace,
        y: &Trace,
        agree_tab: &[Vec<bool>],
        union: OpenSet,
        cols: &mut Vec<Vec<StateId>>,
        out: &mut BTreeSet<Trace>,
    ) {
        let (nx, ny) = (x.num_columns(), y.num_columns());
        cols.push(merge_column(
            union,
            x.domain(),
            &x.columns()[i],
            y.domain(),
            &y.columns()[j],
        ));
        if i + 1 == nx && j + 1 == ny {
            out.insert(Trace::from_parts_unchecked(union, cols.clone()));
        } else {
            for (di, dj) in [(1usize, 0usize), (0, 1), (1, 1)] {
                let (ni, nj) = (i + di, j + dj);
                if ni < nx && nj < ny && agree_tab[ni][nj] {
                    dfs(ni, nj, x, y, agree_tab, union, cols, out);
                }
            }
        }
        cols.pop();
    }
    dfs(0, 0, x, y, &agree_tab, union, &mut cols, &mut out);
    Ok(out)
}

/// Combination (natural join): all traces on the union domain restricting
/// into both operands.
pub fn combine(system: &System, r: &Relation, s: &Relation) -> Relation {
    let union = r.label().union(s.label());
    if let (RelationKind::Universal { bound: b1 }, RelationKind::Universal { bound: b2 }) =
        (r.kind(), s.kind())
    {
        // Exact up to the bound truncation: chaos is flasque.
        return Relation::neutral(union, *b1.min(b2));
    }
    let rs = r.to_explicit(system);
    let ss = s.to_explicit(system);
    let mut out: BTreeSet<Trace> = BTreeSet::new();
    let overlap = r.label().inter(s.label());
    for x in rs.traces(system).iter() {
        let xo = x.restrict(overlap).expect("overlap within label");
        for y in ss.traces(system).iter() {
            if y.restrict(overlap).expect("overlap within label") != xo {
                continue;
            }
            out.extend(glue_pair(x, y).expect("agreement checked"));
        }
    }
    Relation { domain: union, kind: RelationKind::Explicit(out) }
}

/// Independent combination oracle: filter every bounded trace on the union
/// domain by the two restriction-membership conditions. Equals
/// [`combine`] whenever `bound` is at least the largest pairwise column
/// sum of the operands.
pub fn brute_force_combine(
    system: &System,
    r: &Relation,
    s: &Relation,
    bound: usize,
) -> Result<Relation> {
    if r.is_universal() || s.is_universal() {
        return Err(Error::Domain(
            "brute_force_combine requires explicit operands".into(),
        ));
    }
    let union = r.label().union(s.label());
    let rset = r.traces(system);
    let sset = s.traces(system);
    let out: BTreeSet<Trace> = enumerate_traces(system, union, bound)
        .into_iter()
        .filter(|z| {
            rset.contains(&z.restrict(r.label()).expect("subset"))
                && sset.contains(&z.restrict(s.label()).expect("subset"))
        })
        .collect();
    Ok(Relation { domain: union, kind: RelationKind::Explicit(out) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_traces::StateSpace;

    fn two_var_system() -> System {
        System::new(vec![
            ("a".into(), StateSpace::total(vec!["a0".into(), "a1".into()]).unwrap()),
            ("b".into(), StateSpace::total(vec!["b0".into(), "b1".into()]).unwrap()),
        ])
        .unwrap()
    }

    fn os(vars: &[usize]) -> OpenSet {
        OpenSet::from_vars(vars.iter().copied())
    }

    #[test]
    fn glue_disjoint_unit_traces_gives_three_shuffles() {
        let sys = two_var_system();
        let x = Trace::new(&sys, os(&[0]), vec![vec![0], vec![1]]).unwrap();
        let y = Trace::new(&sys, os(&[1]), vec![vec![0], vec![1]]).unwrap();
        let glued = glue_pair(&x, &y).unwrap();
        let expect: BTreeSet<Trace> = [
            vec![vec![0, 0], vec![1, 0], vec![1, 1]],
            vec![vec![0, 0], vec![0, 1], vec![1, 1]],
            vec![vec![0, 0], vec![1, 1]],
        ]
        .into_iter()
        .map(|cols| Trace::new(&sys, os(&[0, 1]), cols).unwrap())
        .collect();
        assert_eq!(glued, expect);
    }

    #[test]
    fn glue_equal_traces_is_singleton() {
        let sys = two_var_system();
        let x = Trace::new(&sys, os(&[0, 1]), vec![vec![0, 0], vec![1, 1], vec![1, 0]]).unwrap();
        assert_eq!(glue_pair(&x, &x).unwrap(), BTreeSet::from([x.clone()]));
        // gluing with one's own restriction recovers the trace
        let y = x.restrict(os(&[1])).unwrap();
        assert_eq!(glue_pair(&x, &y).unwrap(), BTreeSet::from([x]));
    }

    #[test]
    fn glue_disagreement_is_an_error() {
        let sys = two_var_system();
        let x = Trace::new(&sys, os(&[0, 1]), vec![vec![0, 0]]).unwrap();
        let y = Trace::new(&sys, os(&[1]), vec![vec![1]]).unwrap();
        assert!(glue_pair(&x, &y).is_err());
        // [] never agrees with a nonempty trace
        assert!(glue_pair(&Trace::empty(os(&[0])), &y).is_err());
    }

    #[test]
    fn glue_empty_traces() {
        let x = Trace::empty(os(&[0]));
        let y = Trace::empty(os(&[1]));
        assert_eq!(
            glue_pair(&x, &y).unwrap(),
            BTreeSet::from([Trace::empty(os(&[0, 1]))])
        );
    }

    #[test]
    fn combine_matches_brute_force_on_glue_example() {
        let sys = two_var_system();
        let r = Relation::singleton(Trace::new(&sys, os(&[0]), vec![vec![0], vec![1]]).unwrap());
        let s = Relation::singleton(Trace::new(&sys, os(&[1]), vec![vec![0], vec![1]]).unwrap());
        let fast = combine(&sys, &r, &s);
        let slow = brute_force_combine(&sys, &r, &s, 4).unwrap();
        assert!(fast.eq_semantic(&slow, &sys));
        assert_eq!(fast.len(&sys), 3);
    }

    #[test]
    fn combine_with_null_annihilates() {
        let sys = two_var_system();
        let r = Relation::singleton(Trace::new(&sys, os(&[0]), vec![vec![0]]).unwrap());
        let z = combine(&sys, &r, &Relation::null(os(&[1])));
        assert!(z.eq_semantic(&Relation::null(os(&[0, 1])), &sys));
    }

    #[test]
    fn combine_with_neutral_is_identity_within_bound() {
        let sys = two_var_system();
        let r = Relation::explicit(
            os(&[0]),
            [
                Trace::new(&sys, os(&[0]), vec![vec![0], vec![1]]).unwrap(),
                Trace::empty(os(&[0])),
            ]
            .into_iter()
            .collect(),
        )
        .unwrap();
        let c = combine(&sys, &r, &Relation::neutral(os(&[0]), 3));
        assert!(c.eq_semantic(&r, &sys));
    }

    #[test]
    fn neutral_combines_to_neutral_on_union() {
        let sys = two_var_system();
        let c = combine(
            &sys,
            &Relation::neutral(os(&[0]), 3),
            &Relation::neutral(os(&[1]), 3),
        );
        assert_eq!(c, Relation::neutral(os(&[0, 1]), 3));
    }

    #[test]
    fn project_neutral_is_neutral() {
        let sys = two_var_system();
        let n = Relation::neutral(os(&[0, 1]), 3);
        let p = n.project(os(&[0])).unwrap();
        assert_eq!(p, Relation::neutral(os(&[0]), 3));
        // and semantically: restriction of bounded chaos is bounded chaos
        let explicit = n.to_explicit(&sys).project(os(&[0])).unwrap();
        assert!(explicit.eq_semantic(&p, &sys));
    }

    #[test]
    fn label_laws() {
        let sys = two_var_system();
        let r = Relation::singleton(Trace::new(&sys, os(&[0]), vec![vec![0]]).unwrap());
        let s = Relation::singleton(Trace::new(&sys, os(&[1]), vec![vec![1]]).unwrap());
        assert_eq!(r.label(), os(&[0]));
        assert_eq!(combine(&sys, &r, &s).label(), os(&[0, 1]));
        assert_eq!(r.project(OpenSet::EMPTY).unwrap().label(), OpenSet::EMPTY);
        // identity projection (I4)
        assert!(r.project(r.label()).unwrap().eq_semantic(&r, &sys));
    }

    #[test]
    fn null_projection_characterisation() {
        let sys = two_var_system();
        let r = Relation::singleton(Trace::new(&sys, os(&[0, 1]), vec![vec![0, 1]]).unwrap());
        assert!(!r.project(os(&[0])).unwrap().is_empty());
        assert!(Relation::null(os(&[0, 1]))
            .project(os(&[0]))
            .unwrap()
            .is_empty());
        // null is the refinement bottom
        assert!(Relation::null(os(&[0, 1])).refines(&r, &sys));
    }
}
