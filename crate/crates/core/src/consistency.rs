//! Local and global agreement of knowledgebases, truth valuations, the
//! flasqueness sufficient condition, and the local-computation shortcut.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::relations::{combine, Relation};
use crate::specifications::Subpresheaf;
use crate::state_traces::{System, Trace};
use crate::topology::{FiniteTopology, MaximalCover, OpenSet};

/// A finite ordered list of valuations.
#[derive(Clone, Debug)]
pub struct Knowledgebase {
    valuations: Vec<Relation>,
}

impl Knowledgebase {
    pub fn new(valuations: Vec<Relation>) -> Result<Knowledgebase> {
        if valuations.is_empty() {
            return Err(Error::Domain("knowledgebase must be nonempty".into()));
        }
        Ok(Knowledgebase { valuations })
    }

    pub fn valuations(&self) -> &[Relation] {
        &self.valuations
    }

    pub fn union_domain(&self) -> OpenSet {
        self.valuations
            .iter()
            .fold(OpenSet::EMPTY, |acc, r| acc.union(r.label()))
    }
}

/// A pair of valuations whose overlap projections differ.
#[derive(Clone, Debug)]
pub struct PairFailure {
    pub i: usize,
    pub j: usize,
    pub overlap: OpenSet,
    pub left: Relation,
    pub right: Relation,
}

#[derive(Clone, Debug)]
pub struct LocalReport {
    pub agrees: bool,
    pub failures: Vec<PairFailure>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Direct,
    LocalComputation,
}

#[derive(Clone, Debug)]
pub struct GlobalReport {
    pub method: Method,
    pub agrees: bool,
    /// The join of the knowledgebase; the greatest truth valuation when
    /// agreement holds.
    pub gamma: Relation,
    /// Whether gamma projects back onto each valuation, in list order.
    pub per_valuation: Vec<bool>,
    /// Sizes of the running join after each fold step.
    pub fold_sizes: Vec<usize>,
    /// Local-computation only: sizes along each per-valuation pruning fold.
    pub pruning_sizes: Vec<Vec<usize>>,
}

impl GlobalReport {
    pub fn largest_intermediate(&self) -> usize {
        self.fold_sizes
            .iter()
            .chain(self.pruning_sizes.iter().flatten())
            .copied()
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub local: LocalReport,
    pub global: Option<GlobalReport>,
}

/// Two valuations locally agree when their projections onto the common
/// variables coincide.
pub fn locally_agree(system: &System, phi: &Relation, psi: &Relation) -> Result<bool> {
    let overlap = phi.label().inter(psi.label());
    let left = phi.project(overlap)?;
    let right = psi.project(overlap)?;
    Ok(left.eq_semantic(&right, system))
}

pub fn check_local(system: &System, k: &Knowledgebase) -> Result<LocalReport> {
    let mut failures = Vec::new();
    let vs = k.valuations();
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            let overlap = vs[i].label().inter(vs[j].label());
            let left = vs[i].project(overlap)?;
            let right = vs[j].project(overlap)?;
            if !left.eq_semantic(&right, system) {
                failures.push(PairFailure { i, j, overlap, left, right });
            }
        }
    }
    Ok(LocalReport { agrees: failures.is_empty(), failures })
}

fn finish_report(
    system: &System,
    k: &Knowledgebase,
    method: Method,
    gamma: Relation,
    fold_sizes: Vec<usize>,
    pruning_sizes: Vec<Vec<usize>>,
) -> Result<ConsistencyReport> {
    let per_valuation: Vec<bool> = k
        .valuations()
        .iter()
        .map(|phi| {
            Ok(gamma
                .project(phi.label())?
                .eq_semantic(phi, system))
        })
        .collect::<Result<_>>()?;
    let agrees = per_valuation.iter().all(|&b| b);
    let local = check_local(system, k)?;
    Ok(ConsistencyReport {
        local,
        global: Some(GlobalReport {
            method,
            agrees,
            gamma,
            per_valuation,
            fold_sizes,
            pruning_sizes,
        }),
    })
}

/// Global agreement by folding the join in list order; gamma is returned
/// and checked against every valuation.
pub fn check_global_direct(system: &System, k: &Knowledgebase) -> Result<ConsistencyReport> {
    let vs = k.valuations();
    let mut gamma = vs[0].clone();
    let mut fold_sizes = vec![gamma.len(system)];
    for phi in &vs[1..] {
        gamma = combine(system, &gamma, phi);
        fold_sizes.push(gamma.len(system));
    }
    finish_report(system, k, Method::Direct, gamma, fold_sizes, Vec::new())
}

/// Global agreement avoiding the full join for the pruning stage: each
/// valuation is first cut down by the other valuations' projections onto the
/// shared variables. Joining with a projection to a subdomain only removes
/// traces, so these intermediates never exceed the valuation itself, and the
/// final fold runs over the pruned valuations. The result equals the direct
/// join: the join is associative and commutative, projections absorb into it,
/// and every pruned valuation still contains the projection of the join.
pub fn check_global_fast(system: &System, k: &Knowledgebase) -> Result<ConsistencyReport> {
    let vs = k.valuations();
    let mut pruned = Vec::with_capacity(vs.len());
    let mut pruning_sizes = Vec::with_capacity(vs.len());
    for (j, phi) in vs.iter().enumerate() {
        let mut acc = phi.clone();
        let mut sizes = vec![acc.len(system)];
        for (i, psi) in vs.iter().enumerate() {
            if i == j {
                continue;
            }
            let overlap = psi.label().inter(phi.label());
            acc = combine(system, &acc, &psi.project(overlap)?);
            sizes.push(acc.len(system));
        }
        pruned.push(acc);
        pruning_sizes.push(sizes);
    }
    let mut gamma = pruned[0].clone();
    let mut fold_sizes = vec![gamma.len(system)];
    for f in &pruned[1..] {
        gamma = combine(system, &gamma, f);
        fold_sizes.push(gamma.len(system));
    }
    finish_report(
        system,
        k,
        Method::LocalComputation,
        gamma,
        fold_sizes,
        pruning_sizes,
    )
}

/// Witness that a restriction map misses a section: no trace of
/// carrier(`sup`) restricts to `target` on `sub`.
#[derive(Clone, Debug)]
pub struct FlasqueFailure {
    pub sub: OpenSet,
    pub sup: OpenSet,
    pub target: Trace,
}

/// Checks surjectivity of every restriction map between opens lying under a
/// cover block.
pub fn flasque_beneath(
    a: &Subpresheaf,
    cover: &MaximalCover,
    topology: &FiniteTopology,
) -> Result<Option<FlasqueFailure>> {
    let mut pairs: BTreeSet<(OpenSet, OpenSet)> = BTreeSet::new();
    for &block in cover.blocks() {
        if !topology.contains(block) {
            return Err(Error::Domain("cover block is not open".into()));
        }
        for sup in topology.opens_within(block) {
            for sub in topology.opens_within(sup) {
                pairs.insert((sub, sup));
            }
        }
    }
    for (sub, sup) in pairs {
        for t in a.section(sub) {
            let hit = a
                .section(sup)
                .iter()
                .any(|t2| t2.restrict(sub).map(|r| &r == t).unwrap_or(false));
            if !hit {
                return Ok(Some(FlasqueFailure { sub, sup, target: t.clone() }));
            }
        }
    }
    Ok(None)
}

/// The knowledgebase carried by a presheaf over a cover: one relation per
/// block.
pub fn induced_knowledgebase(a: &Subpresheaf, cover: &MaximalCover) -> Result<Knowledgebase> {
    let valuations = cover
        .blocks()
        .iter()
        .map(|&block| Relation::explicit(block, a.section(block).clone()))
        .collect::<Result<Vec<_>>>()?;
    Knowledgebase::new(valuations)
}
