//! The augmented complex of a finite subpresheaf over a cover, with exact
//! cohomology over a chosen coefficient ring and obstruction reports.

pub mod matrix;
pub mod nerve;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::specifications::Subpresheaf;
use crate::state_traces::Trace;
use crate::topology::{MaximalCover, OpenSet};

pub use matrix::{
    kernel_basis, rank_mod_prime, rank_over_rationals, smith_normal_form, IntMatrix,
    SmithNormalForm,
};
pub use nerve::{build_nerve, Cell, Nerve};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ring {
    Integers,
    Rationals,
    /// The field with a prime number of elements.
    ModPrime(u64),
}

/// One basis vector: a section attached to a simplex. The empty index tuple
/// marks the augmentation degree, whose sections live on the whole space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElement {
    pub indices: Vec<usize>,
    pub open: OpenSet,
    pub trace: Trace,
}

/// Degree slot `k` holds cohomological degree `k - 1`, so slot 0 is the
/// augmentation. `maps[k]` sends slot `k` to slot `k + 1`.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    pub ring: Ring,
    pub degrees: Vec<Vec<BasisElement>>,
    pub maps: Vec<IntMatrix>,
}

impl ChainComplex {
    pub fn describe(&self, slot: usize, index: usize) -> String {
        let b = &self.degrees[slot][index];
        let cols: Vec<String> = b
            .trace
            .columns()
            .iter()
            .map(|c| {
                let parts: Vec<String> = c.iter().map(|s| s.to_string()).collect();
                format!("({})", parts.join(","))
            })
            .collect();
        format!("cell {:?} on {:?}: [{}]", b.indices, b.open, cols.join(" "))
    }
}

fn section_index(
    lookup: &BTreeMap<(Vec<usize>, Trace), usize>,
    indices: &[usize],
    trace: &Trace,
) -> Result<usize> {
    lookup
        .get(&(indices.to_vec(), trace.clone()))
        .copied()
        .ok_or_else(|| {
            Error::Domain(format!(
                "carrier is not closed under restriction: missing section on cell {indices:?}"
            ))
        })
}

/// Builds the augmented complex: slot 0 is the carrier of the whole space,
/// slot `k >= 1` stacks the carriers of the dimension `k - 1` simplices.
/// The augmentation map restricts with positive signs; higher maps use the
/// alternating sign of the inserted index.
pub fn build_complex(a: &Subpresheaf, cover: &MaximalCover, ring: Ring) -> Result<ChainComplex> {
    let nerve = build_nerve(cover);
    let space = cover.universe();
    let mut degrees: Vec<Vec<BasisElement>> = Vec::new();
    degrees.push(
        a.section(space)
            .iter()
            .map(|t| BasisElement { indices: Vec::new(), open: space, trace: t.clone() })
            .collect(),
    );
    let mut lookups: Vec<BTreeMap<(Vec<usize>, Trace), usize>> = Vec::new();
    for dim in 0..=nerve.top_dimension() {
        if nerve.cells(dim).is_empty() {
            break;
        }
        let mut basis = Vec::new();
        let mut lookup = BTreeMap::new();
        for cell in nerve.cells(dim) {
            for t in a.section(cell.open) {
                lookup.insert((cell.indices.clone(), t.clone()), basis.len());
                basis.push(BasisElement {
                    indices: cell.indices.clone(),
                    open: cell.open,
                    trace: t.clone(),
                });
            }
        }
        degrees.push(basis);
        lookups.push(lookup);
    }
    let mut maps = Vec::new();
    for k in 0..degrees.len() - 1 {
        let mut m = IntMatrix::zero(degrees[k + 1].len(), degrees[k].len());
        for (col, b) in degrees[k].iter().enumerate() {
            if k == 0 {
                for cell in nerve.cells(0) {
                    let restricted = b.trace.restrict(cell.open).map_err(|_| {
                        Error::Domain("cover block escapes the space".into())
                    })?;
                    let row = section_index(&lookups[0], &cell.indices, &restricted)?;
                    m.set(row, col, BigInt::one());
                }
            } else {
                for j in 0..nerve.blocks().len() {
                    if b.indices.contains(&j) {
                        continue;
                    }
                    let mut indices = b.indices.clone();
                    let pos = indices.partition_point(|&i| i < j);
                    indices.insert(pos, j);
                    let Some(open) = nerve
                        .cells(k)
                        .iter()
                        .find(|c| c.indices == indices)
                        .map(|c| c.open)
                    else {
                        continue;
                    };
                    let restricted = b.trace.restrict(open).expect("faces shrink");
                    let row = section_index(&lookups[k], &indices, &restricted)?;
                    let sign = if pos % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                    m.set(row, col, sign);
                }
            }
        }
        maps.push(m);
    }
    for w in maps.windows(2) {
        assert!(w[1].mul(&w[0]).is_zero(), "coboundary does not square to zero");
    }
    Ok(ChainComplex { ring, degrees, maps })
}

/// One degree of cohomology: free rank (dimension over a field), invariant
/// factors above 1 (integer coefficients only), and integer representative
/// cocycles spanning the free part, as sparse basis combinations.
#[derive(Clone, Debug)]
pub struct CohomologyEntry {
    pub degree: i64,
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
    pub representatives: Vec<Vec<(BigInt, usize)>>,
}

impl CohomologyEntry {
    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

fn zero_entry(degree: i64) -> CohomologyEntry {
    CohomologyEntry { degree, free_rank: 0, torsion: Vec::new(), representatives: Vec::new() }
}

/// Kernel vectors of `outgoing` that stay independent modulo the column
/// space of `incoming`.
fn representatives(outgoing: &IntMatrix, incoming: &IntMatrix) -> Vec<Vec<(BigInt, usize)>> {
    let dim = outgoing.cols();
    let kernel = kernel_basis(outgoing);
    let mut chosen: Vec<Vec<BigInt>> = Vec::new();
    let base_rank = rank_over_rationals(incoming);
    for v in kernel {
        let cols = incoming.cols() + chosen.len() + 1;
        let mut stacked = IntMatrix::zero(dim, cols);
        for i in 0..dim.min(incoming.rows()) {
            for j in 0..incoming.cols() {
                stacked.set(i, j, incoming.get(i, j).clone());
            }
        }
        for (c, w) in chosen.iter().enumerate() {
            for i in 0..dim {
                stacked.set(i, incoming.cols() + c, w[i].clone());
            }
        }
        for i in 0..dim {
            stacked.set(i, cols - 1, v[i].clone());
        }
        if rank_over_rationals(&stacked) > base_rank + chosen.len() {
            chosen.push(v);
        }
    }
    chosen
        .into_iter()
        .map(|v| {
            v.into_iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(i, x)| (x, i))
                .collect()
        })
        .collect()
}

/// Cohomology at degree `p >= -1` of the built complex, by Smith normal
/// form over the integers and exact elimination over fields.
pub fn cohomology(c: &ChainComplex, p: i64) -> Result<CohomologyEntry> {
    if p < -1 {
        return Err(Error::Domain(format!("degree {p} is below the augmentation")));
    }
    let slot = (p + 1) as usize;
    if slot >= c.degrees.len() {
        return Ok(zero_entry(p));
    }
    let dim = c.degrees[slot].len();
    let outgoing = c
        .maps
        .get(slot)
        .cloned()
        .unwrap_or_else(|| IntMatrix::zero(0, dim));
    let incoming = if slot >= 1 {
        c.maps[slot - 1].clone()
    } else {
        IntMatrix::zero(dim, 0)
    };
    let (rank_out, rank_in, torsion) = match c.ring {
        Ring::Integers => {
            let out = smith_normal_form(&outgoing);
            let inc = smith_normal_form(&incoming);
            let torsion: Vec<BigInt> = inc
                .invariant_factors
                .iter()
                .filter(|f| !f.is_one())
                .cloned()
                .collect();
            (out.rank(), inc.rank(), torsion)
        }
        Ring::Rationals => (
            rank_over_rationals(&outgoing),
            rank_over_rationals(&incoming),
            Vec::new(),
        ),
        Ring::ModPrime(q) => (
            rank_mod_prime(&outgoing, q),
            rank_mod_prime(&incoming, q),
            Vec::new(),
        ),
    };
    let free_rank = dim - rank_out - rank_in;
    let representatives = if free_rank > 0 {
        representatives(&outgoing, &incoming)
    } else {
        Vec::new()
    };
    Ok(CohomologyEntry { degree: p, free_rank, torsion, representatives })
}

#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub vertices: usize,
    pub edges: usize,
    pub two_cells: usize,
    pub h_minus_one: CohomologyEntry,
    pub h_zero: CohomologyEntry,
    /// Human-readable descriptions of the degree-0 representatives.
    pub witnesses: Vec<String>,
}

impl ObstructionReport {
    /// Nonzero augmentation cohomology: global sections restricting to zero.
    pub fn has_unparallelisable_sections(&self) -> bool {
        !self.h_minus_one.is_zero()
    }

    /// Nonzero degree 0: compatible local families with no global lift.
    pub fn has_nonliftable_families(&self) -> bool {
        !self.h_zero.is_zero()
    }
}

pub fn obstruction_report(
    a: &Subpresheaf,
    cover: &MaximalCover,
    ring: Ring,
) -> Result<ObstructionReport> {
    let nerve = build_nerve(cover);
    let complex = build_complex(a, cover, ring)?;
    let h_minus_one = cohomology(&complex, -1)?;
    let h_zero = cohomology(&complex, 0)?;
    let witnesses = h_zero
        .representatives
        .iter()
        .map(|combo| {
            combo
                .iter()
                .map(|(coef, idx)| format!("{coef}*{}", complex.describe(1, *idx)))
                .collect::<Vec<_>>()
                .join(" + ")
        })
        .collect();
    Ok(ObstructionReport {
        vertices: nerve.cells(0).len(),
        edges: nerve.cells(1).len(),
        two_cells: nerve.cells(2).len(),
        h_minus_one,
        h_zero,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_traces::{StateSpace, System};
    use crate::topology::FiniteTopology;
    use std::collections::{BTreeMap as Map, BTreeSet};

    fn os(vars: &[usize]) -> OpenSet {
        OpenSet::from_vars(vars.iter().copied())
    }

    fn sys2() -> System {
        System::new(vec![
            ("a".into(), StateSpace::total(vec!["0".into(), "1".into()]).unwrap()),
            ("b".into(), StateSpace::total(vec!["0".into(), "1".into()]).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn single_global_trace_gives_identity_augmentation() {
        let sys = sys2();
        let top = FiniteTopology::trivial(os(&[0, 1]));
        let t = Trace::new(&sys, os(&[0, 1]), vec![vec![0, 0], vec![1, 1]]).unwrap();
        let a = Subpresheaf::restriction_closure(
            &top,
            Map::from([(os(&[0, 1]), BTreeSet::from([t]))]),
        )
        .unwrap();
        let cover = MaximalCover::trivial(&top);
        let c = build_complex(&a, &cover, Ring::Integers).unwrap();
        assert_eq!(c.degrees[0].len(), 1);
        assert_eq!(c.degrees[1].len(), 1);
        assert_eq!(c.maps[0], IntMatrix::identity(1));
        assert!(cohomology(&c, -1).unwrap().is_zero());
        assert!(cohomology(&c, 0).unwrap().is_zero());
        assert!(cohomology(&c, 5).unwrap().is_zero());
        assert!(cohomology(&c, -2).is_err());
        let report = obstruction_report(&a, &cover, Ring::Rationals).unwrap();
        assert!(!report.has_unparallelisable_sections());
        assert!(!report.has_nonliftable_families());
    }

    #[test]
    fn empty_presheaf_is_all_zero() {
        let top = FiniteTopology::trivial(os(&[0, 1]));
        let cover = MaximalCover::trivial(&top);
        let a = Subpresheaf::empty();
        let report = obstruction_report(&a, &cover, Ring::Integers).unwrap();
        assert!(report.h_minus_one.is_zero());
        assert!(report.h_zero.is_zero());
    }

    #[test]
    fn detached_local_section_shows_in_degree_zero() {
        // one local section on each of two disjoint blocks, nothing global:
        // the kernel of the zero outgoing map is everything, nothing is hit
        let sys = sys2();
        let top = FiniteTopology::discrete(os(&[0, 1]));
        let cover =
            MaximalCover::new(&top, BTreeSet::from([os(&[0]), os(&[1])])).unwrap();
        let ta = Trace::new(&sys, os(&[0]), vec![vec![0]]).unwrap();
        let tb = Trace::new(&sys, os(&[1]), vec![vec![1]]).unwrap();
        let a = Subpresheaf::restriction_closure(
            &top,
            Map::from([
                (os(&[0]), BTreeSet::from([ta])),
                (os(&[1]), BTreeSet::from([tb])),
            ]),
        )
        .unwrap();
        let c = build_complex(&a, &cover, Ring::Rationals).unwrap();
        let h0 = cohomology(&c, 0).unwrap();
        assert_eq!(h0.free_rank, 2);
        assert_eq!(h0.representatives.len(), 2);
        // integer and rational free ranks agree here
        let ci = build_complex(&a, &cover, Ring::Integers).unwrap();
        assert_eq!(cohomology(&ci, 0).unwrap().free_rank, 2);
        assert_eq!(
            cohomology(&build_complex(&a, &cover, Ring::ModPrime(3)).unwrap(), 0)
                .unwrap()
                .free_rank,
            2
        );
    }
}
