//! Finite topological spaces over variable sets, their open-set families,
//! and the complete distributive lattice of maximal covers.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Variables are dense indices `0..n` into a [`crate::state_traces::System`];
/// open sets are bitmasks over them, so at most 64 variables are supported.
pub const MAX_VARIABLES: usize = 64;

/// A set of variable ids, open in some [`FiniteTopology`].
///
/// Represented as a bitmask; the ascending-id order of [`OpenSet::members`]
/// is the fixed row order used by every matrix encoding of traces.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OpenSet(u64);

impl OpenSet {
    pub const EMPTY: OpenSet = OpenSet(0);

    pub fn singleton(var: usize) -> OpenSet {
        assert!(var < MAX_VARIABLES);
        OpenSet(1u64 << var)
    }

    pub fn from_vars<I: IntoIterator<Item = usize>>(vars: I) -> OpenSet {
        let mut bits = 0u64;
        for v in vars {
            assert!(v < MAX_VARIABLES);
            bits |= 1u64 << v;
        }
        OpenSet(bits)
    }

    /// The full set `{0, ..., n-1}`.
    pub fn full(n: usize) -> OpenSet {
        assert!(n <= MAX_VARIABLES);
        if n == 64 {
            OpenSet(u64::MAX)
        } else {
            OpenSet((1u64 << n) - 1)
        }
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..MAX_VARIABLES).filter(move |v| self.0 & (1u64 << v) != 0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, var: usize) -> bool {
        var < MAX_VARIABLES && self.0 & (1u64 << var) != 0
    }

    /// Rank of `var` among the members, i.e. its row index in the matrix
    /// encoding of a trace on this domain.
    pub fn index_of(self, var: usize) -> Option<usize> {
        if !self.contains(var) {
            return None;
        }
        Some((self.0 & ((1u64 << var) - 1)).count_ones() as usize)
    }

    pub fn union(self, other: OpenSet) -> OpenSet {
        OpenSet(self.0 | other.0)
    }

    pub fn inter(self, other: OpenSet) -> OpenSet {
        OpenSet(self.0 & other.0)
    }

    pub fn diff(self, other: OpenSet) -> OpenSet {
        OpenSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: OpenSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_strict_subset(self, other: OpenSet) -> bool {
        self != other && self.is_subset(other)
    }
}

impl fmt::Debug for OpenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.members().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// An explicit finite topology: the universe together with every open set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTopology {
    universe: OpenSet,
    opens: BTreeSet<OpenSet>,
}

impl FiniteTopology {
    /// Smallest topology on `universe` containing every subbasis element:
    /// all unions of finite intersections, plus the empty set and the
    /// universe (empty union and empty intersection).
    pub fn generate(universe: OpenSet, subbasis: &[OpenSet]) -> Result<FiniteTopology> {
        for s in subbasis {
            if !s.is_subset(universe) {
                return Err(Error::Domain(format!(
                    "subbasis element {s:?} is not contained in the universe {universe:?}"
                )));
            }
        }
        // All intersections of subfamilies of the subbasis (empty family
        // gives the universe).
        let mut inters: BTreeSet<OpenSet> = BTreeSet::new();
        inters.insert(universe);
        for s in subbasis {
            let more: Vec<OpenSet> = inters.iter().map(|i| i.inter(*s)).collect();
            inters.extend(more);
        }
        // Close under pairwise unions.
        let mut opens = inters;
        opens.insert(OpenSet::EMPTY);
        loop {
            let mut added = Vec::new();
            for a in &opens {
                for b in &opens {
                    let u = a.union(*b);
                    if !opens.contains(&u) {
                        added.push(u);
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            opens.extend(added);
        }
        Ok(FiniteTopology { universe, opens })
    }

    pub fn discrete(universe: OpenSet) -> FiniteTopology {
        let singletons: Vec<OpenSet> = universe.members().map(OpenSet::singleton).collect();
        FiniteTopology::generate(universe, &singletons).expect("singletons are subsets")
    }

    pub fn trivial(universe: OpenSet) -> FiniteTopology {
        FiniteTopology::generate(universe, &[]).expect("empty subbasis")
    }

    pub fn universe(&self) -> OpenSet {
        self.universe
    }

    pub fn opens(&self) -> &BTreeSet<OpenSet> {
        &self.opens
    }

    pub fn contains(&self, open: OpenSet) -> bool {
        self.opens.contains(&open)
    }

    /// All opens contained in `within`, ascending.
    pub fn opens_within(&self, within: OpenSet) -> impl Iterator<Item = OpenSet> + '_ {
        self.opens.iter().copied().filter(move |o| o.is_subset(within))
    }

    /// Exhaustive pairwise check of the topology axioms.
    pub fn is_closed_under_union_and_intersection(&self) -> bool {
        if !self.opens.contains(&OpenSet::EMPTY) || !self.opens.contains(&self.universe) {
            return false;
        }
        for a in &self.opens {
            if !a.is_subset(self.universe) {
                return false;
            }
            for b in &self.opens {
                if !self.opens.contains(&a.union(*b)) || !self.opens.contains(&a.inter(*b)) {
                    return false;
                }
            }
        }
        true
    }
}

/// A context: an antichain of open sets covering the universe.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MaximalCover {
    universe: OpenSet,
    blocks: BTreeSet<OpenSet>,
}

impl MaximalCover {
    pub fn new(topology: &FiniteTopology, blocks: BTreeSet<OpenSet>) -> Result<MaximalCover> {
        let mut union = OpenSet::EMPTY;
        for b in &blocks {
            if !topology.contains(*b) {
                return Err(Error::Domain(format!("cover block {b:?} is not open")));
            }
            union = union.union(*b);
        }
        if union != topology.universe() {
            return Err(Error::Domain(format!(
                "cover union {union:?} does not equal the universe {:?}",
                topology.universe()
            )));
        }
        for a in &blocks {
            for b in &blocks {
                if a != b && a.is_subset(*b) {
                    return Err(Error::Domain(format!(
                        "cover is not an antichain: {a:?} is contained in {b:?}"
                    )));
                }
            }
        }
        Ok(MaximalCover { universe: topology.universe(), blocks })
    }

    /// The trivial context `{V}`.
    pub fn trivial(topology: &FiniteTopology) -> MaximalCover {
        MaximalCover {
            universe: topology.universe(),
            blocks: BTreeSet::from([topology.universe()]),
        }
    }

    pub fn universe(&self) -> OpenSet {
        self.universe
    }

    pub fn blocks(&self) -> &BTreeSet<OpenSet> {
        &self.blocks
    }

    /// `self` refines `other`: every block of `self` is contained in a
    /// block of `other`.
    pub fn refines(&self, other: &MaximalCover) -> Result<bool> {
        if self.universe != other.universe {
            return Err(Error::Domain(
                "covers over different universes cannot be compared".into(),
            ));
        }
        Ok(self
            .blocks
            .iter()
            .all(|u| other.blocks.iter().any(|w| u.is_subset(*w))))
    }
}

/// The down-set `L_U` of a cover: all opens contained in some block.
pub fn lower_closure(cover: &MaximalCover, topology: &FiniteTopology) -> BTreeSet<OpenSet> {
    topology
        .opens()
        .iter()
        .copied()
        .filter(|o| cover.blocks().iter().any(|b| o.is_subset(*b)))
        .collect()
}

fn maximal_elements(sets: &BTreeSet<OpenSet>) -> BTreeSet<OpenSet> {
    sets.iter()
        .copied()
        .filter(|a| !sets.iter().any(|b| a.is_strict_subset(*b)))
        .collect()
}

/// Meet in the cover lattice: maximal elements of `L_u ∩ L_w`.
pub fn cover_meet(
    u: &MaximalCover,
    w: &MaximalCover,
    topology: &FiniteTopology,
) -> Result<MaximalCover> {
    if u.universe() != w.universe() || u.universe() != topology.universe() {
        return Err(Error::Domain("cover_meet requires one common topology".into()));
    }
    let common: BTreeSet<OpenSet> = lower_closure(u, topology)
        .intersection(&lower_closure(w, topology))
        .copied()
        .collect();
    MaximalCover::new(topology, maximal_elements(&common))
}

/// Join in the cover lattice: maximal elements of the union of blocks.
pub fn cover_join(u: &MaximalCover, w: &MaximalCover) -> Result<MaximalCover> {
    if u.universe() != w.universe() {
        return Err(Error::Domain("cover_join requires one common topology".into()));
    }
    let all: BTreeSet<OpenSet> = u.blocks().union(w.blocks()).copied().collect();
    let blocks = maximal_elements(&all);
    Ok(MaximalCover { universe: u.universe(), blocks })
}

/// Every maximal cover of the space, by exhaustive antichain search.
pub fn enumerate_maximal_covers(topology: &FiniteTopology) -> Vec<MaximalCover> {
    let universe = topology.universe();
    let opens: Vec<OpenSet> = topology
        .opens()
        .iter()
        .copied()
        .filter(|o| !o.is_empty())
        .collect();
    // suffix_union[i] = union of opens[i..]
    let mut suffix_union = vec![OpenSet::EMPTY; opens.len() + 1];
    for i in (0..opens.len()).rev() {
        suffix_union[i] = suffix_union[i + 1].union(opens[i]);
    }
    let mut out = Vec::new();
    let mut chosen: Vec<OpenSet> = Vec::new();
    fn rec(
        idx: usize,
        covered: OpenSet,
        universe: OpenSet,
        opens: &[OpenSet],
        suffix_union: &[OpenSet],
        chosen: &mut Vec<OpenSet>,
        out: &mut Vec<MaximalCover>,
    ) {
        if !universe.is_subset(covered.union(suffix_union[idx])) {
            return;
        }
        if idx == opens.len() {
            if covered == universe {
                out.push(MaximalCover {
                    universe,
                    blocks: chosen.iter().copied().collect(),
                });
            }
            return;
        }
        // skip opens[idx]
        rec(idx + 1, covered, universe, opens, suffix_union, chosen, out);
        // take opens[idx] if it keeps the antichain property
        let cand = opens[idx];
        if chosen
            .iter()
            .all(|c| !c.is_subset(cand) && !cand.is_subset(*c))
        {
            chosen.push(cand);
            rec(
                idx + 1,
                covered.union(cand),
                universe,
                opens,
                suffix_union,
                chosen,
                out,
            );
            chosen.pop();
        }
    }
    rec(0, OpenSet::EMPTY, universe, &opens, &suffix_union, &mut chosen, &mut out);
    if universe.is_empty() && out.is_empty() {
        out.push(MaximalCover { universe, blocks: BTreeSet::new() });
    }
    out.sort();
    out.dedup();
    out
}

/// The finest context: the meet of all maximal covers, computed by folding
/// `cover_meet` over the brute-force enumeration.
pub fn finest_context(topology: &FiniteTopology) -> MaximalCover {
    let covers = enumerate_maximal_covers(topology);
    let mut acc = covers[0].clone();
    for c in &covers[1..] {
        acc = cover_meet(&acc, c, topology).expect("same topology");
    }
    acc
}

/// Independent route to the finest context: the maximal elements of the
/// family of point-minimal opens `U_x` (the intersection of all opens
/// containing `x`).
pub fn point_minimal_cover(topology: &FiniteTopology) -> MaximalCover {
    let mut mins: BTreeSet<OpenSet> = BTreeSet::new();
    for x in topology.universe().members() {
        let mut ux = topology.universe();
        for o in topology.opens() {
            if o.contains(x) {
                ux = ux.inter(*o);
            }
        }
        mins.insert(ux);
    }
    MaximalCover {
        universe: topology.universe(),
        blocks: maximal_elements(&mins),
    }
}
