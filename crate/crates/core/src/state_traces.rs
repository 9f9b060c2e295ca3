//! Per-variable state prosets, product states, and relative traces:
//! nondegenerate chains of product states with restriction, normalization,
//! concatenation, and the monotone-surjection calculus.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::topology::{OpenSet, MAX_VARIABLES};

pub type StateId = u8;

/// The proset of states of a single variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
    /// Row-major reachability relation: `order[a * n + b]` means `a -> b`.
    order: Vec<bool>,
}

impl StateSpace {
    /// Space with the total relation: every state reaches every state.
    pub fn total(labels: Vec<String>) -> Result<StateSpace> {
        let n = labels.len();
        Self::check_labels(&labels)?;
        Ok(StateSpace { labels, order: vec![true; n * n] })
    }

    /// Space whose order is the reflexive-transitive closure of `pairs`.
    pub fn with_order(labels: Vec<String>, pairs: &[(StateId, StateId)]) -> Result<StateSpace> {
        let n = labels.len();
        Self::check_labels(&labels)?;
        let mut order = vec![false; n * n];
        for i in 0..n {
            order[i * n + i] = true;
        }
        for &(a, b) in pairs {
            if a as usize >= n || b as usize >= n {
                return Err(Error::Domain(format!(
                    "order pair ({a},{b}) references a state outside 0..{n}"
                )));
            }
            order[a as usize * n + b as usize] = true;
        }
        // Warshall closure.
        for k in 0..n {
            for i in 0..n {
                if order[i * n + k] {
                    for j in 0..n {
                        if order[k * n + j] {
                            order[i * n + j] = true;
                        }
                    }
                }
            }
        }
        Ok(StateSpace { labels, order })
    }

    fn check_labels(labels: &[String]) -> Result<()> {
        if labels.is_empty() {
            return Err(Error::Domain("a state space must be nonempty".into()));
        }
        if labels.len() > StateId::MAX as usize + 1 {
            return Err(Error::Domain("too many states for one variable".into()));
        }
        let mut seen = BTreeSet::new();
        for l in labels {
            if !seen.insert(l) {
                return Err(Error::Domain(format!("duplicate state label {l:?}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, id: StateId) -> &str {
        &self.labels[id as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn find(&self, label: &str) -> Option<StateId> {
        self.labels.iter().position(|l| l == label).map(|i| i as StateId)
    }

    pub fn related(&self, a: StateId, b: StateId) -> bool {
        self.order[a as usize * self.len() + b as usize]
    }

    pub fn is_total(&self) -> bool {
        self.order.iter().all(|&b| b)
    }

    /// Non-reflexive related pairs, for serialization.
    pub fn order_pairs(&self) -> Vec<(StateId, StateId)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && self.order[a * n + b] {
                    out.push((a as StateId, b as StateId));
                }
            }
        }
        out
    }
}

/// The global variable table: names and state spaces in the fixed linear
/// order used for matrix row order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct System {
    names: Vec<String>,
    spaces: Vec<StateSpace>,
}

impl System {
    pub fn new(vars: Vec<(String, StateSpace)>) -> Result<System> {
        if vars.len() > MAX_VARIABLES {
            return Err(Error::Domain(format!(
                "at most {MAX_VARIABLES} variables are supported"
            )));
        }
        let mut seen = BTreeSet::new();
        for (name, _) in &vars {
            if !seen.insert(name.clone()) {
                return Err(Error::Domain(format!("duplicate variable name {name:?}")));
            }
        }
        let (names, spaces) = vars.into_iter().unzip();
        Ok(System { names, spaces })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, var: usize) -> &str {
        &self.names[var]
    }

    pub fn space(&self, var: usize) -> &StateSpace {
        &self.spaces[var]
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn universe(&self) -> OpenSet {
        OpenSet::full(self.len())
    }

    /// Pretty open-set rendering with variable names.
    pub fn format_open(&self, open: OpenSet) -> String {
        let names: Vec<&str> = open.members().map(|v| self.name(v)).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// A single column: one state per variable of the domain, in ascending
/// variable order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductState {
    pub domain: OpenSet,
    pub values: Vec<StateId>,
}

impl ProductState {
    pub fn get(&self, var: usize) -> Option<StateId> {
        self.domain.index_of(var).map(|i| self.values[i])
    }
}

/// A relative trace: a nondegenerate chain of product states on one domain.
///
/// The empty trace (zero columns) plays the role of a chain of length -1; in
/// this crate "length" always means column count.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace {
    domain: OpenSet,
    columns: Vec<Vec<StateId>>,
}

impl Trace {
    pub fn empty(domain: OpenSet) -> Trace {
        Trace { domain, columns: Vec::new() }
    }

    /// Validating constructor: checks column width, state ranges,
    /// nondegeneracy, and the chain condition against the proset orders.
    pub fn new(system: &System, domain: OpenSet, columns: Vec<Vec<StateId>>) -> Result<Trace> {
        validate_columns(system, domain, &columns)?;
        for (k, pair) in columns.windows(2).enumerate() {
            if pair[0] == pair[1] {
                return Err(Error::Domain(format!(
                    "degenerate trace: columns {k} and {} are equal",
                    k + 1
                )));
            }
        }
        Ok(Trace { domain, columns })
    }

    pub(crate) fn from_parts_unchecked(domain: OpenSet, columns: Vec<Vec<StateId>>) -> Trace {
        Trace { domain, columns }
    }

    pub fn domain(&self) -> OpenSet {
        self.domain
    }

    pub fn columns(&self) -> &[Vec<StateId>] {
        &self.columns
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column_state(&self, i: usize) -> ProductState {
        ProductState { domain: self.domain, values: self.columns[i].clone() }
    }

    pub fn first(&self) -> Option<&Vec<StateId>> {
        self.columns.first()
    }

    pub fn last(&self) -> Option<&Vec<StateId>> {
        self.columns.last()
    }

    /// Restriction: project every column to `sub`, then remove stutters.
    pub fn restrict(&self, sub: OpenSet) -> Result<Trace> {
        if !sub.is_subset(self.domain) {
            return Err(Error::Domain(format!(
                "cannot restrict a trace on {:?} to {:?}",
                self.domain, sub
            )));
        }
        if sub == self.domain {
            return Ok(self.clone());
        }
        let idx: Vec<usize> = sub
            .members()
            .map(|v| self.domain.index_of(v).expect("subset member"))
            .collect();
        let mut columns: Vec<Vec<StateId>> = Vec::with_capacity(self.columns.len());
        for col in &self.columns {
            let proj: Vec<StateId> = idx.iter().map(|&i| col[i]).collect();
            if columns.last() != Some(&proj) {
                columns.push(proj);
            }
        }
        Ok(Trace { domain: sub, columns })
    }

    /// Flasque extension witness: extend every column with a constant
    /// assignment (state 0) on the variables of `sup` outside the domain.
    /// Restricting back to the original domain recovers the trace.
    pub fn extend_constant(&self, system: &System, sup: OpenSet) -> Result<Trace> {
        if !self.domain.is_subset(sup) {
            return Err(Error::Domain(format!(
                "cannot extend a trace on {:?} to {:?}",
                self.domain, sup
            )));
        }
        if !sup.is_subset(system.universe()) {
            return Err(Error::Domain("extension target outside the universe".into()));
        }
        let columns: Vec<Vec<StateId>> = self
            .columns
            .iter()
            .map(|col| {
                sup.members()
                    .map(|v| match self.domain.index_of(v) {
                        Some(i) => col[i],
                        None => 0,
                    })
                    .collect()
            })
            .collect();
        Ok(Trace { domain: sup, columns })
    }
}

fn validate_columns(system: &System, domain: OpenSet, columns: &[Vec<StateId>]) -> Result<()> {
    if !domain.is_subset(system.universe()) {
        return Err(Error::Domain(format!(
            "domain {domain:?} is not contained in the universe"
        )));
    }
    let vars: Vec<usize> = domain.members().collect();
    for (k, col) in columns.iter().enumerate() {
        if col.len() != vars.len() {
            return Err(Error::Domain(format!(
                "column {k} has {} entries, expected {}",
                col.len(),
                vars.len()
            )));
        }
        for (i, &v) in vars.iter().enumerate() {
            if col[i] as usize >= system.space(v).len() {
                return Err(Error::Domain(format!(
                    "column {k}: state id {} out of range for variable {}",
                    col[i],
                    system.name(v)
                )));
            }
        }
    }
    for (k, pair) in columns.windows(2).enumerate() {
        for (i, &v) in vars.iter().enumerate() {
            if !system.space(v).related(pair[0][i], pair[1][i]) {
                return Err(Error::ChainViolation(format!(
                    "columns {k} -> {}: state {} does not reach {} on variable {}",
                    k + 1,
                    system.space(v).label(pair[0][i]),
                    system.space(v).label(pair[1][i]),
                    system.name(v)
                )));
            }
        }
    }
    Ok(())
}

/// Eilenberg-Zilber normalization: remove each column equal to its
/// predecessor, returning the unique nondegenerate trace generating the
/// input chain.
pub fn destutter(system: &System, domain: OpenSet, raw: &[Vec<StateId>]) -> Result<Trace> {
    validate_columns(system, domain, raw)?;
    let mut columns: Vec<Vec<StateId>> = Vec::with_capacity(raw.len());
    for col in raw {
        if columns.last() != Some(col) {
            columns.push(col.clone());
        }
    }
    Ok(Trace { domain, columns })
}

/// Variant of [`destutter`] taking product states; all states must share a
/// common domain.
pub fn destutter_states(system: &System, states: &[ProductState]) -> Result<Trace> {
    let domain = match states.first() {
        None => {
            return Err(Error::Domain(
                "destutter_states needs at least one state to fix the domain".into(),
            ))
        }
        Some(s) => s.domain,
    };
    for s in states {
        if s.domain != domain {
            return Err(Error::Domain(format!(
                "mixed domains in raw sequence: {:?} and {:?}",
                domain, s.domain
            )));
        }
    }
    let raw: Vec<Vec<StateId>> = states.iter().map(|s| s.values.clone()).collect();
    destutter(system, domain, &raw)
}

/// Concatenation: drops the final column of `f` and appends `g`. Defined
/// when both operands are nonempty, share a domain, and `f` ends where `g`
/// begins.
pub fn concat_traces(f: &Trace, g: &Trace) -> Result<Trace> {
    if f.domain() != g.domain() {
        return Err(Error::Domain(format!(
            "concatenation needs a common domain, got {:?} and {:?}",
            f.domain(),
            g.domain()
        )));
    }
    if f.is_empty() || g.is_empty() {
        return Err(Error::CompositionUndefined(
            "concatenation is undefined for empty traces".into(),
        ));
    }
    if f.last() != g.first() {
        return Err(Error::CompositionUndefined(
            "final state of the left operand differs from the initial state of the right".into(),
        ));
    }
    let mut columns = f.columns[..f.num_columns() - 1].to_vec();
    columns.extend(g.columns.iter().cloned());
    Ok(Trace { domain: f.domain, columns })
}

/// All product states on a domain, in lexicographic state-id order.
pub fn enumerate_product_states(system: &System, domain: OpenSet) -> Vec<Vec<StateId>> {
    let vars: Vec<usize> = domain.members().collect();
    let mut out = vec![Vec::new()];
    for &v in &vars {
        let n = system.space(v).len();
        let mut next = Vec::with_capacity(out.len() * n);
        for prefix in &out {
            for s in 0..n {
                let mut p = prefix.clone();
                p.push(s as StateId);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// All nondegenerate chains on the domain with at most `max_columns`
/// columns, including the empty trace, in canonical (sorted) order.
pub fn enumerate_traces(system: &System, domain: OpenSet, max_columns: usize) -> Vec<Trace> {
    let states = enumerate_product_states(system, domain);
    let vars: Vec<usize> = domain.members().collect();
    let related = |a: &Vec<StateId>, b: &Vec<StateId>| {
        a != b
            && vars
                .iter()
                .enumerate()
                .all(|(i, &v)| system.space(v).related(a[i], b[i]))
    };
    let mut out: Vec<Trace> = vec![Trace::empty(domain)];
    let mut frontier: Vec<Vec<Vec<StateId>>> = Vec::new();
    if max_columns >= 1 {
        for s in &states {
            frontier.push(vec![s.clone()]);
        }
        out.extend(
            frontier
                .iter()
                .map(|cols| Trace { domain, columns: cols.clone() }),
        );
    }
    for _ in 2..=max_columns {
        let mut next = Vec::new();
        for chain in &frontier {
            let last = chain.last().expect("nonempty chain");
            for s in &states {
                if related(last, s) {
                    let mut c = chain.clone();
                    c.push(s.clone());
                    next.push(c);
                }
            }
        }
        out.extend(next.iter().map(|cols| Trace { domain, columns: cols.clone() }));
        frontier = next;
    }
    out.sort();
    out
}

/// A monotone surjection between finite linear orders, encoded by the
/// fibre-size tuple: entry `i` is how many source elements map to `i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MonotoneSurjection {
    counts: Vec<usize>,
}

impl MonotoneSurjection {
    pub fn new(counts: Vec<usize>) -> Result<MonotoneSurjection> {
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::Domain("surjection counts must be positive".into()));
        }
        Ok(MonotoneSurjection { counts })
    }

    pub fn identity(target_len: usize) -> MonotoneSurjection {
        MonotoneSurjection { counts: vec![1; target_len] }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Number of elements in the source linear order.
    pub fn source_len(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Number of elements in the target linear order.
    pub fn target_len(&self) -> usize {
        self.counts.len()
    }

    /// Greatest common refinement: componentwise max of the count tuples.
    pub fn meet(&self, other: &MonotoneSurjection) -> Result<MonotoneSurjection> {
        if self.counts.len() != other.counts.len() {
            return Err(Error::Domain(format!(
                "surjection targets differ: {} vs {}",
                self.counts.len(),
                other.counts.len()
            )));
        }
        Ok(MonotoneSurjection {
            counts: self
                .counts
                .iter()
                .zip(&other.counts)
                .map(|(&a, &b)| a.max(b))
                .collect(),
        })
    }

    /// `self` factors through `other` (both targeting the same order) iff
    /// every fibre of `self` is at least as large.
    pub fn factors_through(&self, other: &MonotoneSurjection) -> bool {
        self.counts.len() == other.counts.len()
            && self.counts.iter().zip(&other.counts).all(|(&a, &b)| a >= b)
    }

    /// The degenerate chain obtained by repeating column `i` of the trace
    /// `counts[i]` times.
    pub fn apply(&self, t: &Trace) -> Result<Vec<Vec<StateId>>> {
        if self.target_len() != t.num_columns() {
            return Err(Error::Domain(format!(
                "surjection targets {} columns but the trace has {}",
                self.target_len(),
                t.num_columns()
            )));
        }
        let mut out = Vec::with_capacity(self.source_len());
        for (i, &c) in self.counts.iter().enumerate() {
            for _ in 0..c {
                out.push(t.columns()[i].clone());
            }
        }
        Ok(out)
    }
}

/// All monotone surjections onto a `target_len`-element order from sources
/// with at most `max_source` elements.
pub fn enumerate_surjections(target_len: usize, max_source: usize) -> Vec<MonotoneSurjection> {
    let mut out = Vec::new();
    let mut counts = Vec::new();
    fn rec(
        remaining_slots: usize,
        budget: usize,
        counts: &mut Vec<usize>,
        out: &mut Vec<MonotoneSurjection>,
    ) {
        if remaining_slots == 0 {
            out.push(MonotoneSurjection { counts: counts.clone() });
            return;
        }
        for c in 1..=budget.saturating_sub(remaining_slots - 1) {
            counts.push(c);
            rec(remaining_slots - 1, budget - c, counts, out);
            counts.pop();
        }
    }
    if target_len <= max_source {
        rec(target_len, max_source, &mut counts, &mut out);
    }
    out
}
