//! The dining-philosophers model: state spaces, the transition protocol,
//! legal-trace enumeration, and the three-philosopher knowledgebase whose
//! commands form a causal loop.

use std::collections::BTreeSet;

use crate::consistency::Knowledgebase;
use crate::error::{Error, Result};
use crate::relations::Relation;
use crate::state_traces::{ProductState, StateId, StateSpace, System, Trace};
use crate::topology::{FiniteTopology, MaximalCover, OpenSet};

/// Philosopher states.
pub const THINKING: StateId = 0;
pub const EATING: StateId = 1;
/// Chopstick `c_i` states: held by the left philosopher `i - 1`, free on the
/// table, held by the right philosopher `i`.
pub const LEFT_HOLDER: StateId = 0;
pub const FREE: StateId = 1;
pub const RIGHT_HOLDER: StateId = 2;

/// `n` philosophers around a table, one chopstick between each adjacent
/// pair. Variable `2i` is chopstick `c_i`, variable `2i + 1` is philosopher
/// `p_i`; the context has one block per philosopher's frame of reference.
#[derive(Clone, Debug)]
pub struct DiningModel {
    pub n: usize,
    pub system: System,
    pub topology: FiniteTopology,
    pub context: MaximalCover,
}

impl DiningModel {
    pub fn chopstick(&self, i: usize) -> usize {
        2 * (i % self.n)
    }

    pub fn philosopher(&self, i: usize) -> usize {
        2 * (i % self.n) + 1
    }

    /// Block `U_i = {c_i, p_i, c_{i+1}}`.
    pub fn block(&self, i: usize) -> OpenSet {
        OpenSet::from_vars([
            self.chopstick(i),
            self.philosopher(i),
            self.chopstick(i + 1),
        ])
    }
}

pub fn dining_model(n: usize) -> Result<DiningModel> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 philosophers, got {n}")));
    }
    let mut vars = Vec::new();
    for i in 0..n {
        let left = (i + n - 1) % n;
        vars.push((
            format!("c{i}"),
            StateSpace::total(vec![left.to_string(), "*".into(), i.to_string()])?,
        ));
        vars.push((format!("p{i}"), StateSpace::total(vec!["t".into(), "e".into()])?));
    }
    let system = System::new(vars)?;
    let universe = system.universe();
    let mut blocks = BTreeSet::new();
    let mut subbasis = Vec::new();
    for i in 0..n {
        let block = OpenSet::from_vars([2 * i, 2 * i + 1, 2 * ((i + 1) % n)]);
        blocks.insert(block);
        subbasis.push(block);
    }
    let topology = FiniteTopology::generate(universe, &subbasis)?;
    let context = MaximalCover::new(&topology, blocks)?;
    Ok(DiningModel { n, system, topology, context })
}

/// A chopstick may be picked up, put down, or stay put; it may not jump
/// between holders.
fn chopstick_discipline(a: StateId, b: StateId) -> bool {
    !(a != FREE && b != FREE && a != b)
}

/// Whether the step `s` to `s2` in philosopher `i`'s frame matches one of
/// the protocol rules. Rule 1 is the initial-state constraint and is
/// enforced by `legal_traces` instead.
pub fn legal_step(m: &DiningModel, i: usize, s: &ProductState, s2: &ProductState) -> bool {
    let block = m.block(i);
    if s.domain != block || s2.domain != block {
        return false;
    }
    let read = |state: &ProductState| {
        (
            state.get(m.chopstick(i)).expect("c_i in block"),
            state.get(m.philosopher(i)).expect("p_i in block"),
            state.get(m.chopstick(i + 1)).expect("c_{i+1} in block"),
        )
    };
    let (l, x, r) = read(s);
    let (l2, x2, r2) = read(s2);
    if !chopstick_discipline(l, l2) || !chopstick_discipline(r, r2) {
        return false;
    }
    // philosopher i holds c_i in its RIGHT_HOLDER state and c_{i+1} in its
    // LEFT_HOLDER state
    let no_left = l != RIGHT_HOLDER && l2 != RIGHT_HOLDER;
    let no_right = r != LEFT_HOLDER && r2 != LEFT_HOLDER;
    let rule2 = x2 == x && no_left && no_right;
    let rule3 = x == THINKING && x2 == EATING && no_left && no_right;
    let rule4 = x == EATING && x2 == EATING && r == FREE && r2 == LEFT_HOLDER && no_left;
    let rule5 = x == EATING && x2 == EATING && r == LEFT_HOLDER && r2 == LEFT_HOLDER && no_left;
    let rule6 = (l, x, r) == (FREE, EATING, LEFT_HOLDER)
        && (l2, x2, r2) == (RIGHT_HOLDER, EATING, LEFT_HOLDER);
    let rule7 = (l, x, r) == (RIGHT_HOLDER, EATING, LEFT_HOLDER)
        && (l2, x2, r2) == (FREE, THINKING, FREE);
    rule2 || rule3 || rule4 || rule5 || rule6 || rule7
}

fn initial_state(m: &DiningModel, i: usize) -> ProductState {
    let block = m.block(i);
    let mut values = vec![0; block.len()];
    for (var, v) in [
        (m.chopstick(i), FREE),
        (m.philosopher(i), THINKING),
        (m.chopstick(i + 1), FREE),
    ] {
        values[block.index_of(var).expect("var in block")] = v;
    }
    ProductState { domain: block, values }
}

/// All protocol-abiding traces in philosopher `i`'s frame with at most
/// `max_columns` columns, starting from the initial state.
pub fn legal_traces(m: &DiningModel, i: usize, max_columns: usize) -> Result<Relation> {
    if max_columns < 1 {
        return Err(Error::Domain("need at least one column".into()));
    }
    let block = m.block(i);
    let states: Vec<ProductState> =
        crate::state_traces::enumerate_product_states(&m.system, block)
            .into_iter()
            .map(|values| ProductState { domain: block, values })
            .collect();
    let mut out: BTreeSet<Trace> = BTreeSet::new();
    let mut frontier = vec![vec![initial_state(m, i)]];
    for _ in 0..max_columns {
        let mut next = Vec::new();
        for chain in &frontier {
            out.insert(
                Trace::new(
                    &m.system,
                    block,
                    chain.iter().map(|s| s.values.clone()).collect(),
                )
                .expect("steps are distinct states"),
            );
            let last = chain.last().expect("chains are nonempty");
            for s in &states {
                if s != last && legal_step(m, i, last, s) {
                    let mut c = chain.clone();
                    c.push(s.clone());
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    Relation::explicit(block, out)
}

/// The three singleton commands of the causal-loop example, one per
/// philosopher's frame.
pub fn causal_loop_knowledgebase(m: &DiningModel) -> Result<Knowledgebase> {
    if m.n != 3 {
        return Err(Error::Domain(format!(
            "the causal-loop knowledgebase is defined for 3 philosophers, got {}",
            m.n
        )));
    }
    let mut valuations = Vec::new();
    for i in 0..3 {
        let block = m.block(i);
        // rows over (c_i, p_i, c_{i+1}), nine columns
        let row_ci = [FREE, FREE, FREE, LEFT_HOLDER, FREE, RIGHT_HOLDER, FREE, FREE, FREE];
        let row_pi = [
            THINKING, EATING, EATING, EATING, EATING, EATING, THINKING, THINKING, THINKING,
        ];
        let row_cnext = [
            FREE,
            FREE,
            LEFT_HOLDER,
            LEFT_HOLDER,
            LEFT_HOLDER,
            LEFT_HOLDER,
            FREE,
            RIGHT_HOLDER,
            FREE,
        ];
        let mut columns = Vec::new();
        for k in 0..9 {
            let mut col = vec![0; block.len()];
            for (var, v) in [
                (m.chopstick(i), row_ci[k]),
                (m.philosopher(i), row_pi[k]),
                (m.chopstick(i + 1), row_cnext[k]),
            ] {
                col[block.index_of(var).expect("var in block")] = v;
            }
            columns.push(col);
        }
        valuations.push(Relation::singleton(Trace::new(&m.system, block, columns)?));
    }
    Knowledgebase::new(valuations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::{check_global_direct, check_local, locally_agree};

    #[test]
    fn model_shape_for_three() {
        let m = dining_model(3).unwrap();
        assert_eq!(m.system.len(), 6);
        assert_eq!(m.context.blocks().len(), 3);
        for i in 0..3 {
            for j in i + 1..3 {
                let overlap = m.block(i).inter(m.block(j));
                assert_eq!(overlap.len(), 1, "blocks overlap in one chopstick");
            }
        }
        assert!(m.topology.is_closed_under_union_and_intersection());
        assert!(dining_model(1).is_err());
        // two philosophers share both chopsticks
        let m2 = dining_model(2).unwrap();
        assert_eq!(
            m2.block(0).inter(m2.block(1)),
            OpenSet::from_vars([0, 2])
        );
    }

    #[test]
    fn protocol_steps() {
        let m = dining_model(3).unwrap();
        let s = |l, x, r| {
            let block = m.block(0);
            let mut values = vec![0; 3];
            for (var, v) in [(m.chopstick(0), l), (m.philosopher(0), x), (m.chopstick(1), r)] {
                values[block.index_of(var).unwrap()] = v;
            }
            ProductState { domain: block, values }
        };
        // becoming hungry, picking up the right chopstick, releasing both
        assert!(legal_step(&m, 0, &s(FREE, THINKING, FREE), &s(FREE, EATING, FREE)));
        assert!(legal_step(&m, 0, &s(FREE, EATING, FREE), &s(FREE, EATING, LEFT_HOLDER)));
        assert!(legal_step(
            &m,
            0,
            &s(RIGHT_HOLDER, EATING, LEFT_HOLDER),
            &s(FREE, THINKING, FREE)
        ));
        // holding both chopsticks while staying put is not a rule
        assert!(!legal_step(
            &m,
            0,
            &s(RIGHT_HOLDER, EATING, LEFT_HOLDER),
            &s(RIGHT_HOLDER, THINKING, LEFT_HOLDER)
        ));
        // a chopstick may not jump between holders
        assert!(!legal_step(
            &m,
            0,
            &s(FREE, THINKING, LEFT_HOLDER),
            &s(FREE, THINKING, RIGHT_HOLDER)
        ));
    }

    #[test]
    fn legal_trace_counts() {
        let m = dining_model(3).unwrap();
        let r1 = legal_traces(&m, 0, 1).unwrap();
        assert_eq!(r1.len(&m.system), 1);
        let mut prev = 1;
        for bound in 2..=5 {
            let r = legal_traces(&m, 0, bound).unwrap();
            let n = r.len(&m.system);
            assert!(n > prev, "counts grow with the bound");
            prev = n;
        }
    }

    #[test]
    fn commands_are_legal_and_locally_consistent() {
        let m = dining_model(3).unwrap();
        let k = causal_loop_knowledgebase(&m).unwrap();
        for (i, phi) in k.valuations().iter().enumerate() {
            let legal = legal_traces(&m, i, 9).unwrap();
            assert!(phi.refines(&legal, &m.system), "command {i} is legal");
            // the shared chopstick projection is the displayed 5-column trace
            let ci = OpenSet::singleton(m.chopstick(i));
            let proj = phi.project(ci).unwrap();
            let expected = Trace::new(
                &m.system,
                ci,
                vec![
                    vec![FREE],
                    vec![LEFT_HOLDER],
                    vec![FREE],
                    vec![RIGHT_HOLDER],
                    vec![FREE],
                ],
            )
            .unwrap();
            assert!(proj.eq_semantic(&Relation::singleton(expected), &m.system));
            let prev = &k.valuations()[(i + 2) % 3];
            assert!(locally_agree(&m.system, phi, prev).unwrap());
        }
        assert!(check_local(&m.system, &k).unwrap().agrees);
    }

    #[test]
    fn causal_loop_is_globally_inconsistent() {
        let m = dining_model(3).unwrap();
        let k = causal_loop_knowledgebase(&m).unwrap();
        let report = check_global_direct(&m.system, &k).unwrap();
        let global = report.global.unwrap();
        assert!(report.local.agrees);
        assert!(!global.agrees);
        assert!(global.gamma.is_empty());
        assert!(global.per_valuation.iter().all(|&ok| !ok));
    }
}
