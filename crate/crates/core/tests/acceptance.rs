//! End-to-end acceptance checks. One pass/fail line is printed per
//! criterion; a failure in one criterion does not hide the others.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use relcheck::cohomology::{build_complex, cohomology, obstruction_report, Ring};
use relcheck::consistency::{
    check_global_direct, check_global_fast, check_local, flasque_beneath, induced_knowledgebase,
};
use relcheck::laws::{run_cka_suite, run_info_suite, run_lattice_suite, run_tuple_suite};
use relcheck::relations::{brute_force_combine, combine, Relation};
use relcheck::sampling::Sampler;
use relcheck::scenarios::{
    dining_model, legal_step, causal_loop_knowledgebase, FREE, LEFT_HOLDER, RIGHT_HOLDER, THINKING,
};
use relcheck::specifications::Subpresheaf;
use relcheck::state_traces::{destutter, StateSpace, System, Trace};
use relcheck::topology::{enumerate_maximal_covers, OpenSet};

fn os(vars: &[usize]) -> OpenSet {
    OpenSet::from_vars(vars.iter().copied())
}

fn within(start: Instant, budget: Duration, what: &str) {
    let took = start.elapsed();
    assert!(took <= budget, "{what} took {took:?}, budget {budget:?}");
}

/// Dining philosophers, three seats: the three commands are legal under the
/// protocol, locally consistent with the expected chopstick projection, and
/// globally inconsistent with an empty join.
fn criterion_1() {
    let start = Instant::now();
    let m = dining_model(3).unwrap();
    let k = causal_loop_knowledgebase(&m).unwrap();
    for (i, phi) in k.valuations().iter().enumerate() {
        let traces = phi.traces(&m.system);
        assert_eq!(traces.len(), 1, "one command per seat");
        let t = traces.iter().next().unwrap();
        let first = t.column_state(0);
        assert_eq!(first.get(m.chopstick(i)), Some(FREE));
        assert_eq!(first.get(m.philosopher(i)), Some(THINKING));
        assert_eq!(first.get(m.chopstick(i + 1)), Some(FREE));
        for c in 0..t.num_columns() - 1 {
            assert!(
                legal_step(&m, i, &t.column_state(c), &t.column_state(c + 1)),
                "command {i} step {c} is legal"
            );
        }
        // projection to the shared chopstick is the displayed five columns
        let ci = OpenSet::singleton(m.chopstick(i));
        let shown = Trace::new(
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
        assert!(phi
            .project(ci)
            .unwrap()
            .eq_semantic(&Relation::singleton(shown), &m.system));
    }
    let local = check_local(&m.system, &k).unwrap();
    assert!(local.agrees, "pairwise overlaps agree");
    let report = check_global_direct(&m.system, &k).unwrap();
    let global = report.global.unwrap();
    assert!(!global.agrees);
    assert!(global.gamma.is_empty(), "the join of the commands is empty");
    assert!(global.per_valuation.iter().all(|&ok| !ok));
    within(start, Duration::from_secs(10), "criterion 1");
}

/// Two raw chains over {a, b} restrict to the same two-column trace on {a};
/// destuttering is idempotent on randomized raw sequences.
fn criterion_2() {
    let sys = System::new(vec![
        ("a".into(), StateSpace::total(vec!["a0".into(), "a1".into()]).unwrap()),
        ("b".into(), StateSpace::total(vec!["b0".into(), "b1".into()]).unwrap()),
    ])
    .unwrap();
    let ab = os(&[0, 1]);
    let t = Trace::new(&sys, ab, vec![vec![0, 0], vec![0, 1], vec![1, 1]]).unwrap();
    let t2 = Trace::new(&sys, ab, vec![vec![0, 0], vec![1, 1]]).unwrap();
    let expected = Trace::new(&sys, os(&[0]), vec![vec![0], vec![1]]).unwrap();
    assert_eq!(t.restrict(os(&[0])).unwrap(), expected);
    assert_eq!(t2.restrict(os(&[0])).unwrap(), expected);

    let mut s = Sampler::new(20);
    let rand_sys = System::new(
        (0..3)
            .map(|v| {
                let labels = (0..2).map(|x| format!("v{v}s{x}")).collect();
                (format!("v{v}"), StateSpace::total(labels).unwrap())
            })
            .collect(),
    )
    .unwrap();
    let dom = rand_sys.universe();
    for _ in 0..1000 {
        let len = s.usize_in(0, 8);
        let raw: Vec<Vec<u8>> = (0..len)
            .map(|_| (0..3).map(|_| s.usize_in(0, 1) as u8).collect())
            .collect();
        let once = destutter(&rand_sys, dom, &raw).unwrap();
        let twice = destutter(&rand_sys, dom, once.columns()).unwrap();
        assert_eq!(once, twice, "destutter is idempotent on {raw:?}");
    }
}

/// Combination agrees with the filter-all-bounded-traces oracle. Operands
/// keep at most two columns so the enumeration bound of four covers every
/// possible glued length.
fn criterion_3() {
    let start = Instant::now();
    let mut s = Sampler::new(30);
    for case in 0..100 {
        let nvars = s.usize_in(1, 3);
        let system = s.system(nvars, 2);
        let u = s.subset(system.universe());
        let w = s.subset(system.universe());
        let r = s.relation(&system, u, 2, 4);
        let t = s.relation(&system, w, 2, 4);
        let joined = combine(&system, &r, &t);
        let oracle = brute_force_combine(&system, &r, &t, 4).unwrap();
        assert!(
            joined.eq_semantic(&oracle, &system),
            "case {case}: combine disagrees with the oracle for {r:?} and {t:?}"
        );
    }
    within(start, Duration::from_secs(60), "criterion 3");
}

/// The algebra, order, tuple, and adjointness suites at two hundred cases
/// per axiom.
fn criterion_4() {
    let info = run_info_suite(40, 200).unwrap();
    assert!(info.ok(), "info suite counterexamples: {:#?}", info.failures);
    let tuple = run_tuple_suite(41, 200).unwrap();
    assert!(tuple.ok(), "tuple suite counterexamples: {:#?}", tuple.failures);
}

/// The pruning-based global check matches the direct one, on the dining
/// knowledgebase and on randomized ones, without growing a larger
/// intermediate relation on the dining instance.
fn criterion_5() {
    let m = dining_model(3).unwrap();
    let k = causal_loop_knowledgebase(&m).unwrap();
    let direct = check_global_direct(&m.system, &k).unwrap();
    let fast = check_global_fast(&m.system, &k).unwrap();
    let dg = direct.global.unwrap();
    let fg = fast.global.unwrap();
    assert_eq!(dg.agrees, fg.agrees);
    assert_eq!(dg.per_valuation, fg.per_valuation);
    assert!(
        fg.largest_intermediate() <= dg.largest_intermediate(),
        "pruning grew the largest intermediate: {} > {}",
        fg.largest_intermediate(),
        dg.largest_intermediate()
    );

    let mut s = Sampler::new(50);
    for case in 0..100 {
        let nvars = s.usize_in(1, 3);
        let system = s.system(nvars, 2);
        let kb = s.knowledgebase(&system, 3, 2, 3);
        let direct = check_global_direct(&system, &kb).unwrap();
        let fast = check_global_fast(&system, &kb).unwrap();
        let dg = direct.global.unwrap();
        let fg = fast.global.unwrap();
        assert_eq!(dg.agrees, fg.agrees, "case {case}: verdicts differ for {kb:?}");
        assert_eq!(
            dg.per_valuation, fg.per_valuation,
            "case {case}: per-valuation comparisons differ for {kb:?}"
        );
    }
}

/// Cover meet and join are the lattice bounds among all maximal covers.
fn criterion_6() {
    let lattice = run_lattice_suite(60, 50).unwrap();
    assert!(lattice.ok(), "lattice counterexamples: {:#?}", lattice.failures);
}

/// Coboundaries square to zero on every built complex (asserted inside the
/// builder); the dining nerve is a triangle boundary; the dining presheaf
/// with no global sections has nonzero degree-zero cohomology, with the
/// integer and rational computations agreeing on the free rank.
fn criterion_7() {
    let start = Instant::now();
    let m = dining_model(3).unwrap();
    let k = causal_loop_knowledgebase(&m).unwrap();
    let partial = k
        .valuations()
        .iter()
        .enumerate()
        .map(|(i, phi)| {
            let traces: BTreeSet<Trace> = phi.traces(&m.system).iter().cloned().collect();
            (m.block(i), traces)
        })
        .collect();
    let a = Subpresheaf::restriction_closure(&m.topology, partial).unwrap();
    assert!(a.section(m.topology.universe()).is_empty(), "no global sections");

    let report = obstruction_report(&a, &m.context, Ring::Rationals).unwrap();
    assert_eq!(
        (report.vertices, report.edges, report.two_cells),
        (3, 3, 0),
        "the nerve is the boundary of a triangle"
    );
    assert!(report.h_zero.free_rank > 0, "degree zero is an obstruction");
    assert!(!report.witnesses.is_empty());

    // the Smith normal form route matches independent row reduction
    let over_z = build_complex(&a, &m.context, Ring::Integers).unwrap();
    let over_q = build_complex(&a, &m.context, Ring::Rationals).unwrap();
    for p in [-1, 0] {
        let hz = cohomology(&over_z, p).unwrap();
        let hq = cohomology(&over_q, p).unwrap();
        assert_eq!(hz.free_rank, hq.free_rank, "free ranks at degree {p}");
        assert!(hz.torsion.is_empty(), "no torsion at degree {p}");
    }

    // random presheaves exercise the d.d = 0 assertion inside the builder
    let mut s = Sampler::new(70);
    for _ in 0..20 {
        let nvars = s.usize_in(1, 3);
        let system = s.system(nvars, 2);
        let top = s.topology(system.universe(), 16);
        let a = s.subpresheaf(&system, &top, 2, 2);
        let cover = s.cover(&top);
        build_complex(&a, &cover, Ring::Integers).unwrap();
    }
    within(start, Duration::from_secs(30), "criterion 7");
}

/// Sequential-composition laws on two hundred randomized relation tuples;
/// the suite includes the fixed witness separating the two sides of the
/// exchange inclusion.
fn criterion_8() {
    let cka = run_cka_suite(80, 200).unwrap();
    assert!(cka.ok(), "cka counterexamples: {:#?}", cka.failures);
}

/// Bounded chaos has surjective restrictions beneath every cover, and that
/// surjectivity implies local consistency of the induced knowledgebase.
fn criterion_9() {
    let mut s = Sampler::new(90);
    for _ in 0..10 {
        let nvars = s.usize_in(1, 2);
        let system = s.system(nvars, 2);
        let top = s.topology(system.universe(), 16);
        let chaos = Subpresheaf::bounded_chaos(&system, &top, 2);
        for cover in enumerate_maximal_covers(&top) {
            let failure = flasque_beneath(&chaos, &cover, &top).unwrap();
            assert!(failure.is_none(), "chaos restriction fails: {failure:?}");
            let kb = induced_knowledgebase(&chaos, &cover).unwrap();
            assert!(check_local(&system, &kb).unwrap().agrees);
        }
    }
    let mut checked = 0;
    for _ in 0..50 {
        let nvars = s.usize_in(1, 2);
        let system = s.system(nvars, 2);
        let top = s.topology(system.universe(), 16);
        let a = s.subpresheaf(&system, &top, 2, 2);
        let cover = s.cover(&top);
        checked += 1;
        if flasque_beneath(&a, &cover, &top).unwrap().is_none() {
            let kb = induced_knowledgebase(&a, &cover).unwrap();
            assert!(
                check_local(&system, &kb).unwrap().agrees,
                "surjective restrictions must give local agreement: {a:?}"
            );
        }
    }
    assert_eq!(checked, 50);
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn()); 9] = [
        ("dining philosophers reproduction", criterion_1),
        ("relative trace restriction and destutter", criterion_2),
        ("combination oracle equivalence", criterion_3),
        ("axiom suites", criterion_4),
        ("local computation equivalence", criterion_5),
        ("cover lattice bounds", criterion_6),
        ("cohomology obstructions", criterion_7),
        ("sequential composition laws", criterion_8),
        ("flasqueness", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        match catch_unwind(AssertUnwindSafe(run)) {
            Ok(()) => println!("criterion {n} ({name}): pass"),
            Err(cause) => {
                let msg = cause
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| cause.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                println!("criterion {n} ({name}): FAIL");
                failed.push(format!("criterion {n} ({name}): {msg}"));
            }
        }
    }
    assert!(failed.is_empty(), "{}", failed.join("\n"));
}
