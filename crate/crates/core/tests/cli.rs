//! Black-box tests of the `relcheck` binary: exit codes, round-trips, and
//! deterministic machine output.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::{Command, Output};

use relcheck::cohomology::Ring;
use relcheck::spec_file::{self, Model, DEFAULT_BOUND};
use relcheck::specifications::Subpresheaf;
use relcheck::state_traces::{StateSpace, System, Trace};
use relcheck::topology::{FiniteTopology, MaximalCover, OpenSet};

fn relcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn export_dining(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("dining.json");
    let out = relcheck(&["dining", "--n", "3", "--export", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn dining_export_and_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let path = export_dining(dir.path());

    let local = relcheck(&["check-local", path.to_str().unwrap()]);
    assert_eq!(code(&local), 0);
    assert!(stdout(&local).contains("locally consistent"));

    let global = relcheck(&["check-global", path.to_str().unwrap()]);
    assert_eq!(code(&global), 1, "contextual model exits nonzero");
    assert!(stdout(&global).contains("globally inconsistent"));

    let fast = relcheck(&["check-global", path.to_str().unwrap(), "--method", "fast"]);
    assert_eq!(code(&fast), 1);
    assert!(stdout(&fast).contains("local-computation"));
}

#[test]
fn exported_model_round_trips_to_identical_text() {
    let dir = tempfile::tempdir().unwrap();
    let path = export_dining(dir.path());
    let text = std::fs::read_to_string(&path).unwrap();
    let model = spec_file::loads(&text).unwrap();
    assert_eq!(spec_file::saves(&model), text, "load then save is the identity");
}

#[test]
fn json_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = export_dining(dir.path());
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let run = relcheck(&[
            "check-global",
            path.to_str().unwrap(),
            "--json-out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&run), 1);
    }
    assert_eq!(
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        "repeated runs write identical reports"
    );
}

#[test]
fn relation_operations_on_the_exported_model() {
    let dir = tempfile::tempdir().unwrap();
    let path = export_dining(dir.path());
    let spec = path.to_str().unwrap();

    let joined = relcheck(&["combine", spec, "phi0", "phi1"]);
    assert_eq!(code(&joined), 0);
    assert!(stdout(&joined).contains("join on"));

    let out_path = dir.path().join("proj.json");
    let proj = relcheck(&["project", spec, "phi0", "c0", "--json-out", out_path.to_str().unwrap()]);
    assert_eq!(code(&proj), 0);
    assert!(stdout(&proj).contains("projection on {c0}: 1 trace(s)"));
    // the emitted file is itself a loadable model holding the result
    let emitted = spec_file::load(&out_path).unwrap();
    assert_eq!(emitted.relations.len(), 1);
    assert_eq!(emitted.relations[0].0, "result");

    let seq = relcheck(&["seq", spec, "phi0", "phi0"]);
    assert_eq!(code(&seq), 0);

    let meet = relcheck(&["lattice-meet", spec, "c0,p0,c1;c1,p1,c2;c2,p2,c0", "c0,p0,c1;c1,p1,c2;c2,p2,c0"]);
    assert_eq!(code(&meet), 0);
    assert!(stdout(&meet).contains("lattice-meet"));
}

#[test]
fn cohomology_reports_the_obstruction() {
    // two detached local sections over a discrete two-point space
    let sys = System::new(vec![
        ("a".into(), StateSpace::total(vec!["0".into(), "1".into()]).unwrap()),
        ("b".into(), StateSpace::total(vec!["0".into(), "1".into()]).unwrap()),
    ])
    .unwrap();
    let top = FiniteTopology::discrete(OpenSet::full(2));
    let cover = MaximalCover::new(
        &top,
        BTreeSet::from([OpenSet::singleton(0), OpenSet::singleton(1)]),
    )
    .unwrap();
    let ta = Trace::new(&sys, OpenSet::singleton(0), vec![vec![0]]).unwrap();
    let tb = Trace::new(&sys, OpenSet::singleton(1), vec![vec![1]]).unwrap();
    let a = Subpresheaf::restriction_closure(
        &top,
        BTreeMap::from([
            (OpenSet::singleton(0), BTreeSet::from([ta])),
            (OpenSet::singleton(1), BTreeSet::from([tb])),
        ]),
    )
    .unwrap();
    let model = Model {
        system: sys,
        topology: top,
        cover: Some(cover),
        relations: Vec::new(),
        specification: Some(a),
        bound: DEFAULT_BOUND,
        ring: Ring::Rationals,
        fast_method: false,
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("detached.json");
    spec_file::save(&model, &path).unwrap();

    let out = relcheck(&["cohomology", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "an obstruction exits nonzero");
    let text = stdout(&out);
    assert!(text.contains("H^0 over Q: free rank 2"), "got: {text}");
    assert!(text.contains("fail to lift"), "got: {text}");

    let over_z = relcheck(&["cohomology", path.to_str().unwrap(), "--ring", "Z"]);
    assert_eq!(code(&over_z), 1);
    assert!(stdout(&over_z).contains("H^0 over Z: free rank 2"));
}

#[test]
fn laws_subcommand_runs_a_suite() {
    let out = relcheck(&["laws", "--suite", "info", "--seed", "5", "--cases", "25"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("all laws hold"));
}

#[test]
fn errors_exit_with_code_two() {
    let missing = relcheck(&["check-local", "/nonexistent/model.json"]);
    assert_eq!(code(&missing), 2);
    assert!(!missing.stderr.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let path = export_dining(dir.path());
    let spec = path.to_str().unwrap();

    let bad_method = relcheck(&["check-global", spec, "--method", "psychic"]);
    assert_eq!(code(&bad_method), 2);

    let bad_relation = relcheck(&["project", spec, "phi9", "c0"]);
    assert_eq!(code(&bad_relation), 2);

    let bad_suite = relcheck(&["laws", "--suite", "astrology"]);
    assert_eq!(code(&bad_suite), 2);

    // a stuttering trace is rejected with its position
    let text = std::fs::read_to_string(&path).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let trace = doc["relations"][0]["traces"][0].as_array_mut().unwrap();
    let dup = trace[0].clone();
    trace.insert(1, dup);
    let bad_path = dir.path().join("stutter.json");
    std::fs::write(&bad_path, serde_json::to_string(&doc).unwrap()).unwrap();
    let stutter = relcheck(&["check-local", bad_path.to_str().unwrap()]);
    assert_eq!(code(&stutter), 2);
    assert!(String::from_utf8_lossy(&stutter.stderr).contains("columns 0 and 1"));

    // clap usage problems also land on 2
    let usage = relcheck(&["no-such-command"]);
    assert_eq!(code(&usage), 2);
}
