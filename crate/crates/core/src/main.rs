use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use relcheck::cohomology::{obstruction_report, Ring};
use relcheck::consistency::{
    check_global_direct, check_global_fast, check_local, ConsistencyReport, Knowledgebase,
};
use relcheck::error::{Error, Result};
use relcheck::kleene::seq_compose;
use relcheck::laws::{
    run_cka_suite, run_info_suite, run_lattice_suite, run_tuple_suite, SuiteReport,
};
use relcheck::relations::{combine, Relation};
use relcheck::scenarios::{dining_model, causal_loop_knowledgebase};
use relcheck::spec_file::{self, parse_ring, ring_name, Model, DEFAULT_BOUND};
use relcheck::state_traces::{System, Trace};
use relcheck::topology::{cover_join, cover_meet, MaximalCover, OpenSet};

#[derive(Parser)]
#[command(name = "relcheck", version, about = "Consistency and obstruction checks for trace models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise agreement of all relations in the model file
    CheckLocal {
        spec: PathBuf,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Global agreement of all relations in the model file
    CheckGlobal {
        spec: PathBuf,
        /// direct joins everything; fast prunes valuations first
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        json_out: Option<PathBuf>,
        /// Include wall-clock timings (makes reports nondeterministic)
        #[arg(long)]
        timings: bool,
    },
    /// Join two named relations
    Combine {
        spec: PathBuf,
        r: String,
        s: String,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Project a named relation onto a comma-separated variable set
    Project {
        spec: PathBuf,
        r: String,
        open: String,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Sequential composition of two named relations on one domain
    Seq {
        spec: PathBuf,
        r: String,
        s: String,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Nerve and obstruction cohomology of the model's specification
    Cohomology {
        spec: PathBuf,
        /// Z, Q, or Z<prime>
        #[arg(long)]
        ring: Option<String>,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Meet of two covers, written as blocks like "a,b;b,c"
    LatticeMeet {
        spec: PathBuf,
        cover_a: String,
        cover_b: String,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Join of two covers, written as blocks like "a,b;b,c"
    LatticeJoin {
        spec: PathBuf,
        cover_a: String,
        cover_b: String,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Generate the dining-philosophers model and report its verdicts
    Dining {
        #[arg(long)]
        n: usize,
        /// Write the model as a spec file
        #[arg(long)]
        export: Option<PathBuf>,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Run a randomized law suite
    Laws {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        cases: Option<usize>,
    },
}

fn format_trace(system: &System, t: &Trace) -> String {
    if t.is_empty() {
        return "[]".into();
    }
    let cols: Vec<String> = t
        .columns()
        .iter()
        .map(|col| {
            let parts: Vec<String> = t
                .domain()
                .members()
                .zip(col)
                .map(|(var, &s)| system.space(var).label(s).to_string())
                .collect();
            format!("({})", parts.join(","))
        })
        .collect();
    format!("[{}]", cols.join(" "))
}

fn format_open(system: &System, open: OpenSet) -> String {
    system.format_open(open)
}

fn named_relation(model: &Model, name: &str) -> Result<Relation> {
    model
        .relations
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, r)| r.clone())
        .ok_or_else(|| Error::SpecFile(format!("no relation named {name:?} in the model")))
}

fn parse_open(system: &System, text: &str) -> Result<OpenSet> {
    let mut open = OpenSet::EMPTY;
    for name in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let var = system
            .var(name)
            .ok_or_else(|| Error::SpecFile(format!("unknown variable {name:?}")))?;
        open = open.union(OpenSet::singleton(var));
    }
    Ok(open)
}

fn parse_cover(model: &Model, text: &str) -> Result<MaximalCover> {
    let blocks = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|b| parse_open(&model.system, b))
        .collect::<Result<_>>()?;
    MaximalCover::new(&model.topology, blocks)
}

fn write_json(path: &Option<PathBuf>, value: &serde_json::Value) -> Result<()> {
    if let Some(path) = path {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn knowledgebase_of(model: &Model) -> Result<Knowledgebase> {
    Knowledgebase::new(model.relations.iter().map(|(_, r)| r.clone()).collect()).map_err(|_| {
        Error::SpecFile("the model file declares no relations to check".into())
    })
}

fn print_local(model: &Model, report: &ConsistencyReport) {
    if report.local.agrees {
        println!("locally consistent: all pairs agree on their overlaps");
    } else {
        println!("locally inconsistent: {} failing pair(s)", report.local.failures.len());
        for f in &report.local.failures {
            let (li, _) = &model.relations[f.i];
            let (lj, _) = &model.relations[f.j];
            println!(
                "  {} vs {} on {}: {} vs {} traces",
                li,
                lj,
                format_open(&model.system, f.overlap),
                f.left.len(&model.system),
                f.right.len(&model.system),
            );
        }
    }
}

fn local_json(model: &Model, report: &ConsistencyReport) -> serde_json::Value {
    json!({
        "verdict": report.local.agrees,
        "failing_pairs": report.local.failures.iter().map(|f| json!({
            "left": model.relations[f.i].0,
            "right": model.relations[f.j].0,
            "overlap": f.overlap.members().map(|v| model.system.name(v)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn run_check_local(spec: PathBuf, json_out: Option<PathBuf>) -> Result<u8> {
    let model = spec_file::load(&spec)?;
    let k = knowledgebase_of(&model)?;
    let report = ConsistencyReport { local: check_local(&model.system, &k)?, global: None };
    print_local(&model, &report);
    write_json(&json_out, &json!({ "command": "check-local", "local": local_json(&model, &report) }))?;
    Ok(u8::from(!report.local.agrees))
}

fn run_check_global(
    spec: PathBuf,
    method: Option<String>,
    json_out: Option<PathBuf>,
    timings: bool,
) -> Result<u8> {
    let model = spec_file::load(&spec)?;
    let k = knowledgebase_of(&model)?;
    let fast = match method.as_deref() {
        None => model.fast_method,
        Some("direct") => false,
        Some("fast") => true,
        Some(other) => return Err(Error::SpecFile(format!("unknown method {other:?}"))),
    };
    let start = Instant::now();
    let report = if fast {
        check_global_fast(&model.system, &k)?
    } else {
        check_global_direct(&model.system, &k)?
    };
    let elapsed = start.elapsed();
    let global = report.global.as_ref().expect("global check ran");
    print_local(&model, &report);
    if global.agrees {
        println!(
            "globally consistent: greatest truth valuation has {} trace(s)",
            global.gamma.len(&model.system)
        );
    } else {
        let size = global.gamma.len(&model.system);
        if size == 0 {
            println!("globally inconsistent, \u{3b3} = \u{2205}");
        } else {
            println!("globally inconsistent, \u{3b3} has {size} trace(s) but fails projection");
        }
    }
    for (i, ok) in global.per_valuation.iter().enumerate() {
        println!(
            "  {}: projection of \u{3b3} {} the valuation",
            model.relations[i].0,
            if *ok { "matches" } else { "differs from" }
        );
    }
    println!(
        "method: {}, largest intermediate: {} trace(s)",
        if fast { "local-computation" } else { "direct" },
        global.largest_intermediate()
    );
    if timings {
        println!("elapsed: {} ms", elapsed.as_millis());
    }
    let mut machine = json!({
        "command": "check-global",
        "method": if fast { "fast" } else { "direct" },
        "verdict": global.agrees,
        "gamma_size": global.gamma.len(&model.system),
        "per_valuation": global.per_valuation,
        "fold_sizes": global.fold_sizes,
        "pruning_sizes": global.pruning_sizes,
        "largest_intermediate": global.largest_intermediate(),
        "local": local_json(&model, &report),
    });
    if timings {
        machine["timings_ms"] = json!(elapsed.as_millis() as u64);
    }
    write_json(&json_out, &machine)?;
    Ok(u8::from(!global.agrees))
}

fn emit_relation(
    model: &Model,
    result: &Relation,
    label: &str,
    json_out: Option<PathBuf>,
) -> Result<u8> {
    let traces = result.traces(&model.system);
    println!(
        "{label} on {}: {} trace(s)",
        format_open(&model.system, result.label()),
        traces.len()
    );
    for t in traces.iter() {
        println!("  {}", format_trace(&model.system, t));
    }
    let out = Model {
        relations: vec![("result".into(), result.clone())],
        specification: None,
        cover: None,
        ..model.clone()
    };
    if let Some(path) = &json_out {
        std::fs::write(path, spec_file::saves(&out))?;
    }
    Ok(0)
}

fn run_cohomology(spec: PathBuf, ring: Option<String>, json_out: Option<PathBuf>) -> Result<u8> {
    let model = spec_file::load(&spec)?;
    let ring = match ring {
        Some(text) => parse_ring(&text)?,
        None => model.ring,
    };
    let cover = model
        .cover
        .clone()
        .ok_or_else(|| Error::SpecFile("the model file declares no cover".into()))?;
    let a = model
        .specification
        .clone()
        .ok_or_else(|| Error::SpecFile("the model file declares no specification carrier".into()))?;
    let report = obstruction_report(&a, &cover, ring)?;
    println!(
        "nerve: {} vertex(es), {} edge(s), {} two-cell(s)",
        report.vertices, report.edges, report.two_cells
    );
    for entry in [&report.h_minus_one, &report.h_zero] {
        let torsion: Vec<String> = entry.torsion.iter().map(|t| t.to_string()).collect();
        println!(
            "H^{} over {}: free rank {}{}",
            entry.degree,
            ring_name(ring),
            entry.free_rank,
            if torsion.is_empty() {
                String::new()
            } else {
                format!(", torsion {}", torsion.join(","))
            }
        );
    }
    if report.has_unparallelisable_sections() {
        println!("obstruction: global sections restrict to zero on the context");
    }
    if report.has_nonliftable_families() {
        println!("obstruction: compatible local families fail to lift to a global section");
        for w in &report.witnesses {
            println!("  witness: {w}");
        }
    }
    let obstructed = report.has_unparallelisable_sections() || report.has_nonliftable_families();
    write_json(
        &json_out,
        &json!({
            "command": "cohomology",
            "ring": ring_name(ring),
            "nerve": { "vertices": report.vertices, "edges": report.edges, "two_cells": report.two_cells },
            "h_minus_one": { "free_rank": report.h_minus_one.free_rank, "torsion": report.h_minus_one.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>() },
            "h_zero": { "free_rank": report.h_zero.free_rank, "torsion": report.h_zero.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>() },
            "witnesses": report.witnesses,
            "obstructed": obstructed,
        }),
    )?;
    Ok(u8::from(obstructed))
}

fn emit_cover(
    model: &Model,
    what: &str,
    cover: &MaximalCover,
    json_out: Option<PathBuf>,
) -> Result<u8> {
    let blocks: Vec<String> = cover
        .blocks()
        .iter()
        .map(|&b| format_open(&model.system, b))
        .collect();
    println!("{what}: {}", blocks.join(" "));
    write_json(
        &json_out,
        &json!({
            "command": what,
            "blocks": cover.blocks().iter().map(|&b| b.members().map(|v| model.system.name(v)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }),
    )?;
    Ok(0)
}

fn run_dining(n: usize, export: Option<PathBuf>, json_out: Option<PathBuf>) -> Result<u8> {
    let m = dining_model(n)?;
    println!(
        "dining model with {n} philosopher(s): {} variables, {} open set(s), context of {} block(s)",
        m.system.len(),
        m.topology.opens().len(),
        m.context.blocks().len()
    );
    let mut relations = Vec::new();
    let mut verdicts = json!({});
    if n == 3 {
        let k = causal_loop_knowledgebase(&m)?;
        relations = k
            .valuations()
            .iter()
            .enumerate()
            .map(|(i, r)| (format!("phi{i}"), r.clone()))
            .collect();
        let report = check_global_direct(&m.system, &k)?;
        let global = report.global.expect("global check ran");
        println!(
            "knowledgebase: locally {}consistent, globally {}consistent",
            if report.local.agrees { "" } else { "in" },
            if global.agrees { "" } else { "in" },
        );
        verdicts = json!({ "local": report.local.agrees, "global": global.agrees });
    }
    let model = Model {
        system: m.system,
        topology: m.topology,
        cover: Some(m.context),
        relations,
        specification: None,
        bound: DEFAULT_BOUND,
        ring: Ring::Rationals,
        fast_method: false,
    };
    if let Some(path) = &export {
        spec_file::save(&model, path)?;
        println!("model written to {}", path.display());
    }
    write_json(&json_out, &json!({ "command": "dining", "n": n, "verdicts": verdicts }))?;
    Ok(0)
}

fn print_suite(report: &SuiteReport) -> u8 {
    println!(
        "suite {}: {} case(s), {}",
        report.suite,
        report.cases,
        if report.ok() { "all laws hold" } else { "FAILURES" }
    );
    for f in &report.failures {
        println!("  counterexample: {f}");
    }
    u8::from(!report.ok())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::CheckLocal { spec, json_out } => run_check_local(spec, json_out),
        Command::CheckGlobal { spec, method, json_out, timings } => {
            run_check_global(spec, method, json_out, timings)
        }
        Command::Combine { spec, r, s, json_out } => {
            let model = spec_file::load(&spec)?;
            let result = combine(&model.system, &named_relation(&model, &r)?, &named_relation(&model, &s)?);
            emit_relation(&model, &result, "join", json_out)
        }
        Command::Project { spec, r, open, json_out } => {
            let model = spec_file::load(&spec)?;
            let sub = parse_open(&model.system, &open)?;
            let result = named_relation(&model, &r)?.project(sub)?;
            emit_relation(&model, &result, "projection", json_out)
        }
        Command::Seq { spec, r, s, json_out } => {
            let model = spec_file::load(&spec)?;
            let result = seq_compose(
                &model.system,
                &named_relation(&model, &r)?,
                &named_relation(&model, &s)?,
            )?;
            emit_relation(&model, &result, "sequential composition", json_out)
        }
        Command::Cohomology { spec, ring, json_out } => run_cohomology(spec, ring, json_out),
        Command::LatticeMeet { spec, cover_a, cover_b, json_out } => {
            let model = spec_file::load(&spec)?;
            let a = parse_cover(&model, &cover_a)?;
            let b = parse_cover(&model, &cover_b)?;
            let meet = cover_meet(&a, &b, &model.topology)?;
            emit_cover(&model, "lattice-meet", &meet, json_out)
        }
        Command::LatticeJoin { spec, cover_a, cover_b, json_out } => {
            let model = spec_file::load(&spec)?;
            let a = parse_cover(&model, &cover_a)?;
            let b = parse_cover(&model, &cover_b)?;
            let join = cover_join(&a, &b)?;
            emit_cover(&model, "lattice-join", &join, json_out)
        }
        Command::Dining { n, export, json_out } => run_dining(n, export, json_out),
        Command::Laws { suite, seed, cases } => {
            let report = match suite.as_str() {
                "info" => run_info_suite(seed, cases.unwrap_or(200))?,
                "tuple" => run_tuple_suite(seed, cases.unwrap_or(200))?,
                "cka" => run_cka_suite(seed, cases.unwrap_or(50))?,
                "lattice" => run_lattice_suite(seed, cases.unwrap_or(25))?,
                other => return Err(Error::SpecFile(format!("unknown suite {other:?}"))),
            };
            Ok(print_suite(&report))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
