//! Command-line driver: check systems, evaluate traces, run the benchmark
//! suite, and export graphs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use csa::bench::{run_suite, to_csv, BenchSpec};
use csa::bisim::check_bound_agnostic;
use csa::checks::{
    check_cibi, check_exhaustive, check_ibi, check_obi, check_safety, check_sibi, check_smc,
    check_stable_bounded, KmcOptions, KmcStatus, PropertyVerdict,
};
use csa::explore::{build_full_ts, build_rts, to_dot, DEFAULT_NODE_CAP};
use csa::format::{parse_system, parse_trace};
use csa::model::{Bound, System};
use csa::report;
use csa::traces;

#[derive(Parser)]
#[command(
    name = "csa",
    about = "Bounded compatibility checker for communicating session automata",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a system for bounded compatibility and related properties.
    Check(CheckArgs),
    /// Evaluate trace predicates, optionally against a second trace.
    Trace(TraceArgs),
    /// Generate benchmark systems and time the checker on them.
    Bench(BenchArgs),
    /// List or print the bundled example systems.
    Corpus { name: Option<String> },
}

#[derive(Args)]
struct CheckArgs {
    /// System file in the machine-block format.
    file: PathBuf,
    /// Largest channel capacity to try.
    #[arg(long, default_value_t = 10)]
    max: u32,
    /// Evaluate requested properties on the full bounded system instead of
    /// the reduced one.
    #[arg(long)]
    full_ts: bool,
    /// Also evaluate these properties at the decisive bound
    /// (comma-separated: obi,ibi,sibi,cibi,exhaustive,safety,stable).
    #[arg(long, value_delimiter = ',')]
    property: Vec<String>,
    /// Also decide synchronous compatibility.
    #[arg(long)]
    smc: bool,
    /// Also compare each participant's behaviour at the decisive bound and
    /// one above.
    #[arg(long)]
    agnostic: bool,
    /// Write the decisive reduced graph in DOT format to this path.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
    /// Abort exploration beyond this many configurations.
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
}

#[derive(Args)]
struct TraceArgs {
    /// System file the trace runs against.
    system: PathBuf,
    /// Trace file, one action per line.
    trace: PathBuf,
    /// Replay the trace at this channel capacity.
    #[arg(long)]
    k: Option<u32>,
    /// Compare against a second trace instead of reporting predicates.
    #[arg(long)]
    equiv: Option<PathBuf>,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Messages per burst, as a value or inclusive range like 2..10.
    #[arg(long, default_value = "2")]
    k: String,
    /// Automaton pairs, as a value or range.
    #[arg(long, default_value = "1")]
    m: String,
    /// Labels per step, as a value or range.
    #[arg(long, default_value = "1")]
    n: String,
    /// Largest capacity to try per row (defaults to the largest burst).
    #[arg(long)]
    max: Option<u32>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
}

const EXIT_OK: u8 = 0;
const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Trace(args) => cmd_trace(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Corpus { name } => cmd_corpus(name),
    };
    ExitCode::from(code)
}

fn load_system(path: &PathBuf) -> Result<System, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {}", path.display(), e);
        EXIT_USAGE
    })?;
    parse_system(&text).map_err(|e| {
        eprintln!("error: {}", e);
        EXIT_USAGE
    })
}

fn cmd_check(args: CheckArgs) -> u8 {
    let system = match load_system(&args.file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let name = args
        .file
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "system".to_string());
    let options = KmcOptions {
        max_bound: args.max,
        node_cap: args.node_cap,
        eager: false,
    };
    let mut kmc = match csa::checks::check_kmc(&system, options) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", e);
            return EXIT_RESOURCE;
        }
    };
    let decisive = match kmc.status {
        KmcStatus::Compatible(k) | KmcStatus::Failed(k) => k,
    };
    if !args.property.is_empty() {
        let ts = if args.full_ts {
            build_full_ts(&system, decisive, args.node_cap)
        } else {
            build_rts(&system, decisive, args.node_cap)
        };
        let ts = match ts {
            Ok(ts) => ts,
            Err(e) => {
                eprintln!("error: {}", e);
                return EXIT_RESOURCE;
            }
        };
        for prop in &args.property {
            let extra: Vec<PropertyVerdict> = match prop.as_str() {
                "obi" => vec![check_obi(&system, &ts)],
                "ibi" => vec![check_ibi(&system, &ts)],
                "sibi" => vec![check_sibi(&system, &ts)],
                "cibi" => vec![check_cibi(&system, &ts)],
                "exhaustive" => vec![check_exhaustive(&system, &ts)],
                "safety" => {
                    let (er, pg) = check_safety(&system, &ts);
                    vec![er, pg]
                }
                "stable" => vec![check_stable_bounded(&system, &ts)],
                other => {
                    eprintln!("error: unknown property `{}`", other);
                    return EXIT_USAGE;
                }
            };
            kmc.per_property.extend(extra);
        }
    }
    let smc = if args.smc {
        match check_smc(&system, args.node_cap) {
            Ok(v) => Some(v),
            Err(e) => {
                eprintln!("error: {}", e);
                return EXIT_RESOURCE;
            }
        }
    } else {
        None
    };
    let agnostic = if args.agnostic {
        match check_bound_agnostic(&system, decisive, args.node_cap) {
            Ok(v) => Some(v),
            Err(e) => {
                eprintln!("error: {}", e);
                return EXIT_RESOURCE;
            }
        }
    } else {
        None
    };
    if let Some(dot_path) = &args.dot {
        let rts = match build_rts(&system, decisive, args.node_cap) {
            Ok(ts) => ts,
            Err(e) => {
                eprintln!("error: {}", e);
                return EXIT_RESOURCE;
            }
        };
        if let Err(e) = std::fs::write(dot_path, to_dot(&system, &rts)) {
            eprintln!("error: cannot write {}: {}", dot_path.display(), e);
            return EXIT_USAGE;
        }
    }
    let document = report::build_report(
        &system,
        &name,
        args.max,
        &kmc,
        smc.as_ref(),
        agnostic.as_ref(),
    );
    if args.json {
        println!("{}", report::render_json(&document));
    } else {
        print_human_report(&document, &kmc);
    }
    match kmc.status {
        KmcStatus::Compatible(_) => EXIT_OK,
        KmcStatus::Failed(_) => EXIT_FAILED,
    }
}

fn print_human_report(document: &report::ReportDocument, kmc: &csa::checks::KmcResult) {
    println!(
        "system {} ({} participants)",
        document.system,
        document.participants.len()
    );
    println!(
        "directed: send={} receive={}",
        document.send_directed, document.receive_directed
    );
    match document.kmc.compatible {
        Some(k) => println!("compatible at capacity {}", k),
        None => println!("not certified within capacity {}", document.kmc.max_bound),
    }
    if let Some(note) = &document.safety_note {
        println!("{}", note);
    }
    println!(
        "reduced graph at capacity {}: {} configurations, {} transitions",
        document.graph.bound, document.graph.nodes, document.graph.edges
    );
    for verdict in &kmc.per_property {
        println!(
            "  [k={}] {:<18} {}",
            match verdict.bound {
                Bound::Finite(k) => k.to_string(),
                Bound::Infinite => "inf".to_string(),
            },
            verdict.property.name(),
            if verdict.holds { "yes" } else { "no" }
        );
        if let Some(witness) = &verdict.witness {
            println!("      counterexample: {}", witness.detail);
            let rendered: Vec<String> = witness.path.iter().map(|a| a.to_string()).collect();
            println!("      after: {}", rendered.join(" "));
        }
    }
    if let Some(smc) = &document.smc {
        println!(
            "synchronous compatibility: {}",
            if smc.holds { "yes" } else { "no" }
        );
    }
    if let Some(agnostic) = &document.bound_agnostic {
        println!(
            "bound-agnostic at {}: {}",
            agnostic.bound,
            if agnostic.holds { "yes" } else { "no" }
        );
    }
}

fn cmd_trace(args: TraceArgs) -> u8 {
    let system = match load_system(&args.system) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let read_trace = |path: &PathBuf| -> Result<Vec<csa::model::Action>, u8> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            eprintln!("error: cannot read {}: {}", path.display(), e);
            EXIT_USAGE
        })?;
        parse_trace(&text).map_err(|e| {
            eprintln!("error: {}", e);
            EXIT_USAGE
        })
    };
    let phi = match read_trace(&args.trace) {
        Ok(t) => t,
        Err(code) => return code,
    };
    if let Some(other) = &args.equiv {
        let psi = match read_trace(other) {
            Ok(t) => t,
            Err(code) => return code,
        };
        println!("causal_equiv: {}", traces::causal_equiv(&phi, &psi));
        println!("projected_equiv: {}", traces::projected_equiv(&phi, &psi));
        return EXIT_OK;
    }
    let report_data = traces::trace_report(&phi, Some(&system), traces::DEFAULT_BOUND_SEARCH_CAP);
    let replay_at_k = args.k.map(|k| match traces::replay(&system, &phi, Bound::Finite(k)) {
        Ok(config) => format!("reaches {}", system.describe_configuration(&config)),
        Err(e) => e.to_string(),
    });
    let document = report::build_trace_document(&report_data, replay_at_k.clone());
    if args.json {
        println!("{}", serde_json::to_string_pretty(&document).unwrap());
    } else {
        println!("valid: {}", report_data.valid);
        match report_data.min_bounded_k {
            Some(k) => println!("replays from the initial configuration at capacity {}", k),
            None => {
                if let Some(e) = &report_data.replay_error {
                    println!("does not replay: {}", e);
                }
            }
        }
        if let Some(outcome) = replay_at_k {
            println!("replay at k={}: {}", args.k.unwrap(), outcome);
        }
        match report_data.min_match_bounded_k {
            Some(k) => println!("match-bounded from {}", k),
            None => println!("match-bounded: n/a"),
        }
        match report_data.exchange_k {
            Some(k) => {
                println!("exchange decomposition at {}", k);
                if let Some(d) = &report_data.decomposition {
                    let bounds: Vec<String> = d.iter().map(|b| b.to_string()).collect();
                    println!("phase ends: {}", bounds.join(" "));
                }
            }
            None => println!(
                "no exchange decomposition up to {}",
                traces::DEFAULT_BOUND_SEARCH_CAP
            ),
        }
    }
    EXIT_OK
}

/// Parse `lo..hi` (inclusive) or a single value.
fn parse_range(text: &str) -> Option<Vec<u32>> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u32 = lo.trim().parse().ok()?;
        let hi: u32 = hi.trim().parse().ok()?;
        if lo == 0 || hi < lo {
            return None;
        }
        Some((lo..=hi).collect())
    } else {
        let v: u32 = text.trim().parse().ok()?;
        if v == 0 {
            return None;
        }
        Some(vec![v])
    }
}

fn cmd_bench(args: BenchArgs) -> u8 {
    let (ks, ms, ns) = match (
        parse_range(&args.k),
        parse_range(&args.m),
        parse_range(&args.n),
    ) {
        (Some(ks), Some(ms), Some(ns)) => (ks, ms, ns),
        _ => {
            eprintln!("error: ranges must be positive values or lo..hi with lo <= hi");
            return EXIT_USAGE;
        }
    };
    let mut specs = Vec::new();
    for &k in &ks {
        for &m in &ms {
            for &n in &ns {
                specs.push(BenchSpec::new(k, m, n));
            }
        }
    }
    let max = args.max.unwrap_or_else(|| ks.iter().copied().max().unwrap());
    let rows = run_suite(&specs, max, args.node_cap);
    let csv = to_csv(&rows);
    if let Some(path) = &args.out {
        if let Err(e) = std::fs::write(path, &csv) {
            eprintln!("error: cannot write {}: {}", path.display(), e);
            return EXIT_USAGE;
        }
    } else {
        print!("{}", csv);
    }
    if rows.iter().all(|r| r.error.is_some()) {
        EXIT_RESOURCE
    } else {
        EXIT_OK
    }
}

fn cmd_corpus(name: Option<String>) -> u8 {
    match name {
        None => {
            for entry in csa::corpus::names() {
                println!("{}", entry);
            }
            EXIT_OK
        }
        Some(name) => match csa::corpus::source(&name) {
            Some(text) => {
                print!("{}", text);
                EXIT_OK
            }
            None => {
                eprintln!("error: no bundled system named `{}`", name);
                EXIT_USAGE
            }
        },
    }
}
