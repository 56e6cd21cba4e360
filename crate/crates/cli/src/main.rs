//! `tfunnel`: command-line front end of the two-phase trust funnel solver.
//!
//! Exit codes: 0 on success, 1 when an infeasible stationary point is
//! declared, 2 on iteration/time limits and all errors.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trust_funnel::driver::bench::run_benchmark_with;
use trust_funnel::driver::{
    comparison_summary, parse_config, write_trace, AuditReport, Manifest, RunConfig, TraceFormat,
};
use trust_funnel::error::{Result, SolverError};
use trust_funnel::par::Execution;
use trust_funnel::phase1::Mode;
use trust_funnel::problems::{check_problem, corpus_lookup};

#[derive(Parser)]
#[command(name = "tfunnel", version, about = "Two-phase trust funnel solver for min f(x) s.t. c(x) = 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one corpus problem.
    Solve(SolveArgs),
    /// Run every (problem, mode) cell of a manifest.
    Bench(BenchArgs),
    /// Compare analytic derivatives with central differences.
    CheckDerivs(CheckArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the `‖Jᵀc‖ ≤ ε_feas·ε_inf` phase-1 stopping test.
    #[arg(long)]
    theory: bool,
    #[arg(long)]
    eps_feas: Option<f64>,
    #[arg(long)]
    eps_inf: Option<f64>,
    /// Phase-2 relative stationarity tolerance.
    #[arg(long)]
    eps_opt: Option<f64>,
    /// Phase-1 iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Phase-2 iteration cap.
    #[arg(long)]
    phase2_max_iter: Option<usize>,
    /// Wall-clock limit per problem in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Write the per-iteration trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the trace as JSON instead of CSV.
    #[arg(long)]
    json: bool,
    /// Audit the trace against the algorithm's invariants.
    #[arg(long)]
    audit: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Comma-separated modes.
    #[arg(long, value_delimiter = ',', value_parser = parse_mode, default_value = "full,v-only")]
    modes: Vec<Mode>,
    /// Directory for bench.csv, bench.txt, summary.txt and per-cell traces.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one trace per cell under OUT/traces.
    #[arg(long)]
    traces: bool,
    /// Audit every cell.
    #[arg(long)]
    audit: bool,
    /// Run cells one after another.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    problem: String,
    /// Perturbed points checked in addition to the start.
    #[arg(long, default_value_t = 5)]
    points: usize,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    Mode::parse(s).ok_or_else(|| format!("unknown mode `{s}` (expected full or v-only)"))
}

fn load_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => parse_config(&fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    cfg.theory |= common.theory;
    if let Some(x) = common.eps_feas {
        cfg.eps_feas = x;
    }
    if let Some(x) = common.eps_inf {
        cfg.eps_inf = x;
    }
    if let Some(x) = common.eps_opt {
        cfg.eps_opt = x;
    }
    if let Some(n) = common.max_iter {
        cfg.params.max_iter = n;
    }
    if let Some(n) = common.phase2_max_iter {
        cfg.phase2_max_iter = n;
    }
    if let Some(s) = common.time_limit {
        cfg.time_limit = Some(s);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_trace_file(path: &Path, rows: &[trust_funnel::driver::TraceRecord], format: TraceFormat) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_trace(BufWriter::new(File::create(path)?), rows, format)
}

fn solve(args: SolveArgs) -> Result<i32> {
    let mut cfg = load_config(&args.common)?;
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    let problem = corpus_lookup(&args.problem)?;
    let outcome = trust_funnel::driver::solve(&problem, &cfg)?;
    let row = &outcome.row;
    println!("problem        {} (n={}, m={}), mode {}", row.problem, row.n, row.m, row.mode.as_str());
    println!(
        "phase 1        {} after {} V + {} F iterations; f = {:.10e}, |c| = {:.3e}, |g+J'y| = {:.3e}",
        row.phase1_status, row.phase1_v, row.phase1_f, row.phase1_obj, row.phase1_c_norm, row.phase1_dual_inf
    );
    if let Some(p2) = &outcome.phase2 {
        println!(
            "phase 2        {} after {} iterations ({} accepted); eps_feas = {:.3e}",
            p2.status.as_str(),
            p2.iterations(),
            p2.accepted,
            p2.eps_feas
        );
        println!(
            "final          f = {:.10e}, |c| = {:.3e}, t = {:.10e}, kkt = {}",
            p2.f,
            p2.c_norm,
            p2.t,
            p2.kkt_error.map_or("-".to_string(), |k| format!("{k:.3e}"))
        );
        println!("x              {:?}", p2.x.as_slice());
    } else {
        println!("x              {:?}", outcome.phase1.x.as_slice());
    }
    if let Some(msg) = &row.message {
        println!("message        {msg}");
    }
    println!("wall time      {:.3} s", row.wall_time_s);
    if let Some(path) = &args.trace {
        let format = if args.json { TraceFormat::Json } else { TraceFormat::Csv };
        write_trace_file(path, &outcome.trace(), format)?;
        println!("trace          {}", path.display());
    }
    let mut code = row.exit_code;
    if args.audit {
        let report = outcome.audit(&cfg.params);
        print!("{report}");
        if !report.is_clean() {
            code = 2;
        }
    }
    Ok(code)
}

fn bench(args: BenchArgs) -> Result<i32> {
    let cfg = load_config(&args.common)?;
    let manifest = Manifest::parse(&fs::read_to_string(&args.manifest)?)?;
    if args.traces && args.out.is_none() {
        return Err(SolverError::Io("--traces requires --out".into()));
    }
    let trace_dir = args.out.as_ref().map(|d| d.join("traces"));
    if let (true, Some(dir)) = (args.traces, &trace_dir) {
        fs::create_dir_all(dir)?;
    }
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let (table, extras) = run_benchmark_with(manifest.problems(), &args.modes, &cfg, exec, |outcome| {
        let mut written = Ok(());
        if let (true, Some(dir)) = (args.traces, &trace_dir) {
            let path = dir.join(format!("{}_{}.csv", outcome.row.problem, outcome.row.mode.as_str()));
            written = write_trace_file(&path, &outcome.trace(), TraceFormat::Csv);
        }
        let report = args.audit.then(|| outcome.audit(&cfg.params));
        (written, report)
    });
    let mut audit = AuditReport::default();
    for (written, report) in extras.into_iter().flatten() {
        written?;
        if let Some(r) = report {
            audit.merge(r);
        }
    }
    let summary = comparison_summary(&table.rows);
    let text = table.to_text();
    print!("{text}");
    println!("{summary}");
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("bench.csv"), table.to_csv()?)?;
        fs::write(dir.join("bench.txt"), &text)?;
        fs::write(dir.join("summary.txt"), format!("{summary}\n"))?;
    }
    if args.audit {
        print!("{audit}");
        if !audit.is_clean() {
            return Ok(2);
        }
    }
    Ok(0)
}

fn check_derivs(args: CheckArgs) -> Result<i32> {
    let problem = corpus_lookup(&args.problem)?;
    let reports = check_problem(&problem, args.points)?;
    println!("{:>5}  {:>10}  {:>10}  {:>10}  {:>10}  result", "point", "gradient", "jacobian", "hess_f", "hess_c");
    for (i, r) in reports.iter().enumerate() {
        let hc = r.hess_c.iter().copied().fold(0.0, f64::max);
        println!(
            "{i:>5}  {:>10.2e}  {:>10.2e}  {:>10.2e}  {hc:>10.2e}  {}",
            r.gradient,
            r.jacobian,
            r.hess_f,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    let pass = reports.iter().all(|r| r.pass);
    println!("{}: {}", problem.name, if pass { "all derivatives agree" } else { "derivative mismatch" });
    Ok(if pass { 0 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::CheckDerivs(a) => check_derivs(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
