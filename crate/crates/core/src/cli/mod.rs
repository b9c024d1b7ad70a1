//! The `kvnlab` batch runner: scenario in, `report.json` and CSV series out.
//!
//! Exit codes: 0 when every non-skipped check passes, 1 on a failed check,
//! 2 on an invalid scenario or command line (nothing is written), 3 on a
//! runtime failure.

pub mod report;
pub mod scenario;
pub mod series;
pub mod suites;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::fsutil::atomic_write;
use report::{digest, CheckRecord, Report, Summary, SuiteSummary, Verdict};
use scenario::{scenario_schema, Scenario, SuiteName};
use series::{emit_series, Series};
use suites::{run_suite, RunContext, RunFailure};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "KVNLAB_THREADS";

pub const DEFAULT_OUT_DIR: &str = "kvnlab-out";

#[derive(Debug, Parser)]
#[command(name = "kvnlab", version, about = "Scenario-driven verification runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the verification suites described by a scenario file.
    Run {
        scenario: PathBuf,
        /// Override the scenario's suite.
        #[arg(long)]
        suite: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the scenario JSON schema.
    Schema,
}

/// Everything produced by a run, before anything touches the disk.
pub struct RunOutput {
    pub report: Report,
    pub series: Vec<Series>,
}

/// Execute `scenario` (its `suite` field selects what runs).
pub fn run_scenario(scenario: Scenario, seed: u64) -> Result<RunOutput, RunFailure> {
    let start = Instant::now();
    let scenario_value = serde_json::to_value(&scenario).map_err(|e| RunFailure { context: "scenario".into(), message: e.to_string() })?;
    let suite = scenario.suite;
    let ctx = RunContext::new(scenario, seed)?;
    let mut records: Vec<CheckRecord> = Vec::new();
    let mut suites = Vec::new();
    let mut series = Vec::new();
    for s in suite.expand() {
        let out = run_suite(&ctx, s)?;
        suites.push(SuiteSummary { suite: s.as_str().to_string(), counts: Summary::of(&out.records) });
        records.extend(out.records);
        series.extend(out.series);
    }
    let report = Report {
        tool: "kvnlab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        suite: suite.as_str().into(),
        seed,
        scenario_digest: digest(&scenario_value),
        summary: Summary::of(&records),
        records,
        suites,
        series: series.iter().map(Series::file_name).collect(),
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok(RunOutput { report, series })
}

/// Write the series and then `report.json` (each file atomically).
pub fn write_outputs(dir: &Path, out: &RunOutput) -> Result<(), RunFailure> {
    let fail = |e: &dyn std::fmt::Display| RunFailure { context: dir.display().to_string(), message: e.to_string() };
    std::fs::create_dir_all(dir).map_err(|e| fail(&e))?;
    for s in &out.series {
        emit_series(dir, s).map_err(|e| fail(&e))?;
    }
    atomic_write(&dir.join("report.json"), out.report.to_json().as_bytes()).map_err(|e| fail(&e))
}

fn thread_cap() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        },
    }
}

fn invalid(msgs: &[String]) -> i32 {
    for m in msgs {
        eprintln!("kvnlab: invalid scenario: {m}");
    }
    EXIT_INVALID
}

fn cmd_run(path: &Path, suite: Option<String>, out: Option<PathBuf>, seed: Option<u64>) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return invalid(&[format!("{}: {e}", path.display())]),
    };
    let mut sc = match Scenario::from_json(&text) {
        Ok(s) => s,
        Err(errs) => return invalid(&errs),
    };
    if let Some(name) = suite {
        match SuiteName::parse(&name) {
            Some(s) => sc.suite = s,
            None => return invalid(&[format!("unknown suite {name:?}")]),
        }
    }
    let seed = seed.or(sc.seed).unwrap_or(0);
    sc.seed = Some(seed);
    let dir = out.or_else(|| sc.output.dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let cap = match thread_cap() {
        Ok(c) => c,
        Err(m) => return invalid(&[m]),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cap {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("kvnlab: thread pool: {e}");
            return EXIT_RUNTIME;
        }
    };
    let result = pool.install(|| run_scenario(sc, seed)).and_then(|o| write_outputs(&dir, &o).map(|_| o));
    match result {
        Err(e) => {
            eprintln!("kvnlab: {e}");
            EXIT_RUNTIME
        }
        Ok(o) => {
            for r in &o.report.records {
                let v = match r.verdict {
                    Verdict::Pass => "PASS",
                    Verdict::Fail => "FAIL",
                    Verdict::Skipped => "SKIP",
                };
                println!("{v} {}", r.id);
            }
            let s = &o.report.summary;
            println!("{} checks: {} pass, {} fail, {} skipped -> {}", s.total, s.pass, s.fail, s.skipped, dir.join("report.json").display());
            if s.all_pass() {
                EXIT_PASS
            } else {
                EXIT_CHECK_FAILED
            }
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&scenario_schema()).expect("schema serializes"));
            EXIT_PASS
        }
        Command::Run { scenario, suite, out, seed } => cmd_run(&scenario, suite, out, seed),
    }
}
