//! `polysymp <kind> --config <file.json> [--out <prefix>] [--seed <int>]`
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 for
//! configuration errors and 3 for internal errors.

mod config;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use config::{ExperimentConfig, Kind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

/// Verification suites for De Donder–Weyl Hamiltonian field theory.
#[derive(Debug, Parser)]
#[command(name = "polysymp", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    kind: Kind,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output path prefix; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized sweeps; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("POLYSYMP_THREADS") {
        let threads: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::Config(format!("POLYSYMP_THREADS must be a positive integer, got {value:?}")))?;
        builder = builder.num_threads(threads);
    }
    builder.build().map_err(|e| CliError::Internal(e.to_string()))
}

fn execute(args: Args) -> Result<bool, CliError> {
    let start = Instant::now();
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let config = config.resolve(args.kind)?;
    let prefix = args
        .out
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(args.kind.name()));

    let outcome = thread_pool()?.install(|| run::run(config))?;
    let report = &outcome.report;
    let path = report::write_outputs(&prefix, report, &outcome.artifacts, start.elapsed().as_secs_f64())?;
    for r in report.results.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {}: {:e}", r.name, r.residual);
    }
    println!(
        "{}: {}/{} checks passed; report written to {}",
        args.kind.name(),
        report.summary.passed,
        report.summary.total,
        path.display()
    );
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("polysymp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
