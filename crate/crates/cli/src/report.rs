//! Run reports and output files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// The measured quantity: a residual, or an observed order for order checks.
    pub residual: f64,
    pub pass: bool,
}

impl CheckResult {
    /// Passes when `residual < tol`.
    pub fn below(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            pass: residual < tol,
        }
    }

    /// Passes when `value >= min`.
    pub fn at_least(name: impl Into<String>, value: f64, min: f64) -> Self {
        Self {
            name: name.into(),
            residual: value,
            pass: value >= min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub config: ExperimentConfig,
    pub results: Vec<CheckResult>,
    pub summary: Summary,
    pub details: Value,
}

impl RunReport {
    pub fn new(config: ExperimentConfig, results: Vec<CheckResult>, details: Value) -> Self {
        let summary = Summary {
            total: results.len(),
            passed: results.iter().filter(|r| r.pass).count(),
        };
        Self {
            schema: SCHEMA,
            config,
            results,
            summary,
            details,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.passed == self.summary.total
    }
}

/// A CSV artifact produced by a run, written next to the report.
pub struct Artifact {
    pub suffix: String,
    pub bytes: Vec<u8>,
}

#[derive(Serialize)]
struct Timing {
    schema: u32,
    wall_clock_seconds: f64,
}

pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `<prefix>.json`, the artifacts and `<prefix>.timing.json`.
///
/// Wall-clock time lives in its own file so the report stays byte-stable.
pub fn write_outputs(prefix: &Path, report: &RunReport, artifacts: &[Artifact], seconds: f64) -> Result<PathBuf, CliError> {
    if let Some(parent) = prefix.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Internal(format!("{}: {e}", parent.display())))?;
    }
    let report_path = with_suffix(prefix, ".json");
    write_json(&report_path, report)?;
    for a in artifacts {
        let path = with_suffix(prefix, &a.suffix);
        fs::write(&path, &a.bytes).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
    }
    let timing = Timing {
        schema: SCHEMA,
        wall_clock_seconds: seconds,
    };
    write_json(&with_suffix(prefix, ".timing.json"), &timing)?;
    Ok(report_path)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Internal(format!("{}: {e}", path.display()));
    let mut out = BufWriter::new(fs::File::create(path).map_err(fail)?);
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| fail(e.into()))?;
    out.write_all(b"\n").map_err(fail)?;
    out.flush().map_err(fail)
}
