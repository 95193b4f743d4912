//! Experiment configuration files.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    VerifyHamvec,
    RunKg,
    Prop2,
    CheckHj,
    NoGo,
    Decompose,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::VerifyHamvec => "verify-hamvec",
            Kind::RunKg => "run-kg",
            Kind::Prop2 => "prop2",
            Kind::CheckHj => "check-hj",
            Kind::NoGo => "no-go",
            Kind::Decompose => "decompose",
        }
    }

    /// Tolerance names understood by this kind, with their defaults.
    pub fn default_tolerances(self) -> &'static [(&'static str, f64)] {
        match self {
            Kind::VerifyHamvec => &[("residual", 1e-8)],
            Kind::RunKg => &[("order", 1.9), ("error", 1e-2)],
            Kind::Prop2 => &[("order", 1.9), ("section", 1e-10), ("involutivity_order", 1.9)],
            Kind::CheckHj => &[("hj", 1e-8), ("t_factor", 5.0), ("compatibility", 1e-8)],
            Kind::NoGo => &[("inconsistent_residual", 1e-3)],
            Kind::Decompose => &[("reconstruction", 1e-10)],
        }
    }
}

/// Number of spacetime dimensions and field components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shape {
    pub n: usize,
    #[serde(rename = "N")]
    pub fibre: usize,
}

/// Periodic 1+1 grid. `dt = courant * dx`; the run length is `steps` if
/// given, otherwise `round(t_final / dt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_length")]
    pub length: f64,
    pub nx: usize,
    #[serde(default = "default_courant")]
    pub courant: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

fn default_length() -> f64 {
    TAU
}

fn default_courant() -> f64 {
    0.5
}

impl GridConfig {
    pub fn dx(&self, nx: usize) -> f64 {
        self.length / nx as f64
    }

    pub fn steps(&self, nx: usize) -> usize {
        let dt = self.courant * self.dx(nx);
        match (self.steps, self.t_final) {
            (Some(s), _) => s * nx / self.nx,
            (None, Some(t)) => (t / dt).round() as usize,
            (None, None) => 0,
        }
    }
}

/// `Φ = A cos(k·x - ωt)` with spatial wave numbers `k_i = 2π m_i / L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    #[serde(default = "one")]
    pub amplitude: f64,
    pub modes: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub indices: Vec<usize>,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultivectorConfig {
    pub dim: usize,
    pub grade: usize,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,

    /// verify-hamvec: points per Hamiltonian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonians: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave: Option<WaveConfig>,
    /// Grid sizes for convergence studies; defaults to `[nx, 2 nx]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolutions: Option<Vec<usize>>,

    /// no-go: potentials per shape, and every how many trials the point is
    /// placed at a critical point of the potential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potentials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_every: Option<usize>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multivector: Option<MultivectorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_decomposable: Option<bool>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Fills in defaults for `kind` and checks kind-specific requirements.
    pub fn resolve(mut self, kind: Kind) -> Result<Self, CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if let Some(k) = self.kind {
            if k != kind {
                return bad(format!("config is for {} but {} was requested", k.name(), kind.name()));
            }
        }
        self.kind = Some(kind);

        let defaults = kind.default_tolerances();
        for (name, value) in &self.tolerances {
            if !defaults.iter().any(|(d, _)| d == name) {
                return bad(format!("unknown tolerance {name:?} for {}", kind.name()));
            }
            if !(value.is_finite() && *value > 0.0) {
                return bad(format!("tolerance {name:?} must be positive"));
            }
        }
        for (name, value) in defaults {
            self.tolerances.entry(name.to_string()).or_insert(*value);
        }

        match kind {
            Kind::VerifyHamvec => {
                let s = self.require_shape()?;
                if s.n == 0 || s.fibre == 0 {
                    return bad("shape needs n >= 1 and N >= 1".into());
                }
                self.points.get_or_insert(100);
                self.hamiltonians.get_or_insert(1);
                self.degree.get_or_insert(3);
                self.terms.get_or_insert(8);
            }
            Kind::RunKg | Kind::Prop2 => {
                self.require_wave(1)?;
                self.mass.get_or_insert(1.0);
                let grid = match &self.grid {
                    Some(g) => g.clone(),
                    None => return bad("a grid is required".into()),
                };
                if !(grid.length > 0.0 && grid.courant > 0.0) || grid.nx < 4 {
                    return bad("grid needs length > 0, courant > 0 and nx >= 4".into());
                }
                if grid.steps.is_none() && grid.t_final.is_none() {
                    return bad("grid needs steps or t_final".into());
                }
                let res = self.resolutions.get_or_insert_with(|| vec![grid.nx, 2 * grid.nx]);
                if res.is_empty() || res.iter().any(|&r| r < 4) || res.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("resolutions must be increasing and at least 4".into());
                }
            }
            Kind::CheckHj => {
                let n = self.shape.map(|s| s.n).unwrap_or(2);
                self.shape = Some(Shape { n, fibre: 1 });
                if n < 2 {
                    return bad("check-hj needs n >= 2".into());
                }
                self.require_wave(n - 1)?;
                self.mass.get_or_insert(1.0);
                self.points.get_or_insert(50);
                if let Some(g) = &self.grid {
                    if n != 2 {
                        return bad("grid checks are only available for n = 2".into());
                    }
                    if g.nx < 8 {
                        return bad("grid needs nx >= 8".into());
                    }
                    self.resolutions.get_or_insert_with(|| vec![g.nx]);
                }
            }
            Kind::NoGo => {
                self.potentials.get_or_insert(50);
                self.critical_every.get_or_insert(5);
                if self.critical_every == Some(0) {
                    return bad("critical_every must be positive".into());
                }
            }
            Kind::Decompose => {
                let Some(mv) = &self.multivector else {
                    return bad("a multivector is required".into());
                };
                if mv.grade > mv.dim || mv.dim == 0 {
                    return bad("grade must not exceed dim".into());
                }
                for t in &mv.terms {
                    if t.indices.len() != mv.grade || t.indices.iter().any(|&i| i >= mv.dim) {
                        return bad(format!("term {:?} does not fit grade {} in dim {}", t.indices, mv.grade, mv.dim));
                    }
                }
            }
        }
        Ok(self)
    }

    fn require_shape(&self) -> Result<Shape, CliError> {
        self.shape.ok_or_else(|| CliError::Config("a shape {\"n\", \"N\"} is required".into()))
    }

    fn require_wave(&self, spatial: usize) -> Result<(), CliError> {
        match &self.wave {
            Some(w) if w.modes.len() == spatial => Ok(()),
            Some(w) => Err(CliError::Config(format!(
                "wave has {} modes, expected {spatial}",
                w.modes.len()
            ))),
            None => Err(CliError::Config("a wave {\"modes\": [...]} is required".into())),
        }
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances[name]
    }
}
