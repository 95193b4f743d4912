//! Scalar fields on space-time known through their second-order jets.

use serde::Serialize;

use super::kg::KGParams;
use crate::error::{Error, Result};

/// A real field on an `n`-dimensional space-time with value, gradient and
/// Hessian available at every point.
pub trait FieldModel: Send + Sync {
    fn n(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn hessian(&self, x: &[f64]) -> Vec<Vec<f64>>;

    fn jet(&self, x: &[f64]) -> FieldJet {
        FieldJet {
            x: x.to_vec(),
            value: self.value(x),
            gradient: self.gradient(x),
            hessian: self.hessian(x),
        }
    }
}

/// Second-order jet of a field at `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldJet {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

/// The quadratic Taylor polynomial of a jet, used as a local field model.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorModel {
    jet: FieldJet,
}

impl TaylorModel {
    pub fn new(jet: FieldJet) -> Result<Self> {
        let n = jet.x.len();
        if jet.gradient.len() != n || jet.hessian.len() != n || jet.hessian.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: jet.gradient.len(),
            });
        }
        Ok(Self { jet })
    }

    pub fn jet_at_centre(&self) -> &FieldJet {
        &self.jet
    }

    fn offset(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.jet.x).map(|(a, b)| a - b).collect()
    }
}

impl FieldModel for TaylorModel {
    fn n(&self) -> usize {
        self.jet.x.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let d = self.offset(x);
        let hd = mat_vec(&self.jet.hessian, &d);
        self.jet.value + dot(&self.jet.gradient, &d) + 0.5 * dot(&d, &hd)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let hd = mat_vec(&self.jet.hessian, &self.offset(x));
        self.jet.gradient.iter().zip(hd).map(|(g, h)| g + h).collect()
    }

    fn hessian(&self, _x: &[f64]) -> Vec<Vec<f64>> {
        self.jet.hessian.clone()
    }
}

/// `Φ = A cos(k_i x^i - ω t)` with `g^{μν}κ_μκ_ν = m²`, `κ = (-ω, k)`.
/// The first coordinate is time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneWave {
    pub amplitude: f64,
    pub omega: f64,
    pub k: Vec<f64>,
}

impl PlaneWave {
    /// Solves the dispersion relation for `ω ≥ 0`.
    pub fn new(params: &KGParams, amplitude: f64, k: Vec<f64>) -> Result<Self> {
        if k.len() + 1 != params.n {
            return Err(Error::DimensionMismatch {
                expected: params.n - 1,
                found: k.len(),
            });
        }
        let spatial: f64 = k
            .iter()
            .enumerate()
            .map(|(i, ki)| params.metric.inverse_entry(i + 1) * ki * ki)
            .sum();
        let omega2 = (params.mass * params.mass - spatial) / params.metric.inverse_entry(0);
        if omega2.is_nan() || omega2 < 0.0 {
            return Err(Error::InvalidInput("plane wave has no real frequency".into()));
        }
        Ok(Self {
            amplitude,
            omega: omega2.sqrt(),
            k,
        })
    }

    fn covector(&self) -> Vec<f64> {
        std::iter::once(-self.omega).chain(self.k.iter().copied()).collect()
    }

    fn phase(&self, x: &[f64]) -> f64 {
        dot(&self.covector(), x)
    }
}

impl FieldModel for PlaneWave {
    fn n(&self) -> usize {
        self.k.len() + 1
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.amplitude * self.phase(x).cos()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let s = -self.amplitude * self.phase(x).sin();
        self.covector().iter().map(|c| s * c).collect()
    }

    fn hessian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let c = -self.amplitude * self.phase(x).cos();
        let kappa = self.covector();
        kappa
            .iter()
            .map(|a| kappa.iter().map(|b| c * a * b).collect())
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}
