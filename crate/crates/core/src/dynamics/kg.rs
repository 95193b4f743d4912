//! The Klein–Gordon field as a De Donder–Weyl system.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::Metric;
use crate::phase_space::{PhasePoint, PhaseSpaceShape, ScalarField};

/// `L = ½ g^{μν} v_μ v_ν - ½ m² v²` on an `n`-dimensional space-time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KGParams {
    pub n: usize,
    pub mass: f64,
    pub metric: Metric,
}

impl KGParams {
    /// Minkowski metric with signature `(+, -, …, -)`.
    pub fn new(n: usize, mass: f64) -> Result<Self> {
        Self::with_metric(mass, Metric::minkowski(n))
    }

    pub fn with_metric(mass: f64, metric: Metric) -> Result<Self> {
        let n = metric.dim();
        if n == 0 {
            return Err(Error::InvalidShape("space-time dimension must be positive".into()));
        }
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::InvalidInput(format!("mass must be finite and non-negative, got {mass}")));
        }
        Ok(Self { n, mass, metric })
    }

    /// The phase space `P̃` of a single real field.
    pub fn shape(&self) -> PhaseSpaceShape {
        PhaseSpaceShape::reduced(self.n, 1).expect("n >= 1")
    }

    /// `g_{μμ} p^μ`, i.e. `∂𝓗/∂p^μ`.
    pub fn lower(&self, p: &[f64]) -> Vec<f64> {
        p.iter().enumerate().map(|(mu, v)| self.metric.entry(mu) * v).collect()
    }

    /// `g^{μμ} v_μ`.
    pub fn raise(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(mu, x)| self.metric.inverse_entry(mu) * x)
            .collect()
    }

    /// `𝓗 = ½ g_{μν} p^μ p^ν + ½ m² v²`.
    pub fn hamiltonian(&self, v: f64, p: &[f64]) -> f64 {
        0.5 * self.metric.inner(p, p) + 0.5 * self.mass * self.mass * v * v
    }

    pub fn lagrangian(&self, v: f64, v_mu: &[f64]) -> f64 {
        let raised = self.raise(v_mu);
        0.5 * raised.iter().zip(v_mu).map(|(a, b)| a * b).sum::<f64>()
            - 0.5 * self.mass * self.mass * v * v
    }
}

/// The DW Hamiltonian of the Klein–Gordon field on `P̃`, with closed-form
/// partials.
pub fn kg_dw_hamiltonian(params: &KGParams) -> ScalarField {
    let shape = params.shape();
    let (value, grad) = (params.clone(), params.clone());
    ScalarField::new(shape, move |pt| value.hamiltonian(pt.v()[0], pt.momenta()))
        .with_partials(move |pt| {
            let mut g = vec![0.0; grad.n];
            g.push(grad.mass * grad.mass * pt.v()[0]);
            g.extend(grad.lower(pt.momenta()));
            g
        })
}

/// A point `(x^μ, v^A, v^A_μ)` of the first jet bundle, `v_mu` stored
/// `[μ][A]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JetPoint {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub v_mu: Vec<f64>,
}

impl JetPoint {
    pub fn new(x: Vec<f64>, v: Vec<f64>, v_mu: Vec<f64>) -> Result<Self> {
        if v_mu.len() != x.len() * v.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len() * v.len(),
                found: v_mu.len(),
            });
        }
        Ok(Self { x, v, v_mu })
    }
}

/// Covariant Legendre map into `P`:
/// `(x, v, ∂L/∂v_μ, -(v_μ ∂L/∂v_μ - L))`.
pub fn legendre(params: &KGParams, jet: &JetPoint) -> Result<PhasePoint> {
    if jet.x.len() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            found: jet.x.len(),
        });
    }
    if jet.v.len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: jet.v.len(),
        });
    }
    let p = params.raise(&jet.v_mu);
    let contraction: f64 = jet.v_mu.iter().zip(&p).map(|(a, b)| a * b).sum();
    let e = -(contraction - params.lagrangian(jet.v[0], &jet.v_mu));
    PhasePoint::new(params.shape().with_extended(true), jet.x.clone(), jet.v.clone(), p, Some(e))
}
