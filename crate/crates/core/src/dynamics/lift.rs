//! Tangent lifts of sections `γ(x) = (x, φ, π, -𝓗)` and the check that
//! they span a Hamiltonian n-vector field.

use std::sync::Arc;

use serde::Serialize;

use super::grid::FieldSolution;
use super::kg::{kg_dw_hamiltonian, KGParams};
use super::model::FieldModel;
use crate::error::{Error, Result};
use crate::exterior::{involutivity_check, InvolutivityReport, Multivector, VectorField};
use crate::hamvec::{verify_hamvec, ResidualReport};
use crate::phase_space::{build_basis, energy_function, PhasePoint, ScalarField};

/// First derivatives of a section at one point: `d_phi[μ][A] = ∂_μφ^A`,
/// `d_pi[μ][ν][A] = ∂_μπ^ν_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionJet {
    pub point: PhasePoint,
    pub d_phi: Vec<f64>,
    pub d_pi: Vec<f64>,
}

impl SectionJet {
    pub fn new(point: PhasePoint, d_phi: Vec<f64>, d_pi: Vec<f64>) -> Result<Self> {
        let s = point.shape();
        if !s.extended {
            return Err(Error::WrongPhaseSpace { required: "extended" });
        }
        for (expected, found) in [(s.n * s.fibre, d_phi.len()), (s.n * s.n * s.fibre, d_pi.len())] {
            if expected != found {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        Ok(Self { point, d_phi, d_pi })
    }

    /// The Klein–Gordon section generated by an exact field model.
    pub fn from_model(params: &KGParams, model: &dyn FieldModel, x: &[f64]) -> Result<Self> {
        if model.n() != params.n || x.len() != params.n {
            return Err(Error::DimensionMismatch {
                expected: params.n,
                found: x.len(),
            });
        }
        let jet = model.jet(x);
        let pi = params.raise(&jet.gradient);
        let energy = -params.hamiltonian(jet.value, &pi);
        let point = PhasePoint::new(
            params.shape().with_extended(true),
            x.to_vec(),
            vec![jet.value],
            pi,
            Some(energy),
        )?;
        let n = params.n;
        let mut d_pi = Vec::with_capacity(n * n);
        for mu in 0..n {
            for nu in 0..n {
                d_pi.push(params.metric.inverse_entry(nu) * jet.hessian[mu][nu]);
            }
        }
        Self::new(point, jet.gradient, d_pi)
    }
}

/// `Z_μ = ∂_μ + ∂_μφ^A ∂_A + ∂_μπ^ν_A ∂^A_ν - [∂_μ𝓗 + ∂_A𝓗 ∂_μφ^A + ∂^A_σ𝓗 ∂_μπ^σ_A] ∂`
/// with `𝓗` the DW Hamiltonian on `P̃`.
pub fn lift_section(jet: &SectionJet, hh: &ScalarField) -> Result<Vec<Multivector>> {
    let shape = *jet.point.shape();
    if *hh.shape() != shape.with_extended(false) {
        return Err(Error::WrongPhaseSpace { required: "reduced" });
    }
    let grad = hh.gradient(&jet.point.project())?;
    let basis = build_basis(&shape);
    let (n, nf) = (shape.n, shape.fibre);
    let e = shape.e_index().expect("extended");
    (0..n)
        .map(|mu| {
            let mut z = vec![0.0; shape.dim()];
            z[shape.x_index(mu)] = 1.0;
            let mut chain = grad[shape.x_index(mu)];
            for a in 0..nf {
                let dphi = jet.d_phi[mu * nf + a];
                z[shape.v_index(a)] = dphi;
                chain += grad[shape.v_index(a)] * dphi;
                for nu in 0..n {
                    let dpi = jet.d_pi[(mu * n + nu) * nf + a];
                    z[shape.p_index(nu, a)] = dpi;
                    chain += grad[shape.p_index(nu, a)] * dpi;
                }
            }
            z[e] = -chain;
            Multivector::from_components(&basis, &z)
        })
        .collect()
}

/// Section jet at a lattice node from centred differences.
pub fn grid_section_jet(sol: &FieldSolution, k: usize, j: usize) -> Result<SectionJet> {
    sol.check_interior(k, j, 1)?;
    let point = sol.section_point(k, j)?;
    let d_phi = (0..2).map(|mu| sol.central(|a, b| sol.phi(a, b), k, j, mu)).collect();
    let mut d_pi = Vec::with_capacity(4);
    for mu in 0..2 {
        for nu in 0..2 {
            d_pi.push(sol.central(|a, b| sol.pi(a, b)[nu], k, j, mu));
        }
    }
    SectionJet::new(point, d_phi, d_pi)
}

/// Lift of a lattice solution at node `(k, j)`.
pub fn lift(sol: &FieldSolution, k: usize, j: usize) -> Result<Vec<Multivector>> {
    lift_section(&grid_section_jet(sol, k, j)?, &kg_dw_hamiltonian(sol.params()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop2Report {
    pub residual: ResidualReport,
    /// `|H(γ(x))|` recomputed from the stored node values.
    pub h_on_section: f64,
}

/// Checks that `(-Z_1) ∧ … ∧ (-Z_n)` is Hamiltonian for `H = -𝓗 - p`.
pub fn verify_prop2_jet(jet: &SectionJet, hh: &ScalarField) -> Result<Prop2Report> {
    let factors = lift_section(jet, hh)?;
    let basis = Arc::clone(factors[0].basis());
    let negated: Vec<Multivector> = factors.iter().map(|z| z.scale(-1.0)).collect();
    let x = Multivector::wedge_all(&basis, &negated)?;
    let h = energy_function(hh)?;
    Ok(Prop2Report {
        residual: verify_hamvec(&x, &h, &jet.point)?,
        h_on_section: h.value(&jet.point)?.abs(),
    })
}

pub fn verify_prop2(sol: &FieldSolution, k: usize, j: usize, hh: &ScalarField) -> Result<Prop2Report> {
    verify_prop2_jet(&grid_section_jet(sol, k, j)?, hh)
}

/// One lifted field `Z_μ` of a lattice solution, extended off the section
/// so that it does not depend on the fibre coordinates. Evaluation is only
/// defined over lattice nodes.
pub struct GridLiftField {
    sol: Arc<FieldSolution>,
    hh: ScalarField,
    mu: usize,
}

impl GridLiftField {
    pub fn new(sol: Arc<FieldSolution>, mu: usize) -> Result<Self> {
        if mu >= 2 {
            return Err(Error::IndexOutOfRange { index: mu, dim: 2 });
        }
        let hh = kg_dw_hamiltonian(sol.params());
        Ok(Self { sol, hh, mu })
    }

    /// All `n` lifted fields.
    pub fn family(sol: &Arc<FieldSolution>) -> Vec<Self> {
        (0..2)
            .map(|mu| Self::new(Arc::clone(sol), mu).expect("mu < 2"))
            .collect()
    }

    fn node(&self, at: &[f64]) -> Result<(usize, usize)> {
        if at.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: at.len(),
            });
        }
        let g = self.sol.grid();
        let (kf, jf) = (at[0] / g.dt, at[1] / g.dx());
        let (k, j) = (kf.round(), jf.round());
        if (kf - k).abs() > 1e-9 || (jf - j).abs() > 1e-9 || k < 0.0 || k >= g.nt() as f64 {
            return Err(Error::Evaluation(format!(
                "({}, {}) is not a lattice node",
                at[0], at[1]
            )));
        }
        let nx = g.nx as i64;
        Ok((k as usize, (j as i64).rem_euclid(nx) as usize))
    }

    fn lift_at(&self, k: usize, j: usize) -> Result<Vec<f64>> {
        let jet = grid_section_jet(&self.sol, k, j)?;
        Ok(lift_section(&jet, &self.hh)?[self.mu].components())
    }
}

impl VectorField for GridLiftField {
    fn dim(&self) -> usize {
        6
    }

    fn eval(&self, at: &[f64]) -> Result<Vec<f64>> {
        let (k, j) = self.node(at)?;
        self.lift_at(k, j)
    }

    fn jacobian(&self, at: &[f64]) -> Option<Result<Vec<Vec<f64>>>> {
        let run = || -> Result<Vec<Vec<f64>>> {
            let (k, j) = self.node(at)?;
            self.sol.check_interior(k, j, 2)?;
            let nx = self.sol.nx();
            let g = self.sol.grid();
            let columns = [
                (self.lift_at(k + 1, j)?, self.lift_at(k - 1, j)?, g.dt),
                (self.lift_at(k, (j + 1) % nx)?, self.lift_at(k, (j + nx - 1) % nx)?, g.dx()),
            ];
            let mut jac = vec![vec![0.0; 6]; 6];
            for (col, (plus, minus, h)) in columns.iter().enumerate() {
                for (row, r) in jac.iter_mut().enumerate() {
                    r[col] = (plus[row] - minus[row]) / (2.0 * h);
                }
            }
            Ok(jac)
        };
        Some(run())
    }
}

/// Involutivity of the lifted fields at an interior node.
pub fn lift_involutivity(sol: &Arc<FieldSolution>, k: usize, j: usize, tol: f64) -> Result<InvolutivityReport> {
    sol.check_interior(k, j, 2)?;
    let fields = GridLiftField::family(sol);
    let refs: Vec<&dyn VectorField> = fields.iter().map(|f| f as &dyn VectorField).collect();
    let point = sol.section_point(k, j)?;
    let basis = build_basis(point.shape());
    involutivity_check(&basis, &refs, &point.coords(), tol)
}
