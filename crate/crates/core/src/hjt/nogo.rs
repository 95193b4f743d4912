//! Decomposability of Hamiltonian n-vectors on the phase space without the
//! energy coordinate, for `𝓗̃ = ½ g_{μν} η^{AB} p^μ_A p^ν_B + V(x, v)`.
//!
//! Matching the coefficients of `p^ρ_B` in the 2-vertical equations gives,
//! for every `μ, ρ, B`,
//!
//! ```text
//! g_{μρ} η^{AB} ∂_A V + g_{νρ} η^{AB} (Z̃_μ)^ν_A = 0,
//! ```
//!
//! and the 1-vertical equations require `Σ_μ (Z̃_μ)^μ_A = -∂_A V`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::Metric;
use crate::linalg::least_squares;
use crate::phase_space::{PhasePoint, PhaseSpaceShape, ScalarField};

/// Least-squares residual below which the system counts as solvable.
pub const CONSISTENT_TOLERANCE: f64 = 1e-10;
/// Least-squares residual at or above which the system counts as contradictory.
pub const INCONSISTENT_THRESHOLD: f64 = 1e-3;
/// `|∂_A V|` below which the potential is treated as critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub n: usize,
    #[serde(rename = "N")]
    pub fibre: usize,
    pub verdict: Verdict,
    pub residual: f64,
    /// `max_A |∂_A V|` at the point.
    pub potential_gradient: f64,
    /// `n = 1` or `∂_A V = 0`.
    pub predicted_consistent: bool,
    pub agrees: bool,
}

/// Assembles and solves the linear system for `(Z̃_μ)^ν_A`.
pub fn no_go_probe(potential: &ScalarField, g: &Metric, eta: &Metric, at: &PhasePoint) -> Result<ConsistencyReport> {
    let shape = *potential.shape();
    if shape.extended {
        return Err(Error::WrongPhaseSpace { required: "reduced" });
    }
    let (n, nf) = (shape.n, shape.fibre);
    for (expected, found) in [(n, g.dim()), (nf, eta.dim())] {
        if expected != found {
            return Err(Error::DimensionMismatch { expected, found });
        }
    }
    let grad = potential.gradient(at)?;
    let dv: Vec<f64> = (0..nf).map(|a| grad[shape.v_index(a)]).collect();

    let unknown = |mu: usize, nu: usize, a: usize| (mu * n + nu) * nf + a;
    let rows = n * n * nf + nf;
    let mut m = DMatrix::zeros(rows, n * n * nf);
    let mut rhs = DVector::zeros(rows);
    let mut row = 0;
    for mu in 0..n {
        for rho in 0..n {
            for b in 0..nf {
                // metrics are diagonal: only ν = ρ and A = B survive
                let w = g.entry(rho) * eta.inverse_entry(b);
                m[(row, unknown(mu, rho, b))] = w;
                if mu == rho {
                    rhs[row] = -w * dv[b];
                }
                row += 1;
            }
        }
    }
    for a in 0..nf {
        for mu in 0..n {
            m[(row, unknown(mu, mu, a))] = 1.0;
        }
        rhs[row] = -dv[a];
        row += 1;
    }

    let (_, residual) = least_squares(&m, &rhs);
    let verdict = if residual < CONSISTENT_TOLERANCE {
        Verdict::Consistent
    } else if residual >= INCONSISTENT_THRESHOLD {
        Verdict::Inconsistent
    } else {
        Verdict::Indeterminate
    };
    let potential_gradient = dv.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let predicted_consistent = n == 1 || potential_gradient <= CRITICAL_TOLERANCE;
    let agrees = matches!(
        (verdict, predicted_consistent),
        (Verdict::Consistent, true) | (Verdict::Inconsistent, false)
    );
    Ok(ConsistencyReport {
        n,
        fibre: nf,
        verdict,
        residual,
        potential_gradient,
        predicted_consistent,
        agrees,
    })
}

/// `V(x, v) = ½ vᵀQv + cᵀv + wᵀx` with symmetric positive definite `Q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticPotential {
    pub q: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub w: Vec<f64>,
}

impl QuadraticPotential {
    /// `Q = AᵀA + I` and `c`, `w` with entries uniform in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(n: usize, fibre: usize, rng: &mut R) -> Self {
        let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect() };
        let a = DMatrix::from_vec(fibre, fibre, draw(fibre * fibre));
        let q = a.transpose() * &a + DMatrix::identity(fibre, fibre);
        Self {
            q: (0..fibre).map(|i| (0..fibre).map(|j| q[(i, j)]).collect()).collect(),
            c: draw(fibre),
            w: draw(n),
        }
    }

    pub fn fibre(&self) -> usize {
        self.c.len()
    }

    fn grad_v(&self, v: &[f64]) -> Vec<f64> {
        self.q
            .iter()
            .zip(&self.c)
            .map(|(row, c)| row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() + c)
            .collect()
    }

    /// The field values where `∂_A V = 0`.
    pub fn critical_point(&self) -> Result<Vec<f64>> {
        let nf = self.fibre();
        let q = DMatrix::from_fn(nf, nf, |i, j| self.q[i][j]);
        let c = DVector::from_column_slice(&self.c);
        q.lu()
            .solve(&(-c))
            .map(|v| v.iter().copied().collect())
            .ok_or_else(|| Error::InvalidInput("singular quadratic form".into()))
    }

    pub fn to_field(&self, shape: PhaseSpaceShape) -> Result<ScalarField> {
        if shape.extended || shape.fibre != self.fibre() || shape.n != self.w.len() {
            return Err(Error::InvalidShape("potential does not match the phase space".into()));
        }
        let (a, b) = (self.clone(), self.clone());
        Ok(ScalarField::new(shape, move |pt| {
            let v = pt.v();
            let qv = a.grad_v(v);
            let quad: f64 = v.iter().zip(&qv).zip(&a.c).map(|((vi, g), c)| 0.5 * vi * (g + c)).sum();
            quad + a.w.iter().zip(pt.x()).map(|(w, x)| w * x).sum::<f64>()
        })
        .with_partials(move |pt| {
            let mut grad = b.w.clone();
            grad.extend(b.grad_v(pt.v()));
            grad.extend(std::iter::repeat_n(0.0, shape.n * shape.fibre));
            grad
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(n: usize) -> ScalarField {
        let s = PhaseSpaceShape::reduced(n, 1).unwrap();
        ScalarField::new(s, |p| 0.5 * p.v()[0] * p.v()[0]).with_partials(move |p| {
            let mut g = vec![0.0; n];
            g.push(p.v()[0]);
            g.extend(vec![0.0; n]);
            g
        })
    }

    fn at(n: usize, v: f64) -> PhasePoint {
        PhasePoint::new(PhaseSpaceShape::reduced(n, 1).unwrap(), vec![0.0; n], vec![v], vec![0.0; n], None).unwrap()
    }

    #[test]
    fn mechanics_is_consistent() {
        let r = no_go_probe(&harmonic(1), &Metric::minkowski(1), &Metric::euclidean(1), &at(1, 1.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!(r.agrees);
    }

    #[test]
    fn field_theory_contradiction() {
        let r = no_go_probe(&harmonic(2), &Metric::minkowski(2), &Metric::euclidean(1), &at(2, 1.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Inconsistent);
        // rows z00 = -1, z11 = -1, z00 + z11 = -1: residual 1/sqrt(3)
        assert!((r.residual - 3f64.sqrt().recip()).abs() < 1e-12);
    }

    #[test]
    fn critical_point_is_consistent() {
        let r = no_go_probe(&harmonic(3), &Metric::minkowski(3), &Metric::euclidean(1), &at(3, 0.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!(r.predicted_consistent && r.agrees);
    }

    #[test]
    fn metric_dimension_checked() {
        assert!(matches!(
            no_go_probe(&harmonic(2), &Metric::minkowski(3), &Metric::euclidean(1), &at(2, 1.0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_potential_critical_point() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let v = QuadraticPotential::random(2, 2, &mut rng);
        let crit = v.critical_point().unwrap();
        let shape = PhaseSpaceShape::reduced(2, 2).unwrap();
        let field = v.to_field(shape).unwrap();
        let pt = PhasePoint::new(shape, vec![0.5, 0.1], crit, vec![0.0; 4], None).unwrap();
        let g = field.gradient(&pt).unwrap();
        assert!(g[2].abs() < 1e-14 && g[3].abs() < 1e-14);
        let fd = field.fd_gradient(&pt, 1e-6).unwrap();
        assert!((fd[0] - g[0]).abs() < 1e-8);
    }
}
