//! Decomposable Hamiltonian n-vector fields `X = Z_1 ∧ … ∧ Z_n` with
//! `X ⌟ Ω = dH` for `H = -𝓗 - p`.
//!
//! With the horizontal normalisation `(Z_μ)^ν = -δ_μ^ν` the components are
//!
//! ```text
//! (Z_μ)^A   = ∂^A_μ H
//! (Z_μ)^ν_A = -(1/n) δ_μ^ν ∂_A H + (Z'_μ)^ν_A,     (Z'_μ)^μ_A = 0 (no sum)
//! (Z_μ)_0   = -∂_μ H - [(Z_μ)^A (Z_ν)^ν_A - (Z_ν)^A (Z_μ)^ν_A]
//! ```
//!
//! The off-diagonal gauge `Z'` is free; `X ⌟ Ω` only sees its trace.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{contract, GradedBasis, Multivector};
use crate::linalg::{null_space, PIVOT_TOLERANCE};
use crate::phase_space::{
    build_basis, build_omega_on, d_scalar_on, xi_pairing, Block, PhasePoint, PhaseSpaceShape,
    ScalarField,
};

/// Tolerance on `∂H/∂p = -1`.
pub const HYPOTHESIS_TOLERANCE: f64 = 1e-9;

/// One free gauge component `(Z'_μ)^ν_A`, `μ ≠ ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GaugeParameter {
    pub mu: usize,
    pub nu: usize,
    pub field: usize,
}

/// The momentum-direction freedom `(Z'_μ)^ν_A`, stored `[μ][ν][A]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeTensor {
    n: usize,
    fibre: usize,
    data: Vec<f64>,
}

impl GaugeTensor {
    pub fn zero(shape: &PhaseSpaceShape) -> Self {
        Self {
            n: shape.n,
            fibre: shape.fibre,
            data: vec![0.0; shape.n * shape.n * shape.fibre],
        }
    }

    /// Fills the free components in [`enumerate_gauge_freedom`] order.
    pub fn from_parameters(shape: &PhaseSpaceShape, values: &[f64]) -> Result<Self> {
        let params = free_parameters(shape);
        if params.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: params.len(),
                found: values.len(),
            });
        }
        let mut g = Self::zero(shape);
        for (p, v) in params.iter().zip(values) {
            g.set(p.mu, p.nu, p.field, *v);
        }
        Ok(g)
    }

    fn offset(&self, mu: usize, nu: usize, a: usize) -> usize {
        (mu * self.n + nu) * self.fibre + a
    }

    pub fn get(&self, mu: usize, nu: usize, a: usize) -> f64 {
        self.data[self.offset(mu, nu, a)]
    }

    pub fn set(&mut self, mu: usize, nu: usize, a: usize, value: f64) {
        let i = self.offset(mu, nu, a);
        self.data[i] = value;
    }

    /// Enforces `(Z'_μ)^μ_A = 0` for every `μ`, `A`.
    pub fn check_admissible(&self) -> Result<()> {
        for mu in 0..self.n {
            for a in 0..self.fibre {
                let value = self.get(mu, mu, a);
                if value != 0.0 {
                    return Err(Error::GaugeTrace { mu, field: a, value });
                }
            }
        }
        Ok(())
    }

    fn fits(&self, shape: &PhaseSpaceShape) -> bool {
        self.n == shape.n && self.fibre == shape.fibre
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub factors: Vec<Multivector>,
    pub gauge: GaugeTensor,
    pub point: PhasePoint,
}

impl Decomposition {
    /// `Z_1 ∧ … ∧ Z_n`.
    pub fn wedge(&self) -> Result<Multivector> {
        let basis = self.factors[0].basis();
        Multivector::wedge_all(basis, &self.factors)
    }

    /// Dense components of `Z_μ`.
    pub fn components(&self, mu: usize) -> Vec<f64> {
        self.factors[mu].components()
    }
}

/// Builds the decomposition for `H` at `at`; `gauge = None` is the zero gauge.
pub fn construct_decomposition(
    h: &ScalarField,
    at: &PhasePoint,
    gauge: Option<&GaugeTensor>,
) -> Result<Decomposition> {
    construct_decomposition_on(&build_basis(h.shape()), h, at, gauge)
}

pub fn construct_decomposition_on(
    basis: &Arc<GradedBasis>,
    h: &ScalarField,
    at: &PhasePoint,
    gauge: Option<&GaugeTensor>,
) -> Result<Decomposition> {
    let shape = *h.shape();
    let xi = xi_pairing(h, at)?;
    if (xi + 1.0).abs() > HYPOTHESIS_TOLERANCE {
        return Err(Error::Hypothesis { found: xi });
    }
    let gauge = match gauge {
        Some(g) if !g.fits(&shape) => {
            return Err(Error::InvalidInput("gauge tensor shape mismatch".into()))
        }
        Some(g) => g.clone(),
        None => GaugeTensor::zero(&shape),
    };
    gauge.check_admissible()?;

    let grad = h.gradient(at)?;
    let (n, nf) = (shape.n, shape.fibre);
    let e = shape.e_index().expect("xi_pairing checked extended");
    let mut z = vec![vec![0.0; shape.dim()]; n];
    for (mu, zm) in z.iter_mut().enumerate() {
        zm[shape.x_index(mu)] = -1.0;
        for a in 0..nf {
            zm[shape.v_index(a)] = grad[shape.p_index(mu, a)];
            for nu in 0..n {
                let diag = if mu == nu { grad[shape.v_index(a)] / n as f64 } else { 0.0 };
                zm[shape.p_index(nu, a)] = -diag + gauge.get(mu, nu, a);
            }
        }
    }
    for mu in 0..n {
        let mut bracket = 0.0;
        for nu in 0..n {
            for a in 0..nf {
                bracket += z[mu][shape.v_index(a)] * z[nu][shape.p_index(nu, a)]
                    - z[nu][shape.v_index(a)] * z[mu][shape.p_index(nu, a)];
            }
        }
        z[mu][e] = -grad[shape.x_index(mu)] - bracket;
    }

    let factors = z
        .iter()
        .map(|c| Multivector::from_components(basis, c))
        .collect::<Result<_>>()?;
    Ok(Decomposition {
        factors,
        gauge,
        point: at.clone(),
    })
}

/// Residuals grouped by the coordinate block of the free 1-form slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyResiduals {
    /// `∂_A H` equations (v-block).
    pub field: f64,
    /// `∂^A_μ H` equations (p-block).
    pub momentum: f64,
    /// `∂_μ H` equations (x-block).
    pub horizontal: f64,
    /// `∂H` equation (energy direction).
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentResidual {
    pub label: String,
    pub residual: f64,
}

/// Componentwise `X ⌟ Ω - dH`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub per_family: FamilyResiduals,
    pub components: Vec<ComponentResidual>,
}

impl ResidualReport {
    fn from_components(basis: &GradedBasis, shape: &PhaseSpaceShape, r: &[f64]) -> Self {
        let mut fam = FamilyResiduals {
            field: 0.0,
            momentum: 0.0,
            horizontal: 0.0,
            energy: 0.0,
        };
        for (i, v) in r.iter().enumerate() {
            let slot = match shape.block_of(i) {
                Block::Field(_) => &mut fam.field,
                Block::Momentum(..) => &mut fam.momentum,
                Block::Horizontal(_) => &mut fam.horizontal,
                Block::Energy => &mut fam.energy,
            };
            *slot = slot.max(v.abs());
        }
        Self {
            max_abs: r.iter().fold(0.0, |m, v| m.max(v.abs())),
            per_family: fam,
            components: r
                .iter()
                .enumerate()
                .map(|(i, v)| ComponentResidual {
                    label: basis.label(i).to_owned(),
                    residual: *v,
                })
                .collect(),
        }
    }
}

/// Checks `X ⌟ Ω = dH` at `at` for an n-vector `X` on `P`.
pub fn verify_hamvec(x: &Multivector, h: &ScalarField, at: &PhasePoint) -> Result<ResidualReport> {
    let basis = x.basis();
    let shape = *basis
        .shape()
        .ok_or_else(|| Error::InvalidInput("multivector is not on a phase-space basis".into()))?;
    if shape != *h.shape() {
        return Err(Error::BasisMismatch);
    }
    if x.grade() != shape.n {
        return Err(Error::GradeMismatch {
            expected: shape.n,
            found: x.grade(),
        });
    }
    let omega = build_omega_on(basis)?;
    let lhs = contract(x, &omega)?;
    let dh = d_scalar_on(basis, h, at)?;
    let r = lhs.sub(&dh)?.components();
    Ok(ResidualReport::from_components(basis, &shape, &r))
}

fn free_parameters(shape: &PhaseSpaceShape) -> Vec<GaugeParameter> {
    let mut out = Vec::with_capacity(shape.n * (shape.n - 1) * shape.fibre);
    for mu in 0..shape.n {
        for nu in (0..shape.n).filter(|&nu| nu != mu) {
            for field in 0..shape.fibre {
                out.push(GaugeParameter { mu, nu, field });
            }
        }
    }
    out
}

/// The free components of the decomposition: all `(Z'_μ)^ν_A` with `μ ≠ ν`,
/// `n²N - nN` of them.
pub fn enumerate_gauge_freedom(shape: &PhaseSpaceShape) -> Result<Vec<GaugeParameter>> {
    if !shape.extended {
        return Err(Error::WrongPhaseSpace { required: "extended" });
    }
    Ok(free_parameters(shape))
}

/// Basis of the grade-`grade` multivectors `W` with `W ⌟ Ω = 0`.
pub fn omega_kernel(shape: &PhaseSpaceShape, grade: usize) -> Result<Vec<Multivector>> {
    let basis = build_basis(shape);
    let omega = build_omega_on(&basis)?;
    let monomials = crate::exterior::combinations(shape.dim(), grade);
    let out_dim = crate::exterior::combinations(shape.dim(), omega.grade().saturating_sub(grade)).len();
    let mut rows = vec![vec![0.0; monomials.len()]; out_dim.max(1)];
    for (col, m) in monomials.iter().enumerate() {
        let w = Multivector::from_terms(&basis, grade, [(m.clone(), 1.0)])?;
        for (row, v) in contract(&w, &omega)?.to_dense().into_iter().enumerate() {
            rows[row][col] = v;
        }
    }
    null_space(&rows, monomials.len(), PIVOT_TOLERANCE)
        .iter()
        .map(|v| Multivector::from_dense(&basis, grade, v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::energy_function;

    fn oscillator() -> ScalarField {
        let s = PhaseSpaceShape::reduced(1, 1).unwrap();
        let hh = ScalarField::new(s, |p| 0.5 * p.p(0, 0).powi(2) + 0.5 * p.v()[0].powi(2))
            .with_partials(|p| vec![0.0, p.v()[0], p.p(0, 0)]);
        energy_function(&hh).unwrap()
    }

    #[test]
    fn oscillator_components() {
        let h = oscillator();
        let at = PhasePoint::from_coords(*h.shape(), &[0.0, 1.0, 2.0, 0.0]).unwrap();
        let d = construct_decomposition(&h, &at, None).unwrap();
        assert_eq!(d.components(0), vec![-1.0, -2.0, 1.0, 0.0]);
    }

    #[test]
    fn free_hamiltonian_is_pure_horizontal() {
        let s = PhaseSpaceShape::reduced(3, 2).unwrap();
        let zero = ScalarField::new(s, |_| 0.0).with_partials(move |_| vec![0.0; s.dim()]);
        let h = energy_function(&zero).unwrap();
        let at = PhasePoint::origin(*h.shape());
        let d = construct_decomposition(&h, &at, None).unwrap();
        for mu in 0..3 {
            let mut expected = vec![0.0; h.shape().dim()];
            expected[mu] = -1.0;
            assert_eq!(d.components(mu), expected);
        }
    }

    #[test]
    fn hypothesis_is_enforced() {
        let s = PhaseSpaceShape::extended(1, 1).unwrap();
        let flat = ScalarField::new(s, |p| p.v()[0]).with_partials(|_| vec![0.0, 1.0, 0.0, 0.0]);
        let at = PhasePoint::origin(s);
        assert!(matches!(
            construct_decomposition(&flat, &at, None),
            Err(Error::Hypothesis { .. })
        ));
        let doubled = ScalarField::new(s, |p| -2.0 * p.e().unwrap())
            .with_partials(|_| vec![0.0, 0.0, 0.0, -2.0]);
        assert!(construct_decomposition(&doubled, &at, None).is_err());
    }

    #[test]
    fn gauge_trace_violation() {
        let s = PhaseSpaceShape::extended(2, 1).unwrap();
        let zero = ScalarField::new(s.with_extended(false), |_| 0.0);
        let h = energy_function(&zero).unwrap();
        let mut g = GaugeTensor::zero(&s);
        g.set(1, 1, 0, 0.5);
        assert!(matches!(
            construct_decomposition(&h, &PhasePoint::origin(s), Some(&g)),
            Err(Error::GaugeTrace { mu: 1, field: 0, .. })
        ));
    }

    #[test]
    fn gauge_freedom_counts() {
        let count = |n, nf| {
            enumerate_gauge_freedom(&PhaseSpaceShape::extended(n, nf).unwrap())
                .unwrap()
                .len()
        };
        assert_eq!(count(1, 1), 0);
        assert_eq!(count(2, 1), 2);
        assert_eq!(count(4, 1), 12);
        assert_eq!(count(3, 2), 12);
        assert!(enumerate_gauge_freedom(&PhaseSpaceShape::reduced(2, 1).unwrap()).is_err());
    }

    #[test]
    fn verify_rejects_wrong_grade() {
        let h = oscillator();
        let b = build_basis(h.shape());
        let x = Multivector::unit(&b, 0).unwrap().wedge(&Multivector::unit(&b, 1).unwrap()).unwrap();
        assert!(matches!(
            verify_hamvec(&x, &h, &PhasePoint::origin(*h.shape())),
            Err(Error::GradeMismatch { .. })
        ));
    }

    #[test]
    fn scaled_vector_field_is_not_hamiltonian() {
        let h = oscillator();
        let at = PhasePoint::from_coords(*h.shape(), &[0.0, 1.0, 2.0, 0.0]).unwrap();
        let x = construct_decomposition(&h, &at, None).unwrap().wedge().unwrap();
        assert!(verify_hamvec(&x, &h, &at).unwrap().max_abs < 1e-14);
        let r = verify_hamvec(&x.scale(2.0), &h, &at).unwrap();
        // residual equals dH itself: (0, 1, 2, -1)
        assert!((r.max_abs - 2.0).abs() < 1e-14);
        assert!((r.per_family.energy - 1.0).abs() < 1e-14);
    }
}
