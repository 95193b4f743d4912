//! Adapted coordinates on the extended multisymplectic phase space `P`
//! `(x^μ, v^A, p^μ_A, p)` and on `P̃ = (x^μ, v^A, p^μ_A)`.
//!
//! The bundle is trivial with a global chart and vanishing connection.
//! Polymomenta are stored μ-major: `p^μ_A` sits at offset `μ·N + A` of the
//! p-block. The energy coordinate `p` is called `e` in code.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{contract, Form, GradedBasis, Multivector};

/// Default relative finite-difference step for scalar fields.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSpaceShape {
    /// Space-time dimension `n`.
    pub n: usize,
    /// Fibre dimension `N`.
    #[serde(rename = "N")]
    pub fibre: usize,
    /// `true` for `P`, `false` for `P̃`.
    pub extended: bool,
}

impl PhaseSpaceShape {
    pub fn new(n: usize, fibre: usize, extended: bool) -> Result<Self> {
        if n == 0 || fibre == 0 {
            return Err(Error::InvalidShape(format!(
                "need n >= 1 and N >= 1, got n={n}, N={fibre}"
            )));
        }
        Ok(Self {
            n,
            fibre,
            extended,
        })
    }

    pub fn extended(n: usize, fibre: usize) -> Result<Self> {
        Self::new(n, fibre, true)
    }

    pub fn reduced(n: usize, fibre: usize) -> Result<Self> {
        Self::new(n, fibre, false)
    }

    /// The same `(n, N)` with the other choice of `extended`.
    pub fn with_extended(self, extended: bool) -> Self {
        Self { extended, ..self }
    }

    pub fn dim(&self) -> usize {
        self.n + self.fibre + self.n * self.fibre + usize::from(self.extended)
    }

    pub fn x_index(&self, mu: usize) -> usize {
        mu
    }

    pub fn v_index(&self, a: usize) -> usize {
        self.n + a
    }

    pub fn p_index(&self, mu: usize, a: usize) -> usize {
        self.n + self.fibre + mu * self.fibre + a
    }

    pub fn e_index(&self) -> Option<usize> {
        self.extended.then(|| self.dim() - 1)
    }

    pub fn block_of(&self, index: usize) -> Block {
        let v0 = self.n;
        let p0 = v0 + self.fibre;
        let e0 = p0 + self.n * self.fibre;
        match index {
            i if i < v0 => Block::Horizontal(i),
            i if i < p0 => Block::Field(i - v0),
            i if i < e0 => Block::Momentum((i - p0) / self.fibre, (i - p0) % self.fibre),
            _ => Block::Energy,
        }
    }
}

/// Coordinate block of a phase-space index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Horizontal(usize),
    Field(usize),
    Momentum(usize, usize),
    Energy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    shape: PhaseSpaceShape,
    x: Vec<f64>,
    v: Vec<f64>,
    p: Vec<f64>,
    e: Option<f64>,
}

impl PhasePoint {
    pub fn new(
        shape: PhaseSpaceShape,
        x: Vec<f64>,
        v: Vec<f64>,
        p: Vec<f64>,
        e: Option<f64>,
    ) -> Result<Self> {
        let check = |expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected, found })
            }
        };
        check(shape.n, x.len())?;
        check(shape.fibre, v.len())?;
        check(shape.n * shape.fibre, p.len())?;
        if e.is_some() != shape.extended {
            return Err(Error::InvalidInput(
                "energy coordinate must be present exactly on the extended phase space".into(),
            ));
        }
        Ok(Self { shape, x, v, p, e })
    }

    pub fn origin(shape: PhaseSpaceShape) -> Self {
        Self::from_coords(shape, &vec![0.0; shape.dim()]).expect("length matches")
    }

    pub fn from_coords(shape: PhaseSpaceShape, coords: &[f64]) -> Result<Self> {
        if coords.len() != shape.dim() {
            return Err(Error::DimensionMismatch {
                expected: shape.dim(),
                found: coords.len(),
            });
        }
        let (n, nf) = (shape.n, shape.fibre);
        Ok(Self {
            shape,
            x: coords[..n].to_vec(),
            v: coords[n..n + nf].to_vec(),
            p: coords[n + nf..n + nf + n * nf].to_vec(),
            e: shape.e_index().map(|i| coords[i]),
        })
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.shape.dim());
        c.extend_from_slice(&self.x);
        c.extend_from_slice(&self.v);
        c.extend_from_slice(&self.p);
        c.extend(self.e);
        c
    }

    pub fn shape(&self) -> &PhaseSpaceShape {
        &self.shape
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// All polymomenta, μ-major.
    pub fn momenta(&self) -> &[f64] {
        &self.p
    }

    pub fn p(&self, mu: usize, a: usize) -> f64 {
        self.p[mu * self.shape.fibre + a]
    }

    pub fn e(&self) -> Option<f64> {
        self.e
    }

    /// Drops the energy coordinate.
    pub fn project(&self) -> Self {
        Self {
            shape: self.shape.with_extended(false),
            e: None,
            ..self.clone()
        }
    }

    /// Adds an energy coordinate to a point of `P̃`.
    pub fn extend(&self, e: f64) -> Self {
        Self {
            shape: self.shape.with_extended(true),
            e: Some(e),
            ..self.clone()
        }
    }
}

type EvalFn = dyn Fn(&PhasePoint) -> f64 + Send + Sync;
type GradFn = dyn Fn(&PhasePoint) -> Vec<f64> + Send + Sync;

/// A scalar function on `P` or `P̃`, with optional closed-form gradient.
#[derive(Clone)]
pub struct ScalarField {
    shape: PhaseSpaceShape,
    value: Arc<EvalFn>,
    partials: Option<Arc<GradFn>>,
    fd_step: f64,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("shape", &self.shape)
            .field("analytic_partials", &self.partials.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl ScalarField {
    pub fn new(
        shape: PhaseSpaceShape,
        value: impl Fn(&PhasePoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            shape,
            value: Arc::new(value),
            partials: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// Closed-form gradient, one entry per coordinate in chart order.
    pub fn with_partials(
        mut self,
        partials: impl Fn(&PhasePoint) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.partials = Some(Arc::new(partials));
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    /// Same field with the closed-form gradient removed.
    pub fn without_partials(&self) -> Self {
        Self {
            partials: None,
            ..self.clone()
        }
    }

    pub fn shape(&self) -> &PhaseSpaceShape {
        &self.shape
    }

    pub fn has_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn value(&self, at: &PhasePoint) -> Result<f64> {
        self.check_shape(at)?;
        let v = (self.value)(at);
        if !v.is_finite() {
            return Err(Error::Evaluation(format!("non-finite value {v}")));
        }
        Ok(v)
    }

    /// Closed-form gradient if available, otherwise central differences.
    pub fn gradient(&self, at: &PhasePoint) -> Result<Vec<f64>> {
        match &self.partials {
            Some(g) => {
                self.check_shape(at)?;
                let grad = g(at);
                if grad.len() != self.shape.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: self.shape.dim(),
                        found: grad.len(),
                    });
                }
                if grad.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Evaluation("non-finite partial derivative".into()));
                }
                Ok(grad)
            }
            None => self.fd_gradient(at, self.fd_step),
        }
    }

    /// Central differences with step `step · (1 + |coordinate|)`.
    pub fn fd_gradient(&self, at: &PhasePoint, step: f64) -> Result<Vec<f64>> {
        self.check_shape(at)?;
        let base = at.coords();
        let mut probe = base.clone();
        let mut grad = Vec::with_capacity(base.len());
        for i in 0..base.len() {
            let h = step * (1.0 + base[i].abs());
            probe[i] = base[i] + h;
            let plus = self.value(&PhasePoint::from_coords(self.shape, &probe)?)?;
            probe[i] = base[i] - h;
            let minus = self.value(&PhasePoint::from_coords(self.shape, &probe)?)?;
            probe[i] = base[i];
            grad.push((plus - minus) / (2.0 * h));
        }
        Ok(grad)
    }

    fn check_shape(&self, at: &PhasePoint) -> Result<()> {
        if *at.shape() != self.shape {
            return Err(Error::WrongPhaseSpace {
                required: if self.shape.extended {
                    "extended"
                } else {
                    "reduced"
                },
            });
        }
        Ok(())
    }
}

/// `H(x, v, p⃗, p) = -𝓗(x, v, p⃗) - p` on `P` from a DW Hamiltonian on `P̃`.
pub fn energy_function(dw: &ScalarField) -> Result<ScalarField> {
    if dw.shape().extended {
        return Err(Error::WrongPhaseSpace { required: "reduced" });
    }
    let shape = dw.shape().with_extended(true);
    let inner = dw.clone();
    let field = ScalarField::new(shape, move |pt| {
        let e = pt.e().unwrap_or(0.0);
        -(inner.value)(&pt.project()) - e
    })
    .with_fd_step(dw.fd_step());
    Ok(match &dw.partials {
        Some(g) => {
            let g = Arc::clone(g);
            field.with_partials(move |pt| {
                let mut grad: Vec<f64> = g(&pt.project()).into_iter().map(|d| -d).collect();
                grad.push(-1.0);
                grad
            })
        }
        None => field,
    })
}

/// Labels `x1…xn, v1…vN, p1_1…pn_N` (μ-major), then `e` on `P`.
pub fn build_basis(shape: &PhaseSpaceShape) -> Arc<GradedBasis> {
    let mut labels: Vec<String> = (1..=shape.n).map(|m| format!("x{m}")).collect();
    labels.extend((1..=shape.fibre).map(|a| format!("v{a}")));
    for mu in 1..=shape.n {
        labels.extend((1..=shape.fibre).map(|a| format!("p{mu}_{a}")));
    }
    if shape.extended {
        labels.push("e".into());
    }
    GradedBasis::for_shape(labels, *shape).expect("labels are unique")
}

fn basis_shape(basis: &Arc<GradedBasis>) -> Result<PhaseSpaceShape> {
    basis
        .shape()
        .copied()
        .ok_or_else(|| Error::InvalidInput("basis has no phase-space layout".into()))
}

/// `d_μx = ∂_μ ⌟ (dx^1 ∧ … ∧ dx^n)`.
fn horizontal_face(basis: &Arc<GradedBasis>, shape: &PhaseSpaceShape, mu: usize) -> Result<Form> {
    contract(&Multivector::unit(basis, shape.x_index(mu))?, &horizontal_volume(basis, shape)?)
}

fn horizontal_volume(basis: &Arc<GradedBasis>, shape: &PhaseSpaceShape) -> Result<Form> {
    Form::from_terms(basis, shape.n, [((0..shape.n).collect(), 1.0)])
}

fn vertical_part(basis: &Arc<GradedBasis>, shape: &PhaseSpaceShape) -> Result<Form> {
    let mut omega = Form::zero(basis, shape.n + 1)?;
    for a in 0..shape.fibre {
        let dv = Form::unit(basis, shape.v_index(a))?;
        for mu in 0..shape.n {
            let dp = Form::unit(basis, shape.p_index(mu, a))?;
            omega = omega.add(&dv.wedge(&dp)?.wedge(&horizontal_face(basis, shape, mu)?)?)?;
        }
    }
    Ok(omega)
}

/// `Ω = dv^A ∧ dp^μ_A ∧ d_μx - dp ∧ dx` on `P`, in the basis of
/// [`build_basis`]. Constant coefficients, so no base point is needed.
pub fn build_omega(shape: &PhaseSpaceShape) -> Result<Form> {
    build_omega_on(&build_basis(shape))
}

/// [`build_omega`] on an existing phase-space basis.
pub fn build_omega_on(basis: &Arc<GradedBasis>) -> Result<Form> {
    let shape = basis_shape(basis)?;
    let Some(e) = shape.e_index() else {
        return Err(Error::WrongPhaseSpace { required: "extended" });
    };
    let energy = Form::unit(basis, e)?.wedge(&horizontal_volume(basis, &shape)?)?;
    vertical_part(basis, &shape)?.sub(&energy)
}

/// Vertical form `dv^A ∧ dp^μ_A ∧ d_μx` on `P̃` (vanishing connection).
pub fn build_omega_vertical(shape: &PhaseSpaceShape) -> Result<Form> {
    if shape.extended {
        return Err(Error::WrongPhaseSpace { required: "reduced" });
    }
    vertical_part(&build_basis(shape), shape)
}

/// `dH` at a point as a 1-form.
pub fn d_scalar(h: &ScalarField, at: &PhasePoint) -> Result<Form> {
    d_scalar_on(&build_basis(h.shape()), h, at)
}

pub fn d_scalar_on(basis: &Arc<GradedBasis>, h: &ScalarField, at: &PhasePoint) -> Result<Form> {
    if basis.dim() != h.shape().dim() {
        return Err(Error::BasisMismatch);
    }
    Form::from_components(basis, &h.gradient(at)?)
}

/// `ξ(H) = ∂H/∂p`, the derivative along the energy direction.
pub fn xi_pairing(h: &ScalarField, at: &PhasePoint) -> Result<f64> {
    let Some(e) = h.shape().e_index() else {
        return Err(Error::WrongPhaseSpace { required: "extended" });
    };
    Ok(h.gradient(at)?[e])
}

/// Sparse real polynomial in `dim` variables with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        if let Some((_, e)) = terms.iter().find(|(_, e)| e.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: e.len(),
            });
        }
        Ok(Self { dim, terms })
    }

    /// `n_terms` monomials of total degree `<= max_degree` with coefficients
    /// uniform in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(dim: usize, max_degree: u32, n_terms: usize, rng: &mut R) -> Self {
        let terms = (0..n_terms)
            .map(|_| {
                let degree = rng.gen_range(0..=max_degree);
                let mut exps = vec![0u32; dim];
                for _ in 0..degree {
                    exps[rng.gen_range(0..dim)] += 1;
                }
                (rng.gen_range(-1.0..=1.0), exps)
            })
            .collect();
        Self { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, at: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * monomial(at, e, &[]))
            .sum()
    }

    pub fn gradient(&self, at: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                self.terms
                    .iter()
                    .map(|(c, e)| c * monomial(at, e, &[i]))
                    .sum()
            })
            .collect()
    }

    /// Row-major `dim x dim` Hessian.
    pub fn hessian(&self, at: &[f64]) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| {
                        self.terms
                            .iter()
                            .map(|(c, e)| c * monomial(at, e, &[i, j]))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Wraps the polynomial as a scalar field on a phase space of matching
    /// dimension, with closed-form partials.
    pub fn to_field(&self, shape: PhaseSpaceShape) -> Result<ScalarField> {
        if shape.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: shape.dim(),
                found: self.dim,
            });
        }
        let value = self.clone();
        let grad = self.clone();
        Ok(ScalarField::new(shape, move |p| value.eval(&p.coords()))
            .with_partials(move |p| grad.gradient(&p.coords())))
    }
}

/// `∂_{d_1} … ∂_{d_k} Π x_i^{e_i}` evaluated at `at`.
fn monomial(at: &[f64], exps: &[u32], derivs: &[usize]) -> f64 {
    let mut e = exps.to_vec();
    let mut factor = 1.0;
    for &d in derivs {
        if e[d] == 0 {
            return 0.0;
        }
        factor *= f64::from(e[d]);
        e[d] -= 1;
    }
    factor
        * at
            .iter()
            .zip(&e)
            .map(|(x, &k)| x.powi(k as i32))
            .product::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_layouts() {
        let b = build_basis(&PhaseSpaceShape::extended(1, 1).unwrap());
        assert_eq!(b.labels(), &["x1", "v1", "p1_1", "e"]);
        assert_eq!(build_basis(&PhaseSpaceShape::extended(2, 1).unwrap()).dim(), 6);
        assert_eq!(build_basis(&PhaseSpaceShape::extended(4, 1).unwrap()).dim(), 10);
        let b = build_basis(&PhaseSpaceShape::reduced(2, 2).unwrap());
        assert_eq!(
            b.labels(),
            &["x1", "x2", "v1", "v2", "p1_1", "p1_2", "p2_1", "p2_2"]
        );
    }

    #[test]
    fn invalid_shape() {
        assert!(PhaseSpaceShape::extended(0, 1).is_err());
        assert!(PhaseSpaceShape::extended(1, 0).is_err());
    }

    #[test]
    fn block_classification() {
        let s = PhaseSpaceShape::extended(2, 2).unwrap();
        assert_eq!(s.block_of(1), Block::Horizontal(1));
        assert_eq!(s.block_of(3), Block::Field(1));
        assert_eq!(s.block_of(s.p_index(1, 0)), Block::Momentum(1, 0));
        assert_eq!(s.block_of(s.dim() - 1), Block::Energy);
    }

    #[test]
    fn point_round_trip() {
        let s = PhaseSpaceShape::extended(2, 1).unwrap();
        let c = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let p = PhasePoint::from_coords(s, &c).unwrap();
        assert_eq!(p.p(1, 0), 5.0);
        assert_eq!(p.e(), Some(6.0));
        assert_eq!(p.coords(), c);
        assert!(PhasePoint::new(s, vec![0.0; 2], vec![0.0], vec![0.0; 2], None).is_err());
    }

    #[test]
    fn mechanics_omega() {
        let s = PhaseSpaceShape::extended(1, 1).unwrap();
        let omega = build_omega(&s).unwrap();
        assert_eq!(omega.grade(), 2);
        assert_eq!(omega.len(), 2);
        // dv ^ dp - de ^ dt
        assert_eq!(omega.get(&[1, 2]), 1.0);
        assert_eq!(omega.get(&[3, 0]), -1.0);
    }

    #[test]
    fn omega_term_counts_and_signs() {
        for (n, nf) in [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (4, 1)] {
            let s = PhaseSpaceShape::extended(n, nf).unwrap();
            let omega = build_omega(&s).unwrap();
            assert_eq!(omega.grade(), n + 1);
            assert_eq!(omega.len(), n * nf + 1);
            assert!(omega.terms().all(|(_, c)| c == 1.0 || c == -1.0));
        }
    }

    #[test]
    fn vertical_omega() {
        let s = PhaseSpaceShape::reduced(1, 1).unwrap();
        let w = build_omega_vertical(&s).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.get(&[1, 2]), 1.0);
        assert_eq!(build_omega_vertical(&PhaseSpaceShape::reduced(2, 2).unwrap()).unwrap().len(), 4);
        assert!(build_omega_vertical(&s.with_extended(true)).is_err());
        assert!(build_omega(&s).is_err());
        // P̃ has no energy direction to contract with
        let b = build_basis(&s);
        assert!(Multivector::unit(&b, s.dim()).is_err());
    }

    #[test]
    fn energy_function_gradient() {
        let s = PhaseSpaceShape::reduced(1, 1).unwrap();
        let zero = ScalarField::new(s, |_| 0.0).with_partials(|_| vec![0.0; 3]);
        let h = energy_function(&zero).unwrap();
        let at = PhasePoint::origin(h.shape().to_owned());
        let dh = d_scalar(&h, &at).unwrap();
        assert_eq!(dh.components(), vec![0.0, 0.0, 0.0, -1.0]);
        assert_eq!(xi_pairing(&h, &at).unwrap(), -1.0);
        assert!(xi_pairing(&zero, &PhasePoint::origin(s)).is_err());
    }

    #[test]
    fn xi_pairing_of_quadratic_energy() {
        let s = PhaseSpaceShape::extended(1, 1).unwrap();
        let h = ScalarField::new(s, |p| p.e().unwrap().powi(2));
        assert!(xi_pairing(&h, &PhasePoint::origin(s)).unwrap().abs() < 1e-12);
        let flat = ScalarField::new(s, |p| p.v()[0]);
        assert!(xi_pairing(&flat, &PhasePoint::origin(s)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn polynomial_derivatives() {
        // 3 x^2 y - y^3
        let p = Polynomial::new(2, vec![(3.0, vec![2, 1]), (-1.0, vec![0, 3])]).unwrap();
        let at = [1.5, -0.5];
        assert!((p.eval(&at) - (3.0 * 2.25 * -0.5 + 0.125)).abs() < 1e-14);
        assert_eq!(p.gradient(&at), vec![6.0 * 1.5 * -0.5, 3.0 * 2.25 - 3.0 * 0.25]);
        let h = p.hessian(&at);
        assert_eq!(h[0][1], 6.0 * 1.5);
        assert_eq!(h[1][0], h[0][1]);
        assert_eq!(h[1][1], -6.0 * -0.5);
    }
}
