//! Lie brackets of vector fields, the Schouten bracket of decomposable
//! multivector fields, and the involutivity test built on it.

use std::sync::Arc;

use serde::Serialize;

use super::alternating::Multivector;
use super::basis::GradedBasis;
use crate::error::{Error, Result};

/// A smooth vector field on a coordinate chart of dimension [`dim`](Self::dim).
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, at: &[f64]) -> Result<Vec<f64>>;

    /// `J[i][j] = ∂_j X^i` when known in closed form. Overrides the
    /// finite-difference Jacobian.
    fn jacobian(&self, _at: &[f64]) -> Option<Result<Vec<Vec<f64>>>> {
        None
    }
}

type ValueFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacobianFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;

/// Vector field given by closures.
pub struct FnField {
    dim: usize,
    value: Box<ValueFn>,
    jacobian: Option<Box<JacobianFn>>,
}

impl FnField {
    pub fn new(dim: usize, value: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            value: Box::new(value),
            jacobian: None,
        }
    }

    pub fn with_jacobian(
        mut self,
        jacobian: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Box::new(jacobian));
        self
    }

    /// The coordinate field `∂_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        Self::new(dim, move |_| {
            let mut v = vec![0.0; dim];
            v[i] = 1.0;
            v
        })
        .with_jacobian(move |_| vec![vec![0.0; dim]; dim])
    }
}

impl VectorField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, at: &[f64]) -> Result<Vec<f64>> {
        check_point(self.dim, at)?;
        let v = (self.value)(at);
        check_values(self.dim, &v)?;
        Ok(v)
    }

    fn jacobian(&self, at: &[f64]) -> Option<Result<Vec<Vec<f64>>>> {
        self.jacobian.as_ref().map(|j| {
            check_point(self.dim, at)?;
            let m = j(at);
            if m.len() != self.dim || m.iter().any(|r| r.len() != self.dim) {
                return Err(Error::Evaluation("jacobian has the wrong shape".into()));
            }
            if m.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Evaluation("non-finite jacobian entry".into()));
            }
            Ok(m)
        })
    }
}

fn check_point(dim: usize, at: &[f64]) -> Result<()> {
    if at.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: at.len(),
        });
    }
    Ok(())
}

fn check_values(dim: usize, v: &[f64]) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Evaluation("non-finite vector field value".into()));
    }
    Ok(())
}

/// Central-difference step `cbrt(eps) * (1 + |x|)`.
pub fn fd_step(coordinate: f64) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + coordinate.abs())
}

/// Jacobian of `field` at `at`, analytic if provided.
pub fn jacobian<F: VectorField + ?Sized>(field: &F, at: &[f64]) -> Result<Vec<Vec<f64>>> {
    if let Some(j) = field.jacobian(at) {
        return j;
    }
    let dim = field.dim();
    let mut jac = vec![vec![0.0; dim]; dim];
    let mut probe = at.to_vec();
    for j in 0..dim {
        let h = fd_step(at[j]);
        probe[j] = at[j] + h;
        let plus = field.eval(&probe)?;
        probe[j] = at[j] - h;
        let minus = field.eval(&probe)?;
        probe[j] = at[j];
        for i in 0..dim {
            jac[i][j] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `[X, Y]^i = X^j ∂_j Y^i - Y^j ∂_j X^i`.
pub fn lie_bracket<X, Y>(x: &X, y: &Y, at: &[f64]) -> Result<Vec<f64>>
where
    X: VectorField + ?Sized,
    Y: VectorField + ?Sized,
{
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    let xv = x.eval(at)?;
    let yv = y.eval(at)?;
    let jx = jacobian(x, at)?;
    let jy = jacobian(y, at)?;
    Ok((0..x.dim())
        .map(|i| {
            (0..x.dim())
                .map(|j| xv[j] * jy[i][j] - yv[j] * jx[i][j])
                .sum()
        })
        .collect())
}

/// Schouten bracket of `X_1 ∧ … ∧ X_p` with `Y_1 ∧ … ∧ Y_q` at a point:
///
/// `Σ_i Σ_j (-1)^{i+j} [X_i, Y_j] ∧ X_1 ∧ …X̂_i… ∧ X_p ∧ Y_1 ∧ …Ŷ_j… ∧ Y_q`
/// with 1-based `i`, `j`.
pub fn schouten_decomposable(
    basis: &Arc<GradedBasis>,
    xs: &[&dyn VectorField],
    ys: &[&dyn VectorField],
    at: &[f64],
) -> Result<Multivector> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptyFactors);
    }
    if let Some(f) = xs.iter().chain(ys).find(|f| f.dim() != basis.dim()) {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: f.dim(),
        });
    }
    let to_mv = |f: &&dyn VectorField| -> Result<Multivector> {
        Multivector::from_components(basis, &f.eval(at)?)
    };
    let xv: Vec<Multivector> = xs.iter().map(to_mv).collect::<Result<_>>()?;
    let yv: Vec<Multivector> = ys.iter().map(to_mv).collect::<Result<_>>()?;

    let mut out = Multivector::zero(basis, xs.len() + ys.len() - 1)?;
    for (i, xi) in xs.iter().enumerate() {
        for (j, yj) in ys.iter().enumerate() {
            let bracket = Multivector::from_components(basis, &lie_bracket(*xi, *yj, at)?)?;
            if bracket.is_zero() {
                continue;
            }
            let mut term = bracket;
            for (a, v) in xv.iter().enumerate() {
                if a != i {
                    term = term.wedge(v)?;
                }
            }
            for (b, v) in yv.iter().enumerate() {
                if b != j {
                    term = term.wedge(v)?;
                }
            }
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            out = out.axpy(sign, &term)?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvolutivityReport {
    pub involutive: bool,
    /// `max_i |[X_i, X] - λ_i X|` in coefficient norm.
    pub residual: f64,
    /// Least-squares `λ_i`.
    pub lambdas: Vec<f64>,
}

/// Checks `[X_i, X] = λ_i X` for `X = X_1 ∧ … ∧ X_k` at a point.
pub fn involutivity_check(
    basis: &Arc<GradedBasis>,
    factors: &[&dyn VectorField],
    at: &[f64],
    tol: f64,
) -> Result<InvolutivityReport> {
    if factors.is_empty() {
        return Err(Error::EmptyFactors);
    }
    let values: Vec<Multivector> = factors
        .iter()
        .map(|f| Multivector::from_components(basis, &f.eval(at)?))
        .collect::<Result<_>>()?;
    let x = Multivector::wedge_all(basis, &values)?;
    let scale: f64 = values.iter().map(Multivector::norm).product();
    if x.is_zero() || x.norm() <= 1e-12 * scale {
        return Err(Error::DependentFactors);
    }
    let xx = x.dot(&x)?;
    let mut residual = 0.0_f64;
    let mut lambdas = Vec::with_capacity(factors.len());
    for f in factors {
        let b = schouten_decomposable(basis, &[*f], factors, at)?;
        let lambda = b.dot(&x)? / xx;
        residual = residual.max(b.axpy(-lambda, &x)?.norm());
        lambdas.push(lambda);
    }
    Ok(InvolutivityReport {
        involutive: residual < tol,
        residual,
        lambdas,
    })
}
