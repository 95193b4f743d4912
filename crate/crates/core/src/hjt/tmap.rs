//! Maps `T: E → P` and families `S^μ` on the configuration bundle, with the
//! integrability conditions and the covariant Hamilton–Jacobi equation.
//!
//! Points of `E` are passed as one slice `(x^1 … x^n, v^1 … v^N)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_space::{PhasePoint, PhaseSpaceShape, Polynomial, ScalarField, DEFAULT_FD_STEP};

type VecFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type MatFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;
type TensorFn = dyn Fn(&[f64]) -> Vec<Vec<Vec<f64>>> + Send + Sync;
type TFn = dyn Fn(&[f64]) -> TValue + Send + Sync;

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn check_finite<'a>(values: impl IntoIterator<Item = &'a f64>, what: &str) -> Result<()> {
    if values.into_iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation(format!("non-finite {what}")));
    }
    Ok(())
}

/// Central-difference Jacobian of a vector-valued map, `J[row][col]`.
fn fd_jacobian(f: impl Fn(&[f64]) -> Result<Vec<f64>>, at: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut probe = at.to_vec();
    let mut cols = Vec::with_capacity(at.len());
    for c in 0..at.len() {
        let h = DEFAULT_FD_STEP * (1.0 + at[c].abs());
        probe[c] = at[c] + h;
        let plus = f(&probe)?;
        probe[c] = at[c] - h;
        let minus = f(&probe)?;
        probe[c] = at[c];
        cols.push(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<_>>());
    }
    let rows = cols.first().map_or(0, Vec::len);
    Ok((0..rows).map(|r| cols.iter().map(|c| c[r]).collect()).collect())
}

/// A family `S^μ(x, v)`, `μ = 1 … n`.
#[derive(Clone)]
pub struct SFamily {
    n: usize,
    fibre: usize,
    value: Arc<VecFn>,
    jacobian: Option<Arc<MatFn>>,
    hessian: Option<Arc<TensorFn>>,
}

impl std::fmt::Debug for SFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SFamily")
            .field("n", &self.n)
            .field("fibre", &self.fibre)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("analytic_hessian", &self.hessian.is_some())
            .finish()
    }
}

impl SFamily {
    pub fn new(n: usize, fibre: usize, value: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self {
            n,
            fibre,
            value: Arc::new(value),
            jacobian: None,
            hessian: None,
        }
    }

    /// `J[μ][c] = ∂_c S^μ`.
    pub fn with_jacobian(mut self, f: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(f));
        self
    }

    /// `H[μ][c][d] = ∂_c ∂_d S^μ`.
    pub fn with_hessian(mut self, f: impl Fn(&[f64]) -> Vec<Vec<Vec<f64>>> + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(f));
        self
    }

    /// One polynomial per `S^μ`, with exact derivatives.
    pub fn from_polynomials(n: usize, fibre: usize, polys: Vec<Polynomial>) -> Result<Self> {
        check_len(n, polys.len())?;
        for p in &polys {
            check_len(n + fibre, p.dim())?;
        }
        let polys = Arc::new(polys);
        let (a, b, c) = (Arc::clone(&polys), Arc::clone(&polys), polys);
        Ok(Self::new(n, fibre, move |y| a.iter().map(|p| p.eval(y)).collect())
            .with_jacobian(move |y| b.iter().map(|p| p.gradient(y)).collect())
            .with_hessian(move |y| c.iter().map(|p| p.hessian(y)).collect()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fibre(&self) -> usize {
        self.fibre
    }

    pub fn dim(&self) -> usize {
        self.n + self.fibre
    }

    pub fn has_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    pub fn value(&self, at: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), at.len())?;
        let v = (self.value)(at);
        check_len(self.n, v.len())?;
        check_finite(&v, "S value")?;
        Ok(v)
    }

    pub fn jacobian(&self, at: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_len(self.dim(), at.len())?;
        let j = match &self.jacobian {
            Some(f) => f(at),
            None => fd_jacobian(|y| self.value(y), at)?,
        };
        check_len(self.n, j.len())?;
        check_finite(j.iter().flatten(), "S derivative")?;
        Ok(j)
    }

    pub fn hessian(&self, at: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
        check_len(self.dim(), at.len())?;
        let h = match &self.hessian {
            Some(f) => f(at),
            None => {
                let d = self.dim();
                let flat = fd_jacobian(|y| Ok(self.jacobian(y)?.concat()), at)?;
                (0..self.n)
                    .map(|mu| (0..d).map(|c| flat[mu * d + c].clone()).collect())
                    .collect()
            }
        };
        check_finite(h.iter().flatten().flatten(), "S second derivative")?;
        Ok(h)
    }
}

/// Value of a map `T: E → P` over `(x, v)`: `t[μ·N + A] = T^μ_A`, and the
/// energy component `t0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TValue {
    pub t: Vec<f64>,
    pub t0: f64,
}

impl TValue {
    fn flatten(&self) -> Vec<f64> {
        let mut v = self.t.clone();
        v.push(self.t0);
        v
    }
}

#[derive(Clone)]
pub struct TMap {
    n: usize,
    fibre: usize,
    value: Arc<TFn>,
    jacobian: Option<Arc<MatFn>>,
}

impl std::fmt::Debug for TMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TMap")
            .field("n", &self.n)
            .field("fibre", &self.fibre)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl TMap {
    pub fn new(n: usize, fibre: usize, value: impl Fn(&[f64]) -> TValue + Send + Sync + 'static) -> Self {
        Self {
            n,
            fibre,
            value: Arc::new(value),
            jacobian: None,
        }
    }

    /// Rows `T^μ_A` in `μ`-major order followed by `T_0`; columns
    /// `x^1 … x^n, v^1 … v^N`.
    pub fn with_jacobian(mut self, f: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(f));
        self
    }

    /// `T^μ_A = ∂_A S^μ`, `T_0 = ∂_μ S^μ`.
    pub fn from_s_family(s: &SFamily) -> Self {
        let (n, nf) = (s.n, s.fibre);
        let sv = s.clone();
        let t = Self::new(n, nf, move |y| {
            let j = sv.jacobian(y).unwrap_or_else(|_| vec![vec![f64::NAN; n + nf]; n]);
            TValue {
                t: (0..n).flat_map(|mu| (0..nf).map(move |a| (mu, a))).map(|(mu, a)| j[mu][n + a]).collect(),
                t0: (0..n).map(|mu| j[mu][mu]).sum(),
            }
        });
        if !s.has_hessian() {
            return t;
        }
        let sh = s.clone();
        t.with_jacobian(move |y| {
            let Ok(h) = sh.hessian(y) else {
                return vec![vec![f64::NAN; n + nf]; n * nf + 1];
            };
            let mut rows = Vec::with_capacity(n * nf + 1);
            for mu in 0..n {
                for a in 0..nf {
                    rows.push(h[mu][n + a].clone());
                }
            }
            rows.push((0..n + nf).map(|c| (0..n).map(|mu| h[mu][mu][c]).sum()).collect());
            rows
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fibre(&self) -> usize {
        self.fibre
    }

    pub fn value(&self, at: &[f64]) -> Result<TValue> {
        check_len(self.n + self.fibre, at.len())?;
        let v = (self.value)(at);
        check_len(self.n * self.fibre, v.t.len())?;
        check_finite(v.t.iter().chain([&v.t0]), "T value")?;
        Ok(v)
    }

    pub fn jacobian(&self, at: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_len(self.n + self.fibre, at.len())?;
        let j = match &self.jacobian {
            Some(f) => f(at),
            None => fd_jacobian(|y| Ok(self.value(y)?.flatten()), at)?,
        };
        check_len(self.n * self.fibre + 1, j.len())?;
        check_finite(j.iter().flatten(), "T derivative")?;
        Ok(j)
    }
}

/// Residuals of the four integrability conditions at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TConditions {
    /// `max |∂^A_μ 𝓗(x, v, T)|`.
    pub integrability: f64,
    /// `max_A |∂_μ T^μ_A + ∂_A 𝓗(x, v, T)|`.
    pub field: f64,
    /// `max_μ |∂_μ T_0 + ∂_μ 𝓗(x, v, T)|`.
    pub energy: f64,
    /// `max_A |∂_μ T^μ_A - ∂_A T_0|`.
    pub compatibility: f64,
}

/// One line of a Hamilton–Jacobi report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub point: Vec<f64>,
    pub residual: f64,
    pub pass: bool,
}

impl TConditions {
    pub fn max(&self) -> f64 {
        self.integrability.max(self.field).max(self.energy).max(self.compatibility)
    }

    pub fn reports(&self, point: &[f64], tol: f64) -> Vec<ConditionReport> {
        [
            ("integrability", self.integrability),
            ("field", self.field),
            ("energy", self.energy),
            ("compatibility", self.compatibility),
        ]
        .into_iter()
        .map(|(name, residual)| ConditionReport {
            condition: name.to_owned(),
            point: point.to_vec(),
            residual,
            pass: residual < tol,
        })
        .collect()
    }
}

fn reduced_point(hh: &ScalarField, n: usize, fibre: usize, at: &[f64], p: Vec<f64>) -> Result<PhasePoint> {
    let shape = *hh.shape();
    if shape != PhaseSpaceShape::reduced(n, fibre)? {
        return Err(Error::WrongPhaseSpace { required: "reduced" });
    }
    PhasePoint::new(shape, at[..n].to_vec(), at[n..].to_vec(), p, None)
}

/// Evaluates the four conditions with the `𝓗`-partials taken at
/// `(x, v, T⃗(x, v))`.
pub fn check_t_conditions(t: &TMap, hh: &ScalarField, at: &[f64]) -> Result<TConditions> {
    let (n, nf) = (t.n, t.fibre);
    let tv = t.value(at)?;
    let pt = reduced_point(hh, n, nf, at, tv.t)?;
    let shape = *pt.shape();
    let grad = hh.gradient(&pt)?;
    let jac = t.jacobian(at)?;
    let t0 = n * nf;

    let mut out = TConditions {
        integrability: 0.0,
        field: 0.0,
        energy: 0.0,
        compatibility: 0.0,
    };
    for mu in 0..n {
        for a in 0..nf {
            out.integrability = out.integrability.max(grad[shape.p_index(mu, a)].abs());
        }
        out.energy = out.energy.max((jac[t0][mu] + grad[shape.x_index(mu)]).abs());
    }
    for a in 0..nf {
        let div: f64 = (0..n).map(|mu| jac[mu * nf + a][mu]).sum();
        out.field = out.field.max((div + grad[shape.v_index(a)]).abs());
        out.compatibility = out.compatibility.max((div - jac[t0][n + a]).abs());
    }
    Ok(out)
}

/// `|∂_μ S^μ + 𝓗(x, v, ∂_A S^μ)|`.
pub fn hj_residual(s: &SFamily, hh: &ScalarField, at: &[f64]) -> Result<f64> {
    let (n, nf) = (s.n, s.fibre);
    let j = s.jacobian(at)?;
    let p = (0..n).flat_map(|mu| (0..nf).map(move |a| (mu, a))).map(|(mu, a)| j[mu][n + a]).collect();
    let pt = reduced_point(hh, n, nf, at, p)?;
    let div: f64 = (0..n).map(|mu| j[mu][mu]).sum();
    Ok((div + hh.value(&pt)?).abs())
}

/// `max |∂_c (H∘T)|` for `H = -𝓗 - p`, by central differences.
pub fn energy_closedness(t: &TMap, hh: &ScalarField, at: &[f64]) -> Result<f64> {
    let (n, nf) = (t.n, t.fibre);
    let h_of_t = |y: &[f64]| -> Result<Vec<f64>> {
        let tv = t.value(y)?;
        let t0 = tv.t0;
        let pt = reduced_point(hh, n, nf, y, tv.t)?;
        Ok(vec![-hh.value(&pt)? - t0])
    };
    let j = fd_jacobian(h_of_t, at)?;
    Ok(j[0].iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// `max |∂_c ∂_d S^μ - ∂_d ∂_c S^μ|`.
pub fn s_closedness(s: &SFamily, at: &[f64]) -> Result<f64> {
    let h = s.hessian(at)?;
    let mut worst = 0.0_f64;
    for hm in &h {
        for c in 0..hm.len() {
            for d in 0..c {
                worst = worst.max((hm[c][d] - hm[d][c]).abs());
            }
        }
    }
    Ok(worst)
}
