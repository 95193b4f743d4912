//! Hamilton–Jacobi data for the Klein–Gordon field.
//!
//! In the original chart of `E` the family built from a solution `Φ`
//! solves the covariant HJ equation only along the section `v = Φ(x)`.
//! The integrability conditions are checked in the chart adapted to the
//! foliation `v = Φ(x) + s Ψ(x)` by a second, nowhere-vanishing solution `Ψ`.

use std::sync::Arc;

use super::tmap::{SFamily, TMap, TValue};
use crate::dynamics::{FieldModel, KGParams};
use crate::error::{Error, Result};
use crate::exterior::FnField;
use crate::phase_space::ScalarField;

/// `S^μ = (v - ½Φ) g^{μν} ∂_νΦ` at `at = (x, v)`.
pub fn kg_s(params: &KGParams, phi: &dyn FieldModel, at: &[f64]) -> Result<Vec<f64>> {
    let n = params.n;
    if phi.n() != n || at.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: at.len(),
        });
    }
    let x = &at[..n];
    let weight = at[n] - 0.5 * phi.value(x);
    Ok(params.raise(&phi.gradient(x)).into_iter().map(|g| weight * g).collect())
}

/// [`kg_s`] as a family with closed-form first derivatives.
pub fn kg_s_family(params: &KGParams, phi: Arc<dyn FieldModel>) -> Result<SFamily> {
    let n = params.n;
    if phi.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: phi.n(),
        });
    }
    let (p1, p2) = (params.clone(), params.clone());
    let f1 = Arc::clone(&phi);
    Ok(SFamily::new(n, 1, move |y| kg_s(&p1, f1.as_ref(), y).unwrap_or_else(|_| vec![f64::NAN; n]))
        .with_jacobian(move |y| {
            let x = &y[..n];
            let (val, grad, hess) = (phi.value(x), phi.gradient(x), phi.hessian(x));
            let weight = y[n] - 0.5 * val;
            (0..n)
                .map(|mu| {
                    let gmu = p2.metric.inverse_entry(mu);
                    let mut row: Vec<f64> = (0..n)
                        .map(|nu| gmu * (-0.5 * grad[nu] * grad[mu] + weight * hess[mu][nu]))
                        .collect();
                    row.push(gmu * grad[mu]);
                    row
                })
                .collect()
        }))
}

/// The chart `(x, s) ↦ (x, Φ(x) + s Ψ(x))` on `E`.
#[derive(Clone)]
pub struct KgFoliation {
    params: KGParams,
    phi: Arc<dyn FieldModel>,
    psi: Arc<dyn FieldModel>,
}

/// Values of `a = Φ + sΨ`, `b = ∂a`, `∂b` and `Ψ`, `∂Ψ` at one chart point.
struct Local {
    a: f64,
    b: Vec<f64>,
    db: Vec<Vec<f64>>,
    psi: f64,
    dpsi: Vec<f64>,
}

impl KgFoliation {
    pub fn new(params: &KGParams, phi: Arc<dyn FieldModel>, psi: Arc<dyn FieldModel>) -> Result<Self> {
        for m in [&phi, &psi] {
            if m.n() != params.n {
                return Err(Error::DimensionMismatch {
                    expected: params.n,
                    found: m.n(),
                });
            }
        }
        Ok(Self {
            params: params.clone(),
            phi,
            psi,
        })
    }

    pub fn params(&self) -> &KGParams {
        &self.params
    }

    /// The field value `v` of the chart point `(x, s)`.
    pub fn field_value(&self, x: &[f64], s: f64) -> f64 {
        self.phi.value(x) + s * self.psi.value(x)
    }

    fn local(&self, x: &[f64], s: f64) -> Local {
        let (gp, gq) = (self.phi.gradient(x), self.psi.gradient(x));
        let (hp, hq) = (self.phi.hessian(x), self.psi.hessian(x));
        Local {
            a: self.field_value(x, s),
            b: gp.iter().zip(&gq).map(|(p, q)| p + s * q).collect(),
            db: hp
                .iter()
                .zip(&hq)
                .map(|(rp, rq)| rp.iter().zip(rq).map(|(p, q)| p + s * q).collect())
                .collect(),
            psi: self.psi.value(x),
            dpsi: gq,
        }
    }

    /// The DW Hamiltonian in the adapted chart, with `p'` conjugate to `s`:
    /// `𝓗' = ½ g_{μν} p'^μ p'^ν / Ψ² - p'^μ ∂_μa / Ψ + ½ m² a²`.
    pub fn dw_hamiltonian(&self) -> ScalarField {
        let n = self.params.n;
        let m2 = self.params.mass * self.params.mass;
        let (fv, fg) = (self.clone(), self.clone());
        ScalarField::new(self.params.shape(), move |pt| {
            let l = fv.local(pt.x(), pt.v()[0]);
            let p = pt.momenta();
            let gpp = fv.params.metric.inner(p, p);
            let pb: f64 = p.iter().zip(&l.b).map(|(a, b)| a * b).sum();
            0.5 * gpp / (l.psi * l.psi) - pb / l.psi + 0.5 * m2 * l.a * l.a
        })
        .with_partials(move |pt| {
            let l = fg.local(pt.x(), pt.v()[0]);
            let p = pt.momenta();
            let gpp = fg.params.metric.inner(p, p);
            let pb: f64 = p.iter().zip(&l.b).map(|(a, b)| a * b).sum();
            let pdpsi: f64 = p.iter().zip(&l.dpsi).map(|(a, b)| a * b).sum();
            let psi = l.psi;
            let mut grad: Vec<f64> = (0..n)
                .map(|nu| {
                    let pdb: f64 = (0..n).map(|mu| p[mu] * l.db[mu][nu]).sum();
                    -gpp * l.dpsi[nu] / psi.powi(3) - pdb / psi + pb * l.dpsi[nu] / (psi * psi)
                        + m2 * l.a * l.b[nu]
                })
                .collect();
            grad.push(-pdpsi / psi + m2 * l.a * psi);
            grad.extend((0..n).map(|mu| fg.params.metric.entry(mu) * p[mu] / (psi * psi) - l.b[mu] / psi));
            grad
        })
    }

    /// `T'^μ = Ψ g^{μν} ∂_νa`, `T'_0 = -𝓗'(x, s, T') = ½ g^{μν}∂_μa ∂_νa - ½ m² a²`,
    /// with closed-form derivatives.
    pub fn t_map(&self) -> TMap {
        let n = self.params.n;
        let m2 = self.params.mass * self.params.mass;
        let (fv, fj) = (self.clone(), self.clone());
        TMap::new(n, 1, move |y| {
            let l = fv.local(&y[..n], y[n]);
            let raised = fv.params.raise(&l.b);
            let bb: f64 = raised.iter().zip(&l.b).map(|(a, b)| a * b).sum();
            TValue {
                t: raised.iter().map(|r| l.psi * r).collect(),
                t0: 0.5 * bb - 0.5 * m2 * l.a * l.a,
            }
        })
        .with_jacobian(move |y| {
            let l = fj.local(&y[..n], y[n]);
            let g = |mu: usize| fj.params.metric.inverse_entry(mu);
            let mut rows: Vec<Vec<f64>> = (0..n)
                .map(|mu| {
                    let mut row: Vec<f64> = (0..n)
                        .map(|nu| g(mu) * (l.dpsi[nu] * l.b[mu] + l.psi * l.db[mu][nu]))
                        .collect();
                    row.push(l.psi * g(mu) * l.dpsi[mu]);
                    row
                })
                .collect();
            let mut last: Vec<f64> = (0..n)
                .map(|nu| (0..n).map(|mu| g(mu) * l.b[mu] * l.db[mu][nu]).sum::<f64>() - m2 * l.a * l.b[nu])
                .collect();
            last.push((0..n).map(|mu| g(mu) * l.b[mu] * l.dpsi[mu]).sum::<f64>() - m2 * l.a * l.psi);
            rows.push(last);
            rows
        })
    }

    /// The fields `∂_μ + (∂𝓗'/∂p'^μ)(x, s, T') ∂_s` on `E`, pulled back from
    /// the decomposition along `T'`. They are horizontal exactly when the
    /// integrability condition holds.
    pub fn pulled_back_fields(&self) -> Vec<FnField> {
        let n = self.params.n;
        (0..n)
            .map(|mu| {
                let (hh, t) = (self.dw_hamiltonian(), self.t_map());
                let shape = self.params.shape();
                FnField::new(n + 1, move |y| {
                    let mut z = vec![0.0; n + 1];
                    z[mu] = 1.0;
                    z[n] = t
                        .value(y)
                        .and_then(|tv| {
                            let pt = crate::phase_space::PhasePoint::new(
                                shape,
                                y[..n].to_vec(),
                                vec![y[n]],
                                tv.t,
                                None,
                            )?;
                            Ok(hh.gradient(&pt)?[shape.p_index(mu, 0)])
                        })
                        .unwrap_or(f64::NAN);
                    z
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{kg_dw_hamiltonian, PlaneWave};
    use crate::hjt::tmap::{check_t_conditions, hj_residual};

    fn setup() -> (KGParams, Arc<dyn FieldModel>, Arc<dyn FieldModel>) {
        let params = KGParams::new(2, 1.0).unwrap();
        let phi: Arc<dyn FieldModel> = Arc::new(PlaneWave::new(&params, 1.0, vec![1.0]).unwrap());
        let psi: Arc<dyn FieldModel> = Arc::new(PlaneWave::new(&params, 1.0, vec![0.0]).unwrap());
        (params, phi, psi)
    }

    #[test]
    fn kg_s_roots() {
        let (params, phi, _) = setup();
        let x = [0.3, 1.1];
        let half = 0.5 * phi.value(&x);
        assert!(kg_s(&params, phi.as_ref(), &[x[0], x[1], half]).unwrap().iter().all(|s| s.abs() < 1e-16));
    }

    #[test]
    fn hj_on_the_solution_section() {
        let (params, phi, _) = setup();
        let s = kg_s_family(&params, Arc::clone(&phi)).unwrap();
        let hh = kg_dw_hamiltonian(&params);
        let x = [0.4, 2.0];
        let on = [x[0], x[1], phi.value(&x)];
        assert!(hj_residual(&s, &hh, &on).unwrap() < 1e-14);
        // off the section the residual is ½ m² (v - Φ)²
        let off = [x[0], x[1], phi.value(&x) + 0.5];
        assert!((hj_residual(&s, &hh, &off).unwrap() - 0.125).abs() < 1e-14);
    }

    #[test]
    fn adapted_chart_satisfies_all_conditions() {
        let (params, phi, psi) = setup();
        let fol = KgFoliation::new(&params, phi, psi).unwrap();
        let (t, hh) = (fol.t_map(), fol.dw_hamiltonian());
        for at in [[0.2, 0.5, 0.0], [0.9, -1.3, 0.7], [1.2, 3.0, -2.0]] {
            let r = check_t_conditions(&t, &hh, &at).unwrap();
            assert!(r.max() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn adapted_partials_match_finite_differences() {
        let (params, phi, psi) = setup();
        let fol = KgFoliation::new(&params, phi, psi).unwrap();
        let hh = fol.dw_hamiltonian();
        let pt = crate::phase_space::PhasePoint::new(params.shape(), vec![0.3, 0.8], vec![0.4], vec![0.7, -0.2], None)
            .unwrap();
        let exact = hh.gradient(&pt).unwrap();
        let fd = hh.fd_gradient(&pt, 1e-6).unwrap();
        for (a, b) in exact.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-8, "{exact:?} vs {fd:?}");
        }
        let t = fol.t_map();
        let analytic = t.jacobian(&[0.3, 0.8, 0.4]).unwrap();
        let numeric = TMap::new(2, 1, {
            let t = t.clone();
            move |y| t.value(y).unwrap()
        })
        .jacobian(&[0.3, 0.8, 0.4])
        .unwrap();
        for (ra, rn) in analytic.iter().zip(&numeric) {
            for (a, b) in ra.iter().zip(rn) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn original_chart_is_not_integrable() {
        let (params, phi, _) = setup();
        let s = kg_s_family(&params, Arc::clone(&phi)).unwrap();
        let t = TMap::from_s_family(&s);
        let x = [0.4, 2.0];
        let r = check_t_conditions(&t, &kg_dw_hamiltonian(&params), &[x[0], x[1], phi.value(&x)]).unwrap();
        assert!(r.integrability > 0.1);
    }
}
