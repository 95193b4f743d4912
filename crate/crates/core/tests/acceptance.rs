//! Acceptance suite. Prints one line per criterion and exits non-zero if any fails.

mod common;

use std::f64::consts::TAU;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{dense_annihilator_dim, orders, plucker_defect, random_decomposable, random_multivector};
use polysymp::dynamics::*;
use polysymp::exterior::{involutivity_check, is_decomposable, FnField};
use polysymp::hamvec::{construct_decomposition, verify_hamvec};
use polysymp::hjt::*;
use polysymp::phase_space::{energy_function, Polynomial};
use polysymp::{GradedBasis, Metric, PhasePoint, PhaseSpaceShape, ScalarField, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HAMVEC_TOL: f64 = 1e-8;
const HAMVEC_BUDGET: Duration = Duration::from_secs(30);
const PLUCKER_TOL: f64 = 1e-9;
const MIN_ORDER: f64 = 1.9;
const SECTION_TOL: f64 = 1e-10;
const LIFT_BUDGET: Duration = Duration::from_secs(60);
const NO_GO_MIN_RESIDUAL: f64 = 1e-3;
const HJ_TOL: f64 = 1e-8;
const T_CONDITION_FACTOR: f64 = 5.0;
const COMPATIBILITY_TOL: f64 = 1e-8;
const MECHANICS_TOL: f64 = 1e-12;
const LENGTH: f64 = TAU;
const GRIDS: [usize; 3] = [64, 128, 256];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn plane_wave_run(nx: usize, extra: usize) -> (KGParams, PlaneWave, Arc<FieldSolution>, usize) {
    let params = KGParams::new(2, 1.0).unwrap();
    let w = PlaneWave::new(&params, 1.0, vec![TAU / LENGTH]).unwrap();
    let dx = LENGTH / nx as f64;
    let level = (0.5 / (dx / 2.0)).round() as usize;
    let grid = GridSpec::new(LENGTH, nx, dx / 2.0, level + extra).unwrap();
    let init = InitialData::from_fn(&grid, |x| w.value(&[0.0, x]), |x| w.gradient(&[0.0, x])[0]);
    let sol = integrate_kg(&params, &init, &grid).unwrap();
    (params, w, Arc::new(sol), level)
}

fn hamvec_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0_f64;
    for (n, nf) in [(1, 1), (2, 1), (2, 2), (3, 1), (4, 1)] {
        let shape = PhaseSpaceShape::reduced(n, nf).unwrap();
        for _ in 0..10 {
            let hh = Polynomial::random(shape.dim(), 3, 10, &mut rng).to_field(shape).unwrap();
            let h = energy_function(&hh).unwrap();
            for _ in 0..100 {
                let c: Vec<f64> = (0..h.shape().dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let at = PhasePoint::from_coords(*h.shape(), &c).unwrap();
                let x = construct_decomposition(&h, &at, None).unwrap().wedge().unwrap();
                worst = worst.max(verify_hamvec(&x, &h, &at).unwrap().max_abs);
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < HAMVEC_TOL && elapsed < HAMVEC_BUDGET,
        format!("max residual {worst:.2e} (< {HAMVEC_TOL:.0e}), {:.2} s", elapsed.as_secs_f64()),
    )
}

fn decomposability_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let cases: Vec<(usize, usize)> = (2..=6).flat_map(|d| (1..=3.min(d)).map(move |k| (d, k))).collect();
    let mut disagreements = 0;
    for i in 0..500 {
        let (d, k) = cases[rng.gen_range(0..cases.len())];
        let b = GradedBasis::plain(d);
        let x = if i % 2 == 0 {
            random_decomposable(&mut rng, &b, k)
        } else {
            random_multivector(&mut rng, &b, k)
        };
        let r = is_decomposable(&x).unwrap();
        let mut oracle = plucker_defect(&x) < PLUCKER_TOL;
        if k == 2 && d >= 4 {
            let sq = x.wedge(&x).unwrap().max_abs() / x.max_abs().powi(2);
            oracle &= sq < PLUCKER_TOL;
        }
        if r.decomposable != oracle || r.annihilator_dim != dense_annihilator_dim(&x) {
            disagreements += 1;
        }
    }
    let b = GradedBasis::plain(4);
    let ce = polysymp::Multivector::from_terms(&b, 2, [(vec![0, 1], 1.0), (vec![2, 3], 1.0)]).unwrap();
    let ce_dim = is_decomposable(&ce).unwrap().annihilator_dim;
    outcome(
        disagreements == 0 && ce_dim == 0,
        format!("{disagreements} disagreements in 500, counterexample annihilator dim {ce_dim}"),
    )
}

fn lift_suite() -> Outcome {
    let start = Instant::now();
    let mut residuals = Vec::new();
    let mut section = 0.0_f64;
    for nx in GRIDS {
        let (params, _, sol, level) = plane_wave_run(nx, 2);
        let hh = kg_dw_hamiltonian(&params);
        let h = energy_function(&hh).unwrap();
        let worst = (0..nx)
            .map(|j| verify_prop2(&sol, level, j, &hh).unwrap().residual.max_abs)
            .fold(0.0, f64::max);
        residuals.push(worst);
        for k in 1..sol.nt() - 1 {
            for j in 0..nx {
                let v = h.value(&sol.section_point(k, j).unwrap()).unwrap();
                section = section.max(v.abs());
            }
        }
    }
    let ord = orders(&residuals);
    let min_order = ord.iter().copied().fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed();
    outcome(
        min_order >= MIN_ORDER && section < SECTION_TOL && elapsed < LIFT_BUDGET,
        format!(
            "residuals {}, order {min_order:.2} (>= {MIN_ORDER}), max |H on section| {section:.1e}, {:.2} s",
            list(&residuals),
            elapsed.as_secs_f64()
        ),
    )
}

fn no_go_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let (mut total, mut agree) = (0, 0);
    let mut weakest_inconsistent = f64::INFINITY;
    for n in 1..=3 {
        for nf in 1..=2 {
            let shape = PhaseSpaceShape::reduced(n, nf).unwrap();
            for trial in 0..50 {
                let pot = QuadraticPotential::random(n, nf, &mut rng);
                let v = if trial % 5 == 0 {
                    pot.critical_point().unwrap()
                } else {
                    (0..nf).map(|_| rng.gen_range(-2.0..=2.0)).collect()
                };
                let x = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let p = (0..n * nf).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let at = PhasePoint::new(shape, x, v, p, None).unwrap();
                let eta = Metric::euclidean(nf);
                let r = no_go_probe(&pot.to_field(shape).unwrap(), &Metric::minkowski(n), &eta, &at).unwrap();
                total += 1;
                agree += r.agrees as usize;
                if !r.predicted_consistent {
                    weakest_inconsistent = weakest_inconsistent.min(r.residual);
                }
            }
        }
    }
    outcome(
        agree == total && weakest_inconsistent >= NO_GO_MIN_RESIDUAL,
        format!("{agree}/{total} agree, smallest inconsistent residual {weakest_inconsistent:.2e}"),
    )
}

fn hj_suite() -> Outcome {
    let mut hj = 0.0_f64;
    for (n, k) in [(2, vec![1.0]), (4, vec![0.5, -1.0, 2.0])] {
        let params = KGParams::new(n, 1.0).unwrap();
        let w: Arc<dyn FieldModel> = Arc::new(PlaneWave::new(&params, 1.0, k).unwrap());
        let s = kg_s_family(&params, Arc::clone(&w)).unwrap();
        let hh = kg_dw_hamiltonian(&params);
        let mut rng = ChaCha8Rng::seed_from_u64(105);
        for _ in 0..50 {
            let mut at: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..=3.0)).collect();
            at.push(w.value(&at));
            hj = hj.max(hj_residual(&s, &hh, &at).unwrap());
        }
    }

    let params = KGParams::new(2, 1.0).unwrap();
    let psi: Arc<dyn FieldModel> = Arc::new(PlaneWave::new(&params, 1.0, vec![0.0]).unwrap());
    let mut worst_ratio = 0.0_f64;
    for nx in GRIDS {
        let dx = LENGTH / nx as f64;
        let (_, _, sol, level) = plane_wave_run(nx, 1);
        for j in (0..nx).step_by(nx / 8) {
            let jet = sol.second_jet(level, j).unwrap();
            let x = jet.x.clone();
            let phi: Arc<dyn FieldModel> = Arc::new(TaylorModel::new(jet).unwrap());
            let fol = KgFoliation::new(&params, phi, Arc::clone(&psi)).unwrap();
            let (t, hh) = (fol.t_map(), fol.dw_hamiltonian());
            for s in [-1.0, 0.0, 0.5] {
                let r = check_t_conditions(&t, &hh, &[x[0], x[1], s]).unwrap();
                worst_ratio = worst_ratio.max(r.max() / (dx * dx));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut compat = 0.0_f64;
    for (n, nf) in [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)] {
        for _ in 0..5 {
            let polys = (0..n).map(|_| Polynomial::random(n + nf, 4, 10, &mut rng)).collect();
            let s = SFamily::from_polynomials(n, nf, polys).unwrap();
            let t = TMap::from_s_family(&s);
            let zero = ScalarField::new(PhaseSpaceShape::reduced(n, nf).unwrap(), |_| 0.0);
            for _ in 0..10 {
                let at: Vec<f64> = (0..n + nf).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                compat = compat.max(check_t_conditions(&t, &zero, &at).unwrap().compatibility);
            }
        }
    }
    outcome(
        hj < HJ_TOL && worst_ratio < T_CONDITION_FACTOR && compat < COMPATIBILITY_TOL,
        format!(
            "hj residual {hj:.1e}, T-conditions max {worst_ratio:.1e}·dx² (< {T_CONDITION_FACTOR}·dx²), compatibility {compat:.1e}"
        ),
    )
}

fn involutivity_suite() -> Outcome {
    let mut residuals = Vec::new();
    for nx in GRIDS {
        let (_, _, sol, level) = plane_wave_run(nx, 3);
        let worst = (0..nx)
            .step_by(nx / 8)
            .map(|j| lift_involutivity(&sol, level, j, 1e-3).unwrap().residual)
            .fold(0.0, f64::max);
        residuals.push(worst);
    }
    let min_order = orders(&residuals).into_iter().fold(f64::INFINITY, f64::min);

    let b = GradedBasis::plain(3);
    let dx = FnField::coordinate(3, 0);
    let twisted = FnField::new(3, |p| vec![0.0, 1.0, p[0]]);
    let fields: [&dyn VectorField; 2] = [&dx, &twisted];
    let mut rejected = true;
    for tol in [1e-2, 1e-4, 1e-8] {
        for x in [-1.0, 0.0, 2.0] {
            rejected &= !involutivity_check(&b, &fields, &[x, 0.3, -0.7], tol).unwrap().involutive;
        }
    }
    outcome(
        min_order >= MIN_ORDER && rejected,
        format!(
            "residuals {}, order {min_order:.2} (>= {MIN_ORDER}), counterexample rejected: {rejected}",
            list(&residuals)
        ),
    )
}

fn mechanics_suite() -> Outcome {
    let shape = PhaseSpaceShape::reduced(1, 1).unwrap();
    let (m, k) = (1.3, 0.7);
    let hh = ScalarField::new(shape, move |p| 0.5 * p.p(0, 0).powi(2) / m + 0.5 * k * p.v()[0].powi(2))
        .with_partials(move |p| vec![0.0, k * p.v()[0], p.p(0, 0) / m]);
    let h = energy_function(&hh).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let (mut flow, mut hamvec) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..=2.0)).collect();
        let at = PhasePoint::from_coords(*h.shape(), &c).unwrap();
        let d = construct_decomposition(&h, &at, None).unwrap();
        let z = d.components(0);
        // (ṫ, q̇, ṗ, ė) = (1, p/m, -k q, 0)
        let expected = [1.0, c[2] / m, -k * c[1], 0.0];
        for i in 0..4 {
            flow = flow.max((-z[i] - expected[i]).abs());
        }
        hamvec = hamvec.max(verify_hamvec(&d.wedge().unwrap(), &h, &at).unwrap().max_abs);
    }
    outcome(
        flow < MECHANICS_TOL && hamvec < MECHANICS_TOL,
        format!("flow mismatch {flow:.1e}, hamiltonian residual {hamvec:.1e} (< {MECHANICS_TOL:.0e})"),
    )
}

fn main() {
    let suites: [(&str, fn() -> Outcome); 7] = [
        ("hamiltonian n-vector decomposition", hamvec_suite),
        ("decomposability oracle agreement", decomposability_suite),
        ("lifted KG solutions are hamiltonian", lift_suite),
        ("no-go consistency sweep", no_go_suite),
        ("hamilton-jacobi conditions", hj_suite),
        ("involutivity of lifted fields", involutivity_suite),
        ("mechanics reduction", mechanics_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in suites.iter().enumerate() {
        let r = run();
        failed += !r.pass as usize;
        println!("criterion {} {} {}: {}", i + 1, if r.pass { "PASS" } else { "FAIL" }, name, r.detail);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
