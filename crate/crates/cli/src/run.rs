//! One pipeline per experiment kind.

use std::f64::consts::TAU;
use std::sync::Arc;

use polysymp::dynamics::{
    integrate_kg, kg_dw_hamiltonian, lift_involutivity, stability_bound, verify_prop2, FieldModel,
    FieldSolution, GridSpec, InitialData, KGParams, PlaneWave, TaylorModel,
};
use polysymp::exterior::is_decomposable;
use polysymp::hamvec::{construct_decomposition, verify_hamvec};
use polysymp::hjt::{
    check_t_conditions, hj_residual, kg_s_family, no_go_probe, KgFoliation, QuadraticPotential, SFamily, TMap, Verdict,
};
use polysymp::phase_space::{energy_function, Polynomial};
use polysymp::{GradedBasis, Metric, Multivector, PhasePoint, PhaseSpaceShape, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, GridConfig, Kind};
use crate::report::{Artifact, CheckResult, RunReport};
use crate::CliError;

pub struct Outcome {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
}

struct Parts {
    results: Vec<CheckResult>,
    details: Value,
    artifacts: Vec<Artifact>,
}

impl From<polysymp::Error> for CliError {
    fn from(e: polysymp::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

/// Runs a resolved config. Deterministic for a given config and seed.
pub fn run(config: ExperimentConfig) -> Result<Outcome, CliError> {
    let kind = config.kind.expect("config is resolved");
    let parts = match kind {
        Kind::VerifyHamvec => verify_hamvec_run(&config)?,
        Kind::RunKg => run_kg(&config)?,
        Kind::Prop2 => lift_run(&config)?,
        Kind::CheckHj => check_hj(&config)?,
        Kind::NoGo => no_go(&config)?,
        Kind::Decompose => decompose(&config)?,
    };
    Ok(Outcome {
        report: RunReport::new(config, parts.results, parts.details),
        artifacts: parts.artifacts,
    })
}

fn rng(config: &ExperimentConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed)
}

fn uniform(rng: &mut ChaCha8Rng, len: usize, half_width: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-half_width..=half_width)).collect()
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Observed orders between successive resolutions.
fn orders(resolutions: &[usize], errors: &[f64]) -> Vec<f64> {
    resolutions
        .windows(2)
        .zip(errors.windows(2))
        .map(|(n, e)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect()
}

fn verify_hamvec_run(config: &ExperimentConfig) -> Result<Parts, CliError> {
    let s = config.shape.expect("resolved");
    let shape = PhaseSpaceShape::reduced(s.n, s.fibre)?;
    let tol = config.tolerance("residual");
    let mut rng = rng(config);
    let mut jobs = Vec::new();
    let mut fields = Vec::new();
    for h in 0..config.hamiltonians.unwrap() {
        let poly = Polynomial::random(shape.dim(), config.degree.unwrap(), config.terms.unwrap(), &mut rng);
        let field = energy_function(&poly.to_field(shape)?)?;
        for i in 0..config.points.unwrap() {
            let c = uniform(&mut rng, field.shape().dim(), 1.0);
            jobs.push((h, i, PhasePoint::from_coords(*field.shape(), &c)?));
        }
        fields.push(field);
    }
    let reports = jobs
        .par_iter()
        .map(|(h, _, at)| {
            let x = construct_decomposition(&fields[*h], at, None)?.wedge()?;
            verify_hamvec(&x, &fields[*h], at)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let results = jobs
        .iter()
        .zip(&reports)
        .map(|((h, i, _), r)| CheckResult::below(format!("hamiltonian-{h}/point-{i}"), r.max_abs, tol))
        .collect();
    let families = ["field", "momentum", "horizontal", "energy"];
    let mut worst = [0.0_f64; 4];
    for r in &reports {
        let f = &r.per_family;
        for (w, v) in worst.iter_mut().zip([f.field, f.momentum, f.horizontal, f.energy]) {
            *w = w.max(v);
        }
    }
    let per_family: serde_json::Map<String, Value> =
        families.iter().zip(worst).map(|(k, v)| (k.to_string(), json!(v))).collect();
    Ok(Parts {
        results,
        details: json!({
            "max_residual": max_of(reports.iter().map(|r| r.max_abs)),
            "max_per_family": per_family,
        }),
        artifacts: Vec::new(),
    })
}

/// Plane-wave run of the 1+1 Klein–Gordon equation at one resolution.
struct WaveRun {
    params: KGParams,
    wave: PlaneWave,
    sol: FieldSolution,
    level: usize,
}

fn wave_run(config: &ExperimentConfig, nx: usize, extra_levels: usize) -> Result<WaveRun, CliError> {
    let g: &GridConfig = config.grid.as_ref().expect("resolved");
    let params = KGParams::new(2, config.mass.unwrap()).map_err(|e| CliError::Config(e.to_string()))?;
    let w = config.wave.as_ref().expect("resolved");
    let k: Vec<f64> = w.modes.iter().map(|m| TAU * m / g.length).collect();
    let wave = PlaneWave::new(&params, w.amplitude, k)?;
    let dx = g.dx(nx);
    let dt = g.courant * dx;
    let bound = stability_bound(&params, dx)?;
    if dt > bound {
        return Err(CliError::Config(format!("dt = {dt} at nx = {nx} exceeds the stability bound {bound}")));
    }
    let level = g.steps(nx);
    let grid = GridSpec::new(g.length, nx, dt, level + extra_levels).map_err(|e| CliError::Config(e.to_string()))?;
    let init = InitialData::from_fn(&grid, |x| wave.value(&[0.0, x]), |x| wave.gradient(&[0.0, x])[0]);
    let sol = integrate_kg(&params, &init, &grid)?;
    Ok(WaveRun {
        params,
        wave,
        sol,
        level,
    })
}

fn csv_artifact(sol: &FieldSolution) -> Result<Artifact, CliError> {
    let mut bytes = Vec::new();
    sol.write_csv(&mut bytes).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(Artifact {
        suffix: format!(".nx{}.csv", sol.nx()),
        bytes,
    })
}

fn run_kg(config: &ExperimentConfig) -> Result<Parts, CliError> {
    let resolutions = config.resolutions.clone().expect("resolved");
    let mut errors = Vec::new();
    let mut artifacts = Vec::new();
    let mut results = Vec::new();
    for &nx in &resolutions {
        let r = wave_run(config, nx, 0)?;
        let g = *r.sol.grid();
        let err = max_of((0..nx).map(|j| (r.sol.phi(r.level, j) - r.wave.value(&[g.t(r.level), g.x(j)])).abs()));
        results.push(CheckResult::below(format!("error/nx{nx}"), err, config.tolerance("error")));
        errors.push(err);
        artifacts.push(csv_artifact(&r.sol)?);
    }
    let ord = orders(&resolutions, &errors);
    let order = ord.iter().copied().fold(f64::INFINITY, f64::min);
    if !ord.is_empty() {
        results.push(CheckResult::at_least("convergence-order", order, config.tolerance("order")));
    }
    Ok(Parts {
        results,
        details: json!({
            "resolutions": resolutions,
            "errors": errors,
            "orders": ord,
            "convergence_order": if ord.is_empty() { Value::Null } else { json!(order) },
        }),
        artifacts,
    })
}

fn lift_run(config: &ExperimentConfig) -> Result<Parts, CliError> {
    let resolutions = config.resolutions.clone().expect("resolved");
    let (mut residuals, mut involutivity, mut sections) = (Vec::new(), Vec::new(), Vec::new());
    let mut results = Vec::new();
    for &nx in &resolutions {
        let r = wave_run(config, nx, 3)?;
        if r.level < 2 {
            return Err(CliError::Config("the run needs at least 2 steps".into()));
        }
        let hh = kg_dw_hamiltonian(&r.params);
        let h = energy_function(&hh)?;
        let sol = Arc::new(r.sol);
        let prop = (0..nx)
            .into_par_iter()
            .map(|j| verify_prop2(&sol, r.level, j, &hh).map(|p| p.residual.max_abs))
            .collect::<Result<Vec<_>, _>>()?;
        let section = (1..sol.nt() - 1)
            .into_par_iter()
            .map(|k| {
                (0..nx)
                    .map(|j| Ok(h.value(&sol.section_point(k, j)?)?.abs()))
                    .collect::<Result<Vec<f64>, polysymp::Error>>()
                    .map(max_of)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let invol = (0..nx)
            .into_par_iter()
            .map(|j| lift_involutivity(&sol, r.level, j, f64::INFINITY).map(|i| i.residual))
            .collect::<Result<Vec<_>, _>>()?;
        let (p, s, i) = (max_of(prop), max_of(section), max_of(invol));
        results.push(CheckResult::below(format!("section-hamiltonian/nx{nx}"), s, config.tolerance("section")));
        residuals.push(p);
        sections.push(s);
        involutivity.push(i);
    }
    let ord = orders(&resolutions, &residuals);
    let inv_ord = orders(&resolutions, &involutivity);
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    if !ord.is_empty() {
        results.push(CheckResult::at_least("lift-residual-order", min(&ord), config.tolerance("order")));
        results.push(CheckResult::at_least(
            "involutivity-order",
            min(&inv_ord),
            config.tolerance("involutivity_order"),
        ));
    }
    Ok(Parts {
        results,
        details: json!({
            "resolutions": resolutions,
            "lift_residuals": residuals,
            "lift_orders": ord,
            "involutivity_residuals": involutivity,
            "involutivity_orders": inv_ord,
            "max_section_hamiltonian": sections,
        }),
        artifacts: Vec::new(),
    })
}

fn check_hj(config: &ExperimentConfig) -> Result<Parts, CliError> {
    let n = config.shape.expect("resolved").n;
    let params = KGParams::new(n, config.mass.unwrap()).map_err(|e| CliError::Config(e.to_string()))?;
    let w = config.wave.as_ref().expect("resolved");
    let length = config.grid.as_ref().map_or(TAU, |g| g.length);
    let k: Vec<f64> = w.modes.iter().map(|m| TAU * m / length).collect();
    let wave: Arc<dyn FieldModel> = Arc::new(PlaneWave::new(&params, w.amplitude, k)?);
    let s = kg_s_family(&params, Arc::clone(&wave))?;
    let hh = kg_dw_hamiltonian(&params);
    let mut rng = rng(config);
    let points = config.points.unwrap();

    let mut hj = Vec::with_capacity(points);
    for _ in 0..points {
        let mut at = uniform(&mut rng, n, length / 2.0);
        at.push(wave.value(&at));
        hj.push(hj_residual(&s, &hh, &at)?);
    }
    let mut results = vec![CheckResult::below("hj-plane-wave", max_of(hj.iter().copied()), config.tolerance("hj"))];

    let mut compat = 0.0_f64;
    let reduced = PhaseSpaceShape::reduced(n, 1)?;
    let zero = ScalarField::new(reduced, |_| 0.0);
    for _ in 0..points.div_ceil(10) {
        let polys = (0..n).map(|_| Polynomial::random(n + 1, 4, 10, &mut rng)).collect();
        let family = SFamily::from_polynomials(n, 1, polys)?;
        let t = TMap::from_s_family(&family);
        for _ in 0..10 {
            let at = uniform(&mut rng, n + 1, 1.0);
            compat = compat.max(check_t_conditions(&t, &zero, &at)?.compatibility);
        }
    }
    results.push(CheckResult::below("gradient-compatibility", compat, config.tolerance("compatibility")));

    let mut grid_details = Vec::new();
    if let (Some(_), Some(resolutions)) = (&config.grid, &config.resolutions) {
        let psi: Arc<dyn FieldModel> = Arc::new(PlaneWave::new(&params, 1.0, vec![0.0])?);
        for &nx in resolutions {
            let r = wave_run(config, nx, 1)?;
            if r.level < 1 {
                return Err(CliError::Config("the run needs at least 1 step".into()));
            }
            let dx = r.sol.grid().dx();
            let mut worst = 0.0_f64;
            for j in (0..nx).step_by((nx / 8).max(1)) {
                let jet = r.sol.second_jet(r.level, j)?;
                let x = jet.x.clone();
                let fol = KgFoliation::new(&params, Arc::new(TaylorModel::new(jet)?), Arc::clone(&psi))?;
                let (t, h_adapted) = (fol.t_map(), fol.dw_hamiltonian());
                // adapted fibre coordinate s, with v = Φ + sΨ
                for s in [-1.0, 0.0, 1.0] {
                    let c = check_t_conditions(&t, &h_adapted, &[x[0], x[1], s])?;
                    worst = worst.max(c.max());
                }
            }
            let ratio = worst / (dx * dx);
            results.push(CheckResult::below(format!("t-conditions/nx{nx}"), ratio, config.tolerance("t_factor")));
            grid_details.push(json!({ "nx": nx, "max_residual": worst, "over_dx2": ratio }));
        }
    }
    Ok(Parts {
        results,
        details: json!({
            "max_hj_residual": max_of(hj),
            "max_compatibility": compat,
            "grid": grid_details,
        }),
        artifacts: Vec::new(),
    })
}

fn no_go(config: &ExperimentConfig) -> Result<Parts, CliError> {
    let shapes: Vec<(usize, usize)> = match config.shape {
        Some(s) => vec![(s.n, s.fibre)],
        None => (1..=3).flat_map(|n| (1..=2).map(move |f| (n, f))).collect(),
    };
    let mut rng = rng(config);
    let every = config.critical_every.unwrap();
    let mut jobs = Vec::new();
    for &(n, nf) in &shapes {
        let shape = PhaseSpaceShape::reduced(n, nf).map_err(|e| CliError::Config(e.to_string()))?;
        for trial in 0..config.potentials.unwrap() {
            let pot = QuadraticPotential::random(n, nf, &mut rng);
            let v = if trial % every == 0 {
                pot.critical_point()?
            } else {
                uniform(&mut rng, nf, 2.0)
            };
            let x = uniform(&mut rng, n, 1.0);
            let p = uniform(&mut rng, n * nf, 1.0);
            jobs.push((n, nf, trial, pot.to_field(shape)?, PhasePoint::new(shape, x, v, p, None)?));
        }
    }
    let reports = jobs
        .par_iter()
        .map(|(n, nf, _, v, at)| no_go_probe(v, &Metric::minkowski(*n), &Metric::euclidean(*nf), at))
        .collect::<Result<Vec<_>, _>>()?;
    let floor = config.tolerance("inconsistent_residual");
    let mut counts = [0usize; 3];
    let results = jobs
        .iter()
        .zip(&reports)
        .map(|((n, nf, trial, _, _), r)| {
            counts[r.verdict as usize] += 1;
            let pass = r.agrees && (r.predicted_consistent || r.residual >= floor);
            CheckResult {
                name: format!("n{n}-N{nf}/{trial}"),
                residual: r.residual,
                pass,
            }
        })
        .collect();
    Ok(Parts {
        results,
        details: json!({
            "verdicts": {
                "consistent": counts[Verdict::Consistent as usize],
                "inconsistent": counts[Verdict::Inconsistent as usize],
                "indeterminate": counts[Verdict::Indeterminate as usize],
            },
            "probes": reports,
        }),
        artifacts: Vec::new(),
    })
}

fn decompose(config: &ExperimentConfig) -> Result<Parts, CliError> {
    let mv = config.multivector.as_ref().expect("resolved");
    let basis = GradedBasis::plain(mv.dim);
    let x = Multivector::from_terms(&basis, mv.grade, mv.terms.iter().map(|t| (t.indices.clone(), t.coefficient)))
        .map_err(|e| CliError::Config(e.to_string()))?;
    if x.is_zero() {
        return Err(CliError::Config("the multivector is zero".into()));
    }
    let r = is_decomposable(&x)?;
    let mut results = Vec::new();
    if let Some(expected) = config.expect_decomposable {
        results.push(CheckResult {
            name: "decomposable".into(),
            residual: if r.decomposable == expected { 0.0 } else { 1.0 },
            pass: r.decomposable == expected,
        });
    }
    if let Some(factors) = &r.factors {
        let rebuilt = Multivector::wedge_all(&basis, factors)?.scale(r.scale);
        let err = rebuilt.sub(&x)?.max_abs() / x.max_abs();
        results.push(CheckResult::below("reconstruction", err, config.tolerance("reconstruction")));
    }
    Ok(Parts {
        results,
        details: serde_json::to_value(r.summary(mv.grade)).map_err(|e| CliError::Internal(e.to_string()))?,
        artifacts: Vec::new(),
    })
}
