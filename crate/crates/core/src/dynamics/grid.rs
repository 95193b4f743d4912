//! Staggered leapfrog evolution of the 1+1 Klein–Gordon system and the
//! sampled solutions it produces.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::kg::KGParams;
use super::model::FieldJet;
use crate::error::{Error, Result};
use crate::phase_space::PhasePoint;

/// Uniform periodic lattice `x_j = j Δx` on `[0, length)`, `t_k = k Δt` for
/// `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub length: f64,
    pub nx: usize,
    pub dt: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn new(length: f64, nx: usize, dt: f64, steps: usize) -> Result<Self> {
        let g = Self {
            length,
            nx,
            dt,
            steps,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidInput(format!("grid length must be positive, got {}", self.length)));
        }
        if self.nx < 3 {
            return Err(Error::InvalidInput(format!("need at least 3 spatial nodes, got {}", self.nx)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidInput(format!("time step must be positive, got {}", self.dt)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    /// Number of stored time levels.
    pub fn nt(&self) -> usize {
        self.steps + 1
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }
}

/// Field value and time momentum `π^t` on the initial slice.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub phi: Vec<f64>,
    pub pi: Vec<f64>,
}

impl InitialData {
    pub fn from_fn(grid: &GridSpec, phi: impl Fn(f64) -> f64, pi: impl Fn(f64) -> f64) -> Self {
        let xs: Vec<f64> = (0..grid.nx).map(|j| grid.x(j)).collect();
        Self {
            phi: xs.iter().map(|&x| phi(x)).collect(),
            pi: xs.iter().map(|&x| pi(x)).collect(),
        }
    }

    /// `φ = f(x - t)` for the massless field in Minkowski signature.
    pub fn pulse(grid: &GridSpec, f: impl Fn(f64) -> f64, f_prime: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, f, |x| -f_prime(x))
    }
}

/// A Klein–Gordon field sampled on a 1+1 lattice: `φ`, `π^μ = g^{μν}∂_νφ`
/// and the DW energy `-𝓗` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution {
    params: KGParams,
    grid: GridSpec,
    phi: Vec<f64>,
    pi_t: Vec<f64>,
    pi_x: Vec<f64>,
    energy: Vec<f64>,
}

/// Largest stable leapfrog step: `Δt ≤ 2 / sqrt(4c²/Δx² + m²/g^{tt})`.
pub fn stability_bound(params: &KGParams, dx: f64) -> Result<f64> {
    let (gtt, gxx) = time_space_inverse(params)?;
    let c2 = -gxx / gtt;
    let m2 = params.mass * params.mass / gtt;
    Ok(2.0 / (4.0 * c2 / (dx * dx) + m2).sqrt())
}

fn time_space_inverse(params: &KGParams) -> Result<(f64, f64)> {
    if params.n != 2 {
        return Err(Error::InvalidShape(format!(
            "grid evolution needs n = 2, got n = {}",
            params.n
        )));
    }
    let (gtt, gxx) = (params.metric.inverse_entry(0), params.metric.inverse_entry(1));
    if !(gtt > 0.0 && gxx < 0.0) {
        return Err(Error::InvalidMetric("evolution needs signature (+, -)".into()));
    }
    Ok((gtt, gxx))
}

/// Evolves `∂_t φ = g_{tt} π^t`, `∂_t π^t = -m²φ - ∂_x π^x` with a
/// kick-drift-kick leapfrog on a periodic lattice.
pub fn integrate_kg(params: &KGParams, initial: &InitialData, grid: &GridSpec) -> Result<FieldSolution> {
    grid.validate()?;
    let (gtt, gxx) = time_space_inverse(params)?;
    let nx = grid.nx;
    for len in [initial.phi.len(), initial.pi.len()] {
        if len != nx {
            return Err(Error::DimensionMismatch {
                expected: nx,
                found: len,
            });
        }
    }
    let bound = stability_bound(params, grid.dx())?;
    if grid.dt > bound * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt: grid.dt, bound });
    }

    let dt = grid.dt;
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    let m2 = params.mass * params.mass;
    let accel = |phi: &[f64], out: &mut [f64]| {
        for j in 0..nx {
            let lap = (phi[(j + 1) % nx] - 2.0 * phi[j] + phi[(j + nx - 1) % nx]) * inv_dx2;
            out[j] = (-gxx * lap - m2 * phi[j]) / gtt;
        }
    };

    let nt = grid.nt();
    let mut phi = Vec::with_capacity(nt * nx);
    let mut vel = Vec::with_capacity(nt * nx);
    phi.extend_from_slice(&initial.phi);
    let mut u: Vec<f64> = initial.pi.iter().map(|p| p / gtt).collect();
    vel.extend_from_slice(&u);

    let mut a = vec![0.0; nx];
    accel(&initial.phi, &mut a);
    for (uj, aj) in u.iter_mut().zip(&a) {
        *uj += 0.5 * dt * aj;
    }
    let mut current = initial.phi.clone();
    for _ in 0..grid.steps {
        for (p, uj) in current.iter_mut().zip(&u) {
            *p += dt * uj;
        }
        accel(&current, &mut a);
        // node velocity is the mean of the two neighbouring half steps
        let next: Vec<f64> = u.iter().zip(&a).map(|(uj, aj)| uj + dt * aj).collect();
        vel.extend(u.iter().zip(&next).map(|(lo, hi)| 0.5 * (lo + hi)));
        phi.extend_from_slice(&current);
        u = next;
    }

    let pi_t = vel.iter().map(|v| gtt * v).collect();
    Ok(FieldSolution::assemble(params.clone(), *grid, phi, pi_t, None))
}

impl FieldSolution {
    /// Fills every node of the lattice from closures of `(t, x)`. Spatial
    /// momenta default to `g^{xx}` times the central difference of `φ`.
    pub fn from_fn(
        params: &KGParams,
        grid: &GridSpec,
        phi: impl Fn(f64, f64) -> f64,
        pi: impl Fn(f64, f64) -> [f64; 2],
    ) -> Result<Self> {
        grid.validate()?;
        if params.n != 2 {
            return Err(Error::InvalidShape(format!("lattice solutions need n = 2, got {}", params.n)));
        }
        let mut phis = Vec::with_capacity(grid.nt() * grid.nx);
        let mut pt = Vec::with_capacity(grid.nt() * grid.nx);
        let mut px = Vec::with_capacity(grid.nt() * grid.nx);
        for k in 0..grid.nt() {
            for j in 0..grid.nx {
                let (t, x) = (grid.t(k), grid.x(j));
                let p = pi(t, x);
                phis.push(phi(t, x));
                pt.push(p[0]);
                px.push(p[1]);
            }
        }
        Ok(Self::assemble(params.clone(), *grid, phis, pt, Some(px)))
    }

    fn assemble(
        params: KGParams,
        grid: GridSpec,
        phi: Vec<f64>,
        pi_t: Vec<f64>,
        pi_x: Option<Vec<f64>>,
    ) -> Self {
        let nx = grid.nx;
        let gxx = params.metric.inverse_entry(1);
        let dx = grid.dx();
        let pi_x = pi_x.unwrap_or_else(|| {
            (0..phi.len())
                .map(|i| {
                    let (row, j) = (i - i % nx, i % nx);
                    gxx * (phi[row + (j + 1) % nx] - phi[row + (j + nx - 1) % nx]) / (2.0 * dx)
                })
                .collect()
        });
        let energy = (0..phi.len())
            .map(|i| -params.hamiltonian(phi[i], &[pi_t[i], pi_x[i]]))
            .collect();
        Self {
            params,
            grid,
            phi,
            pi_t,
            pi_x,
            energy,
        }
    }

    pub fn params(&self) -> &KGParams {
        &self.params
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn nt(&self) -> usize {
        self.grid.nt()
    }

    pub fn nx(&self) -> usize {
        self.grid.nx
    }

    fn idx(&self, k: usize, j: usize) -> usize {
        k * self.grid.nx + j % self.grid.nx
    }

    pub fn phi(&self, k: usize, j: usize) -> f64 {
        self.phi[self.idx(k, j)]
    }

    /// `π^μ` at a node, `μ = 0` is time.
    pub fn pi(&self, k: usize, j: usize) -> [f64; 2] {
        let i = self.idx(k, j);
        [self.pi_t[i], self.pi_x[i]]
    }

    pub fn energy(&self, k: usize, j: usize) -> f64 {
        self.energy[self.idx(k, j)]
    }

    /// Interior time levels admit a centred time stencil.
    pub fn check_interior(&self, k: usize, j: usize, margin: usize) -> Result<()> {
        if k < margin || k + margin >= self.nt() || j >= self.nx() {
            return Err(Error::BoundaryNode { time: k, space: j });
        }
        Ok(())
    }

    /// `γ(x) = (x, φ, π, -𝓗)` at a node.
    pub fn section_point(&self, k: usize, j: usize) -> Result<PhasePoint> {
        if k >= self.nt() || j >= self.nx() {
            return Err(Error::BoundaryNode { time: k, space: j });
        }
        PhasePoint::new(
            self.params.shape().with_extended(true),
            vec![self.grid.t(k), self.grid.x(j)],
            vec![self.phi(k, j)],
            self.pi(k, j).to_vec(),
            Some(self.energy(k, j)),
        )
    }

    /// Central difference of a node quantity in direction `mu`.
    pub(crate) fn central<F: Fn(usize, usize) -> f64>(&self, f: F, k: usize, j: usize, mu: usize) -> f64 {
        let nx = self.nx();
        match mu {
            0 => (f(k + 1, j) - f(k - 1, j)) / (2.0 * self.grid.dt),
            _ => (f(k, (j + 1) % nx) - f(k, (j + nx - 1) % nx)) / (2.0 * self.grid.dx()),
        }
    }

    /// Value, gradient and Hessian of `φ` from centred differences.
    pub fn second_jet(&self, k: usize, j: usize) -> Result<FieldJet> {
        self.check_interior(k, j, 1)?;
        let nx = self.nx();
        let (jp, jm) = ((j + 1) % nx, (j + nx - 1) % nx);
        let (dt, dx) = (self.grid.dt, self.grid.dx());
        let f = |a: usize, b: usize| self.phi(a, b);
        let c = f(k, j);
        let tt = (f(k + 1, j) - 2.0 * c + f(k - 1, j)) / (dt * dt);
        let xx = (f(k, jp) - 2.0 * c + f(k, jm)) / (dx * dx);
        let tx = (f(k + 1, jp) - f(k + 1, jm) - f(k - 1, jp) + f(k - 1, jm)) / (4.0 * dt * dx);
        Ok(FieldJet {
            x: vec![self.grid.t(k), self.grid.x(j)],
            value: c,
            gradient: vec![self.central(f, k, j, 0), self.central(f, k, j, 1)],
            hessian: vec![vec![tt, tx], vec![tx, xx]],
        })
    }

    /// Discrete `∂_μ π^μ + ∂_v 𝓗` at an interior node.
    pub fn divergence_defect(&self, k: usize, j: usize) -> Result<f64> {
        self.check_interior(k, j, 1)?;
        let div = self.central(|a, b| self.pi(a, b)[0], k, j, 0)
            + self.central(|a, b| self.pi(a, b)[1], k, j, 1);
        Ok(div + self.params.mass * self.params.mass * self.phi(k, j))
    }

    /// Writes `t,x,phi,pi_t,pi_x,energy`, one row per node.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,x,phi,pi_t,pi_x,energy")?;
        for k in 0..self.nt() {
            for j in 0..self.nx() {
                let [pt, px] = self.pi(k, j);
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    self.grid.t(k),
                    self.grid.x(j),
                    self.phi(k, j),
                    pt,
                    px,
                    self.energy(k, j)
                )?;
            }
        }
        Ok(())
    }
}
