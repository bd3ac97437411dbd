//! Classical Navier-Stokes-Fourier system, the `tau -> 0` limit:
//!
//! ```text
//! v_t = u_x
//! u_t + p_x = (mu u_x / v)_x
//! C_v theta_t + R theta u_x / v = (kappa(theta) theta_x / v)_x + mu u_x^2 / v
//! ```
//!
//! with `u = 0` and `theta_x = 0` on both ends. Viscous stress and heat flux
//! are evaluated at half nodes; the heating term averages the half-node
//! dissipation to the nodes, which keeps total energy exactly conserved by
//! the semi-discrete system.

use serde::{Deserialize, Serialize};

use crate::constitutive::PhysParams;
use crate::error::{Error, Gate, Result};
use crate::grid::Grid;
use crate::state::State;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub t: f64,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
}

impl ClassicalState {
    pub fn equilibrium(len: usize) -> Self {
        ClassicalState { t: 0.0, v: vec![1.0; len], u: vec![0.0; len], theta: vec![1.0; len] }
    }

    /// The `(v, u, theta)` part of a relaxed state.
    pub fn from_relaxed(s: &State) -> Self {
        ClassicalState { t: s.t, v: s.fields.v.clone(), u: s.fields.u.clone(), theta: s.fields.theta.clone() }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    fn axpy(&mut self, a: f64, r: &Rates) {
        for (x, d) in self.v.iter_mut().zip(&r.v) {
            *x += a * d;
        }
        for (x, d) in self.u.iter_mut().zip(&r.u) {
            *x += a * d;
        }
        for (x, d) in self.theta.iter_mut().zip(&r.theta) {
            *x += a * d;
        }
    }

    fn check(&self) -> Result<()> {
        for i in 0..self.len() {
            if !(self.v[i] > 0.0) || !self.v[i].is_finite() {
                return Err(Error::Inadmissible { node: Some(i), gate: Gate::SpecificVolume });
            }
            if !(self.theta[i] > 0.0) || !self.theta[i].is_finite() {
                return Err(Error::Inadmissible { node: Some(i), gate: Gate::Temperature });
            }
            if !self.u[i].is_finite() {
                return Err(Error::Numerical("non-finite velocity".into()));
            }
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, o: &ClassicalState) -> f64 {
        [(&self.v, &o.v), (&self.u, &o.u), (&self.theta, &o.theta)]
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Time derivatives of `(v, u, theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
}

impl Rates {
    fn zeros(n: usize) -> Self {
        Rates { v: vec![0.0; n], u: vec![0.0; n], theta: vec![0.0; n] }
    }

    fn add(&mut self, o: &Rates) {
        for (a, b) in [(&mut self.v, &o.v), (&mut self.u, &o.u), (&mut self.theta, &o.theta)] {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

fn admissible(s: &ClassicalState) -> Result<()> {
    s.check()
}

/// Half-node diffusivities `mu / v` and `kappa(theta) / (C_v v)` with
/// arithmetic means for `v` and `theta`.
fn half_coeffs(s: &ClassicalState, pp: &PhysParams) -> (Vec<f64>, Vec<f64>) {
    let n = s.len() - 1;
    let mut visc = Vec::with_capacity(n);
    let mut cond = Vec::with_capacity(n);
    for i in 0..n {
        let vh = 0.5 * (s.v[i] + s.v[i + 1]);
        let th = 0.5 * (s.theta[i] + s.theta[i + 1]);
        visc.push(pp.mu / vh);
        cond.push(pp.kappa.value(th) / (pp.cv * vh));
    }
    (visc, cond)
}

/// Explicit (transport and heating) and diffusive parts of the rates.
fn split_rates(grid: &Grid, s: &ClassicalState, pp: &PhysParams) -> Result<(Rates, Rates)> {
    admissible(s)?;
    let n = s.len();
    let last = n - 1;
    let dx = grid.dx();
    let p: Vec<f64> = s.theta.iter().zip(&s.v).map(|(t, v)| pp.r * t / v).collect();
    let dp = grid.sbp_d1_vec(&p);
    let du = grid.sbp_d1_vec(&s.u);
    let (visc, cond) = half_coeffs(s, pp);

    // half-node stress, heat flux and dissipation
    let mut sigma = vec![0.0; last];
    let mut flux = vec![0.0; last];
    let mut heat = vec![0.0; last];
    for h in 0..last {
        let gu = (s.u[h + 1] - s.u[h]) / dx;
        sigma[h] = visc[h] * gu;
        flux[h] = cond[h] * (s.theta[h + 1] - s.theta[h]) / dx;
        heat[h] = sigma[h] * gu;
    }

    let mut ex = Rates::zeros(n);
    let mut im = Rates::zeros(n);
    for i in 0..n {
        ex.v[i] = du[i];
        let heating = if i == 0 {
            heat[0]
        } else if i == last {
            heat[last - 1]
        } else {
            0.5 * (heat[i - 1] + heat[i])
        };
        ex.theta[i] = (heating - p[i] * du[i]) / pp.cv;
        if i == 0 {
            im.theta[i] = 2.0 * flux[0] / dx;
        } else if i == last {
            im.theta[i] = -2.0 * flux[last - 1] / dx;
        } else {
            ex.u[i] = -dp[i];
            im.u[i] = (sigma[i] - sigma[i - 1]) / dx;
            im.theta[i] = (flux[i] - flux[i - 1]) / dx;
        }
    }
    Ok((ex, im))
}

/// Rates of the classical system.
pub fn classical_rhs(grid: &Grid, s: &ClassicalState, pp: &PhysParams) -> Result<Rates> {
    let (mut ex, im) = split_rates(grid, s, pp)?;
    ex.add(&im);
    Ok(ex)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    /// safety factor on the stable explicit step
    pub cfl: f64,
    /// treat viscosity and conduction implicitly (tridiagonal solves)
    pub implicit_diffusion: bool,
    pub t_end: f64,
    pub cadence: Option<f64>,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig { cfl: 0.5, implicit_diffusion: false, t_end: 1.0, cadence: None }
    }
}

/// Stable step for the explicit or the implicit-diffusion scheme.
pub fn classical_dt(grid: &Grid, s: &ClassicalState, pp: &PhysParams, cfg: &LimitConfig) -> f64 {
    let dx = grid.dx();
    let gamma = 1.0 + pp.r / pp.cv;
    let mut dt_sound = f64::INFINITY;
    let mut dt_diff = f64::INFINITY;
    for i in 0..s.len() {
        let c = (gamma * pp.r * s.theta[i]).sqrt() / s.v[i];
        dt_sound = dt_sound.min(dx / c);
        let k = pp.kappa.value(s.theta[i]);
        dt_diff = dt_diff.min(0.5 * dx * dx * (pp.cv * s.v[i] / k).min(s.v[i] / pp.mu));
    }
    if cfg.implicit_diffusion {
        cfg.cfl * dt_sound
    } else {
        cfg.cfl * dt_sound.min(dt_diff)
    }
}

/// Thomas algorithm for `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`.
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) {
    let n = d.len();
    let mut cp = vec![0.0; n];
    let mut beta = b[0];
    cp[0] = c[0] / beta;
    d[0] /= beta;
    for i in 1..n {
        beta = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / beta;
        d[i] = (d[i] - a[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= cp[i] * d[i + 1];
    }
}

/// Solve `Y = hat + c * diffusion(Y)`; the conductivity is refreshed by a
/// couple of fixed-point sweeps.
fn diffusion_solve(grid: &Grid, hat: &ClassicalState, pp: &PhysParams, c: f64) -> ClassicalState {
    let n = hat.len();
    let last = n - 1;
    let r = c / (grid.dx() * grid.dx());
    let mut y = hat.clone();

    let (visc, _) = half_coeffs(hat, pp);
    // interior velocity unknowns 1..last-1
    let m = last - 1;
    let (mut a, mut b, mut cc) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut d: Vec<f64> = hat.u[1..last].to_vec();
    for k in 0..m {
        let i = k + 1;
        let (wl, wr) = (visc[i - 1], visc[i]);
        a[k] = -r * wl;
        b[k] = 1.0 + r * (wl + wr);
        cc[k] = -r * wr;
    }
    thomas(&a, &b, &cc, &mut d);
    y.u[1..last].copy_from_slice(&d);

    for _ in 0..2 {
        let (_, cond) = half_coeffs(&y, pp);
        let (mut a, mut b, mut cc) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut d = hat.theta.clone();
        b[0] = 1.0 + 2.0 * r * cond[0];
        cc[0] = -2.0 * r * cond[0];
        for i in 1..last {
            a[i] = -r * cond[i - 1];
            b[i] = 1.0 + r * (cond[i - 1] + cond[i]);
            cc[i] = -r * cond[i];
        }
        a[last] = -2.0 * r * cond[last - 1];
        b[last] = 1.0 + 2.0 * r * cond[last - 1];
        thomas(&a, &b, &cc, &mut d);
        y.theta = d;
    }
    y
}

fn diffusion_rates(y: &ClassicalState, hat: &ClassicalState, c: f64) -> Rates {
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) / c).collect();
    Rates { v: vec![0.0; y.len()], u: diff(&y.u, &hat.u), theta: diff(&y.theta, &hat.theta) }
}

fn pin(s: &mut ClassicalState) {
    let last = s.len() - 1;
    s.u[0] = 0.0;
    s.u[last] = 0.0;
}

/// One step: Heun by default, the IMEX scheme of the relaxed solver with
/// diffusion implicit otherwise.
pub fn classical_step(grid: &Grid, s: &ClassicalState, pp: &PhysParams, dt: f64, implicit: bool) -> Result<ClassicalState> {
    if !implicit {
        let k1 = classical_rhs(grid, s, pp)?;
        let mut y = s.clone();
        y.axpy(dt, &k1);
        pin(&mut y);
        let k2 = classical_rhs(grid, &y, pp)?;
        let mut next = s.clone();
        next.axpy(0.5 * dt, &k1);
        next.axpy(0.5 * dt, &k2);
        pin(&mut next);
        next.t = s.t + dt;
        next.check()?;
        return Ok(next);
    }
    let g = (3.0 + 3f64.sqrt()) / 6.0;
    let c = g * dt;
    let (e1, _) = split_rates(grid, s, pp)?;

    let mut hat2 = s.clone();
    hat2.axpy(dt * g, &e1);
    admissible(&hat2)?;
    let y2 = diffusion_solve(grid, &hat2, pp, c);
    let k2 = diffusion_rates(&y2, &hat2, c);
    let (e2, _) = split_rates(grid, &y2, pp)?;

    let mut hat3 = s.clone();
    hat3.axpy(dt * (g - 1.0), &e1);
    hat3.axpy(dt * 2.0 * (1.0 - g), &e2);
    hat3.axpy(dt * (1.0 - 2.0 * g), &k2);
    admissible(&hat3)?;
    let y3 = diffusion_solve(grid, &hat3, pp, c);
    let k3 = diffusion_rates(&y3, &hat3, c);
    let (e3, _) = split_rates(grid, &y3, pp)?;

    let mut next = s.clone();
    for r in [&e2, &e3, &k2, &k3] {
        next.axpy(0.5 * dt, r);
    }
    pin(&mut next);
    next.t = s.t + dt;
    next.check()?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTrajectory {
    pub state: ClassicalState,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
}

/// Advance to `cfg.t_end`, calling `observe` at the start and at every
/// output time.
pub fn classical_integrate(
    grid: &Grid,
    initial: &ClassicalState,
    pp: &PhysParams,
    cfg: &LimitConfig,
    observe: &mut dyn FnMut(&ClassicalState) -> Result<()>,
) -> Result<ClassicalTrajectory> {
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(Error::Config(format!("cfl must lie in (0, 1], got {}", cfg.cfl)));
    }
    if !(cfg.t_end >= 0.0 && cfg.t_end.is_finite()) {
        return Err(Error::Config(format!("t_end must be nonnegative, got {}", cfg.t_end)));
    }
    initial.check()?;
    let mut outs = Vec::new();
    if let Some(c) = cfg.cadence {
        let mut k = 1;
        while (k as f64) * c < cfg.t_end * (1.0 - 1e-12) {
            outs.push(k as f64 * c);
            k += 1;
        }
    }
    if cfg.t_end > 0.0 {
        outs.push(cfg.t_end);
    }
    let mut s = initial.clone();
    observe(&s)?;
    let (mut steps, mut dt_min, mut dt_max) = (0, f64::INFINITY, 0.0f64);
    for t_out in outs {
        let t_out = initial.t + t_out;
        while s.t < t_out {
            let dt0 = classical_dt(grid, &s, pp, cfg);
            let remaining = t_out - s.t;
            let dt = if remaining <= dt0 * (1.0 + 1e-10) { remaining } else { dt0 };
            let mut next = classical_step(grid, &s, pp, dt, cfg.implicit_diffusion)
                .map_err(|e| Error::StepAborted { t: s.t, reason: e.to_string() })?;
            if dt == remaining {
                next.t = t_out;
            }
            s = next;
            steps += 1;
            dt_min = dt_min.min(dt);
            dt_max = dt_max.max(dt);
        }
        observe(&s)?;
    }
    if steps == 0 {
        dt_min = 0.0;
    }
    Ok(ClassicalTrajectory { state: s, steps, dt_min, dt_max })
}
