//! Entropy functional, conserved quantities, weighted energy and
//! dissipation functionals, relaxation residuals.

use serde::{Deserialize, Serialize};

use crate::constitutive::{a_of_theta, entropy_q_weight, total_energy_density, z_of_theta, PhysParams};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initdata::{limit_residuals, time_derivative_traces, weighted};
use crate::solver::{Model, Probe};
use crate::state::{Fields, State};

/// `x - ln x - 1`, accurate near `x = 1`.
fn relative_log(x: f64) -> f64 {
    let d = x - 1.0;
    d - d.ln_1p()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub entropy_total: f64,
    pub mass: f64,
    pub energy: f64,
    pub dissipation_inst: f64,
    pub relax_res_q: f64,
    pub relax_res_s: f64,
    pub e_weighted: f64,
    pub d_weighted: f64,
}

fn admissible(f: &Fields, pp: &PhysParams) -> Result<()> {
    match f.check_admissible(pp) {
        Err(Error::Inadmissible { gate: crate::Gate::APrioriBand, .. }) | Ok(()) => Ok(()),
        Err(e) => Err(e),
    }
}

/// Entropy density at node `i`.
pub fn entropy_density(f: &Fields, i: usize, pp: &PhysParams) -> Result<f64> {
    let (v, u, th, q, s) = (f.v[i], f.u[i], f.theta[i], f.q[i], f.s[i]);
    let w = entropy_q_weight(th, pp)?;
    Ok(pp.cv * relative_log(th)
        + pp.r * relative_log(v)
        + w * q * q
        + 0.5 * pp.tau / pp.mu * s * s
        + 0.5 * u * u)
}

pub fn entropy_total(f: &Fields, grid: &Grid, pp: &PhysParams) -> Result<f64> {
    admissible(f, pp)?;
    let mut vals = Vec::with_capacity(f.len());
    for i in 0..f.len() {
        vals.push(entropy_density(f, i, pp)?);
    }
    Ok(grid.integrate(&vals))
}

/// Rate at which the continuous system destroys the entropy functional:
/// `d/dt entropy_total = -entropy_production`.
pub fn entropy_production(f: &Fields, grid: &Grid, pp: &PhysParams, eps: f64) -> Result<f64> {
    admissible(f, pp)?;
    let c = eps * pp.tau / pp.mu;
    let last = grid.last();
    let bulk = grid.integrate_with(|i| {
        let (v, th, q, s) = (f.v[i], f.theta[i], f.q[i], f.s[i]);
        v * q * q / (th * th * pp.kappa.value(th)) + v * s * s / (pp.mu * th) - c * s * s
    });
    Ok(bulk + 0.5 * c * (f.s[0] * f.s[0] + f.s[last] * f.s[last]))
}

/// `d/dt entropy_total` along the semi-discrete system, by the chain rule.
pub fn entropy_rate(f: &Fields, grid: &Grid, pp: &PhysParams, eps: f64) -> Result<f64> {
    let rates = Model::new(grid, pp, eps).rates(f)?;
    let mut vals = Vec::with_capacity(f.len());
    for i in 0..f.len() {
        let (v, u, th, q, s) = (f.v[i], f.u[i], f.theta[i], f.q[i], f.s[i]);
        let w = entropy_q_weight(th, pp)?;
        let z = z_of_theta(th, pp)?;
        let a = a_of_theta(th, pp)?;
        let dw = a.da + 0.5 * (z.d2z / th - 2.0 * z.dz / (th * th) + 2.0 * z.z / (th * th * th));
        vals.push(
            (pp.cv * (1.0 - 1.0 / th) + dw * q * q) * rates.theta[i]
                + pp.r * (1.0 - 1.0 / v) * rates.v[i]
                + 2.0 * w * q * rates.q[i]
                + pp.tau / pp.mu * s * rates.s[i]
                + u * rates.u[i],
        );
    }
    Ok(grid.integrate(&vals))
}

/// `||v q + kappa theta_x||`, `||v S - mu u_x||` in discrete L2.
pub fn relaxation_residuals(f: &Fields, grid: &Grid, pp: &PhysParams) -> (f64, f64) {
    let (rq, rs) = limit_residuals(grid, f, pp);
    (grid.l2(&rq), grid.l2(&rs))
}

/// Instantaneous weighted energy and dissipation.
pub fn weighted_functionals(f: &Fields, grid: &Grid, pp: &PhysParams, eps: f64) -> Result<(f64, f64)> {
    let state = State::new(0.0, f.clone());
    let f1 = time_derivative_traces(&state, grid, pp, eps, 1)?;
    let f2 = time_derivative_traces(&state, grid, pp, eps, 2)?;
    let tau = pp.tau;

    let w0 = weighted(f, tau, true);
    let w1 = weighted(&f1, tau, false);
    let w2 = weighted(&f2, tau, false);
    let e = w0.iter().map(|x| grid.h_sq(x, 2)).sum::<f64>()
        + w1.iter().map(|x| grid.h_sq(x, 1)).sum::<f64>()
        + tau * tau * w2.iter().map(|x| grid.l2_sq(x)).sum::<f64>();

    let mut d = 0.0;
    for (x, (xt, xtt)) in [&f.v, &f.u, &f.theta].into_iter().zip([&f1.v, &f1.u, &f1.theta].into_iter().zip([&f2.v, &f2.u, &f2.theta])) {
        let dx = grid.fd_d1(x);
        d += grid.l2_sq(xt) + grid.l2_sq(&dx) + grid.l2_sq(xtt) + grid.l2_sq(&grid.fd_d1(xt)) + grid.l2_sq(&grid.fd_d2(x));
    }
    for (x, (xt, xtt)) in [&f.q, &f.s].into_iter().zip([&f1.q, &f1.s].into_iter().zip([&f2.q, &f2.s])) {
        d += grid.h_sq(x, 2) + grid.h_sq(xt, 1) + tau * tau * grid.l2_sq(xtt);
    }
    Ok((e, d))
}

pub fn entropy_report(state: &State, grid: &Grid, pp: &PhysParams, eps: f64) -> Result<EnergyReport> {
    let f = &state.fields;
    let entropy = entropy_total(f, grid, pp)?;
    let mut energy = Vec::with_capacity(f.len());
    for i in 0..f.len() {
        energy.push(total_energy_density(&f.point(i), f.u[i], pp)?);
    }
    let dissipation = grid.integrate_with(|i| {
        let th = f.theta[i];
        f.v[i] * f.q[i] * f.q[i] / (th * th * pp.kappa.value(th)) + f.s[i] * f.s[i] / (10.0 * pp.mu)
    });
    let (rq, rs) = relaxation_residuals(f, grid, pp);
    let (ew, dw) = weighted_functionals(f, grid, pp, eps)?;
    Ok(EnergyReport {
        t: state.t,
        entropy_total: entropy,
        mass: grid.integrate(&f.v),
        energy: grid.integrate(&energy),
        dissipation_inst: dissipation,
        relax_res_q: rq,
        relax_res_s: rs,
        e_weighted: ew,
        d_weighted: dw,
    })
}

/// Collects an [`EnergyReport`] at every output time.
#[derive(Debug, Default, Clone)]
pub struct EnergyMonitor {
    pub rows: Vec<EnergyReport>,
}

impl EnergyMonitor {
    pub fn max_e_weighted(&self) -> f64 {
        self.rows.iter().map(|r| r.e_weighted).fold(0.0, f64::max)
    }

    /// Trapezoid integral of `D_weighted` over the recorded times.
    pub fn d_weighted_integral(&self) -> f64 {
        self.rows.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].d_weighted + w[1].d_weighted)).sum()
    }
}

impl Probe for EnergyMonitor {
    fn observe(&mut self, model: &Model<'_>, state: &State) -> Result<()> {
        self.rows.push(entropy_report(state, model.grid, model.params, model.eps)?);
        Ok(())
    }
}

/// Per-step check of the discrete entropy balance.
#[derive(Debug, Default, Clone)]
pub struct EntropyBalance {
    /// largest increase `(eta_{n+1} - eta_n) / dt` over all steps, or 0
    /// if the entropy never grows
    pub max_increase_rate: f64,
    /// largest `|(eta_{n+1} - eta_n) / dt + P_{n+1/2}|`, with `P` the
    /// trapezoid average of the production over the step
    pub max_defect: f64,
    pub steps: usize,
    last: Option<(f64, f64)>,
}

impl EntropyBalance {
    fn eval(model: &Model<'_>, s: &State) -> Result<(f64, f64)> {
        Ok((
            entropy_total(&s.fields, model.grid, model.params)?,
            entropy_production(&s.fields, model.grid, model.params, model.eps)?,
        ))
    }
}

impl Probe for EntropyBalance {
    fn observe(&mut self, _model: &Model<'_>, _state: &State) -> Result<()> {
        Ok(())
    }

    fn on_step(&mut self, model: &Model<'_>, prev: &State, next: &State) -> Result<()> {
        let (e0, p0) = match self.last {
            Some(x) => x,
            None => Self::eval(model, prev)?,
        };
        let (e1, p1) = Self::eval(model, next)?;
        let dt = next.t - prev.t;
        let rate = (e1 - e0) / dt;
        self.max_increase_rate = self.max_increase_rate.max(rate);
        self.max_defect = self.max_defect.max((rate + 0.5 * (p0 + p1)).abs());
        self.steps += 1;
        self.last = Some((e1, p1));
        Ok(())
    }
}
