//! Three-stage, second-order IMEX Runge-Kutta step (Ascher-Ruuth-Spiteri
//! ARS(2,3,3)). The explicit tableau handles transport, the L-stable
//! diagonally implicit one the pointwise relaxation.

use crate::constitutive::{node_coeffs, PhysParams};
use crate::error::{Error, Gate, Result};
use crate::state::{Fields, State};

use super::rhs::Model;

/// Additive source evaluated at a given time, used for manufactured solutions.
pub trait Forcing {
    fn add(&self, model: &Model<'_>, t: f64, out: &mut Fields);
}

const NEWTON_MAX_ITER: usize = 10;
const NEWTON_TOL: f64 = 1e-12;

fn gamma() -> f64 {
    (3.0 + 3f64.sqrt()) / 6.0
}

/// Solve `Y = Y_hat + c * relaxation(Y)` node by node.
///
/// `v`, `u` are unchanged; `S` decouples and is solved in closed form; the
/// `(theta, q)` pair goes through Newton with the analytic Jacobian.
pub fn solve_relaxation(model: &Model<'_>, hat: &Fields, c: f64) -> Result<Fields> {
    let pp = model.params;
    let last = hat.len() - 1;
    let mut y = hat.clone();
    for i in 0..=last {
        let v = hat.v[i];
        if !(v > 0.0) {
            return Err(Error::Inadmissible { node: Some(i), gate: Gate::SpecificVolume });
        }
        let s = hat.s[i] / (1.0 + c * v / pp.tau);
        y.s[i] = s;
        let q_hat = if i == 0 || i == last { 0.0 } else { hat.q[i] };
        let (theta, q) = newton_node(pp, v, s, hat.theta[i], q_hat, c)
            .map_err(|e| match e {
                Error::NewtonDiverged { iterations, .. } => Error::NewtonDiverged { node: i, iterations },
                Error::Inadmissible { gate, .. } => Error::Inadmissible { node: Some(i), gate },
                other => other,
            })?;
        y.theta[i] = theta;
        y.q[i] = q;
    }
    Ok(y)
}

fn newton_node(pp: &PhysParams, v: f64, s: f64, th_hat: f64, q_hat: f64, c: f64) -> Result<(f64, f64)> {
    if q_hat == 0.0 && s == 0.0 {
        return Ok((th_hat, 0.0));
    }
    let heat_s = c * s * s * v / pp.mu;
    let c0 = node_coeffs(th_hat, q_hat, pp)?;
    let tg0 = c0.tau1(pp.tau);
    let mut th = th_hat;
    let mut q = q_hat * tg0 / (tg0 + c * v);
    for it in 0..NEWTON_MAX_ITER {
        let k = node_coeffs(th, q, pp)?;
        let tg = k.tau1(pp.tau);
        let dtg = pp.tau * k.g.d1;
        let k2 = k.two_a_over_tau1(pp.tau);
        let dk2 = k.d_two_a_over_tau1(pp.tau);
        let et = k.energy.e_theta;
        let r1 = tg * (q - q_hat) + c * v * q;
        let r2 = et * (th - th_hat) - c * k2 * q * q * v - heat_s;
        let j11 = dtg * (q - q_hat);
        let j12 = tg + c * v;
        let j21 = k.energy.e_theta_theta * (th - th_hat) + et - c * dk2 * q * q * v;
        let j22 = k.energy.e_theta_q * (th - th_hat) - 2.0 * c * k2 * q * v;
        let det = j11 * j22 - j12 * j21;
        if !(det.is_finite() && det != 0.0) {
            return Err(Error::NewtonDiverged { node: 0, iterations: it });
        }
        let dth = (r1 * j22 - r2 * j12) / det;
        let dq = (r2 * j11 - r1 * j21) / det;
        th -= dth;
        q -= dq;
        if !(th > 0.0) {
            return Err(Error::Inadmissible { node: None, gate: Gate::Temperature });
        }
        if dth.abs() <= NEWTON_TOL * th.max(1.0) && dq.abs() <= NEWTON_TOL * (q.abs() + q_hat.abs()) {
            return Ok((th, q));
        }
    }
    Err(Error::NewtonDiverged { node: 0, iterations: NEWTON_MAX_ITER })
}

/// One time step of the split system.
#[derive(Clone, Copy)]
pub struct ImexStepper<'a> {
    pub model: Model<'a>,
    /// relaxation treated implicitly; if false the full right side goes
    /// through the explicit tableau
    pub imex: bool,
    pub forcing: Option<&'a dyn Forcing>,
}

impl<'a> ImexStepper<'a> {
    pub fn new(model: Model<'a>, imex: bool) -> Self {
        ImexStepper { model, imex, forcing: None }
    }

    pub fn with_forcing(mut self, forcing: &'a dyn Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    fn explicit(&self, f: &Fields, t: f64) -> Result<Fields> {
        let mut out = Fields::zeros(f.len());
        self.model.transport(f, &mut out)?;
        if !self.imex {
            let mut loc = Fields::zeros(f.len());
            self.model.relaxation(f, &mut loc)?;
            out.axpy(1.0, &loc);
        }
        if let Some(src) = self.forcing {
            src.add(&self.model, t, &mut out);
            let last = out.len() - 1;
            for i in [0, last] {
                out.u[i] = 0.0;
                out.q[i] = 0.0;
            }
        }
        Ok(out)
    }

    fn implicit(&self, hat: Fields, c: f64) -> Result<(Fields, Fields)> {
        let mut y = if self.imex { solve_relaxation(&self.model, &hat, c)? } else { hat.clone() };
        y.pin_boundary();
        let mut k = y.clone();
        k.axpy(-1.0, &hat);
        for a in k.arrays_mut() {
            for x in a.iter_mut() {
                *x /= c;
            }
        }
        Ok((y, k))
    }

    fn check(&self, f: &Fields) -> Result<()> {
        f.check_admissible(self.model.params)
    }

    /// Advance `state` by `dt`.
    pub fn step(&self, state: &State, dt: f64) -> Result<State> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Numerical(format!("invalid time step {dt}")));
        }
        let g = gamma();
        let t = state.t;
        let u0 = &state.fields;

        let e1 = self.explicit(u0, t)?;

        let mut hat2 = u0.clone();
        hat2.axpy(dt * g, &e1);
        let (y2, k2) = self.implicit(hat2, g * dt)?;
        self.check(&y2)?;
        let e2 = self.explicit(&y2, t + g * dt)?;

        let mut hat3 = u0.clone();
        hat3.axpy(dt * (g - 1.0), &e1);
        hat3.axpy(dt * 2.0 * (1.0 - g), &e2);
        hat3.axpy(dt * (1.0 - 2.0 * g), &k2);
        let (y3, k3) = self.implicit(hat3, g * dt)?;
        self.check(&y3)?;
        let e3 = self.explicit(&y3, t + (1.0 - g) * dt)?;

        let mut next = u0.clone();
        next.axpy(0.5 * dt, &e2);
        next.axpy(0.5 * dt, &e3);
        next.axpy(0.5 * dt, &k2);
        next.axpy(0.5 * dt, &k3);
        next.pin_boundary();
        self.check(&next)?;
        Ok(State::new(t + dt, next))
    }
}
