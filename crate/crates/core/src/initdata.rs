//! Smooth initial profiles, their time-derivative traces and data norms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constitutive::{Admissibility, PhysParams};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::{Model, Trig};
use crate::state::{Fields, State};

/// One spatial term `amp * X(k pi x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub amp: f64,
    pub kind: Trig,
    pub k: f64,
}

/// `base + sum of terms`, with exact derivatives.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Series {
    pub base: f64,
    pub terms: Vec<Term>,
}

impl Series {
    pub fn constant(base: f64) -> Self {
        Series { base, terms: Vec::new() }
    }

    pub fn with(base: f64, amp: f64, kind: Trig, k: f64) -> Self {
        Series { base, terms: vec![Term { amp, kind, k }] }
    }

    /// Value and first two derivatives.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        let mut out = [self.base, 0.0, 0.0];
        for t in &self.terms {
            let w = t.k * std::f64::consts::PI;
            let (s, c) = (w * x).sin_cos();
            let (f, d1) = match t.kind {
                Trig::Sin => (s, w * c),
                Trig::Cos => (c, -w * s),
            };
            out[0] += t.amp * f;
            out[1] += t.amp * d1;
            out[2] -= t.amp * w * w * f;
        }
        out
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        grid.x().iter().map(|&x| self.eval(x)[0]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Equilibrium,
    /// `u = A sin(pi x)`, `theta = 1 + A cos(pi x)`, `v = 1`
    Acoustic,
    /// `theta = 1 + A cos(2 pi x)`, rest at equilibrium
    Thermal,
    /// `v = 1 + A sin(pi x)`, rest at equilibrium
    Compression,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Equilibrium, Preset::Acoustic, Preset::Thermal, Preset::Compression];

    /// Whether `u_t` and `q_t` vanish on the boundary at t = 0.
    pub fn k1_compatible(self) -> bool {
        !matches!(self, Preset::Compression)
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Equilibrium => "equilibrium",
            Preset::Acoustic => "acoustic",
            Preset::Thermal => "thermal",
            Preset::Compression => "compression",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialProfile {
    pub v: Series,
    pub u: Series,
    pub theta: Series,
    pub q: Series,
    pub s: Series,
    pub amplitude: f64,
    /// replace `q`, `S` by their limit values `-kappa theta_x / v`, `mu u_x / v`
    pub prepared: bool,
}

impl InitialProfile {
    pub fn preset(preset: Preset, amplitude: f64, prepared: bool) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::Config(format!("amplitude must be nonnegative, got {amplitude}")));
        }
        let a = amplitude;
        let one = || Series::constant(1.0);
        let zero = || Series::constant(0.0);
        let (v, u, theta) = match preset {
            Preset::Equilibrium => (one(), zero(), one()),
            Preset::Acoustic => (one(), Series::with(0.0, a, Trig::Sin, 1.0), Series::with(1.0, a, Trig::Cos, 1.0)),
            Preset::Thermal => (one(), zero(), Series::with(1.0, a, Trig::Cos, 2.0)),
            Preset::Compression => (Series::with(1.0, a, Trig::Sin, 1.0), zero(), one()),
        };
        Ok(InitialProfile { v, u, theta, q: zero(), s: zero(), amplitude, prepared })
    }

    /// Sample on the grid. Prepared data use the grid's difference operator so
    /// the discrete limit relations hold to round-off.
    pub fn build(&self, grid: &Grid, pp: &PhysParams) -> Result<State> {
        let mut f = Fields {
            v: self.v.sample(grid),
            u: self.u.sample(grid),
            theta: self.theta.sample(grid),
            q: self.q.sample(grid),
            s: self.s.sample(grid),
        };
        if self.prepared {
            let dth = grid.sbp_d1_vec(&f.theta);
            let du = grid.sbp_d1_vec(&f.u);
            for i in 0..grid.len() {
                if f.v[i] <= 0.0 || f.theta[i] <= 0.0 {
                    break;
                }
                f.q[i] = -pp.kappa.value(f.theta[i]) * dth[i] / f.v[i];
                f.s[i] = pp.mu * du[i] / f.v[i];
            }
        }
        f.pin_boundary();
        for i in 0..grid.len() {
            if let Admissibility::Inadmissible(gate) = crate::constitutive::admissibility(&f.point(i), pp) {
                return Err(Error::Inadmissible { node: Some(i), gate });
            }
        }
        Ok(State::new(0.0, f))
    }
}

/// Sample a preset on the grid.
pub fn build_profile(preset: Preset, amplitude: f64, prepared: bool, pp: &PhysParams, grid: &Grid) -> Result<State> {
    InitialProfile::preset(preset, amplitude, prepared)?.build(grid, pp)
}

/// `d^k/dt^k` of the fields at the given state, `k <= 2`, from the
/// semi-discrete equations.
pub fn time_derivative_traces(state: &State, grid: &Grid, pp: &PhysParams, eps: f64, k: usize) -> Result<Fields> {
    let model = Model::new(grid, pp, eps);
    match k {
        0 => Ok(state.fields.clone()),
        1 => model.rates(&state.fields),
        2 => {
            let first = model.rates(&state.fields)?;
            model.second_rates(&state.fields, &first)
        }
        _ => Err(Error::domain(format!("time derivative traces are available up to order 2, got {k}"))),
    }
}

/// Boundary values `(max |u_t|, max |q_t|)` the equations would produce at
/// the two end nodes if the boundary rates were not pinned.
pub fn boundary_trace_values(state: &State, grid: &Grid, pp: &PhysParams) -> [f64; 2] {
    let f = &state.fields;
    let p: Vec<f64> = f.theta.iter().zip(&f.v).map(|(t, v)| pp.r * t / v).collect();
    let dp = grid.fd_d1(&p);
    let ds = grid.fd_d1(&f.s);
    let dth = grid.fd_d1(&f.theta);
    let mut out = [0.0f64; 2];
    for i in [0, grid.last()] {
        out[0] = out[0].max((ds[i] - dp[i]).abs());
        let tau1 = pp.tau * pp.g.value(f.theta[i]);
        out[1] = out[1].max(((f.v[i] * f.q[i] + pp.kappa.value(f.theta[i]) * dth[i]) / tau1).abs());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataNormReport {
    /// `||V^k||_{H^{2-k}}`, k = 0, 1, 2
    pub v0_norms: [f64; 3],
    pub e0: f64,
    /// `||v q + kappa theta_x||_{H^1}`, `||v S - mu u_x||_{H^1}`
    pub wp_residuals: [f64; 2],
}

/// `(v - 1, u, theta - 1, sqrt(tau) q, sqrt(tau) S)` for `k = 0`, and the
/// same weighting without the shifts for derivatives.
pub(crate) fn weighted(f: &Fields, tau: f64, shift: bool) -> [Vec<f64>; 5] {
    let st = tau.sqrt();
    let off = if shift { 1.0 } else { 0.0 };
    [
        f.v.iter().map(|x| x - off).collect(),
        f.u.clone(),
        f.theta.iter().map(|x| x - off).collect(),
        f.q.iter().map(|x| st * x).collect(),
        f.s.iter().map(|x| st * x).collect(),
    ]
}

fn h_sq_all(grid: &Grid, fields: &[Vec<f64>; 5], s: usize) -> f64 {
    fields.iter().map(|f| grid.h_sq(f, s)).sum()
}

/// Residual vectors of the two limit relations, zero at the end nodes for
/// the heat flux (where `q` is prescribed).
pub(crate) fn limit_residuals(grid: &Grid, f: &Fields, pp: &PhysParams) -> (Vec<f64>, Vec<f64>) {
    let dth = grid.sbp_d1_vec(&f.theta);
    let du = grid.sbp_d1_vec(&f.u);
    let last = grid.last();
    let rq = (0..=last)
        .map(|i| {
            if i == 0 || i == last {
                0.0
            } else {
                f.v[i] * f.q[i] + pp.kappa.value(f.theta[i]) * dth[i]
            }
        })
        .collect();
    let rs = (0..=last).map(|i| f.v[i] * f.s[i] - pp.mu * du[i]).collect();
    (rq, rs)
}

pub fn data_norms(state: &State, grid: &Grid, pp: &PhysParams, eps: f64) -> Result<DataNormReport> {
    let f0 = &state.fields;
    let f1 = time_derivative_traces(state, grid, pp, eps, 1)?;
    let f2 = time_derivative_traces(state, grid, pp, eps, 2)?;
    let n0 = h_sq_all(grid, &weighted(f0, pp.tau, true), 2).sqrt();
    let n1 = h_sq_all(grid, &weighted(&f1, pp.tau, false), 1).sqrt();
    let n2 = pp.tau * h_sq_all(grid, &weighted(&f2, pp.tau, false), 0).sqrt();
    let (rq, rs) = limit_residuals(grid, f0, pp);
    Ok(DataNormReport {
        v0_norms: [n0, n1, n2],
        e0: n0 + n1 + n2,
        wp_residuals: [grid.h_sq(&rq, 1).sqrt(), grid.h_sq(&rs, 1).sqrt()],
    })
}
