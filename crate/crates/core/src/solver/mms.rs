//! Manufactured solutions: separable trigonometric fields and the source
//! terms that make them exact solutions of the forced system.

use serde::{Deserialize, Serialize};

use crate::constitutive::{node_coeffs, PhysParams};
use crate::grid::Grid;
use crate::state::Fields;
use crate::structure::b_of_x;

use super::imex::Forcing;
use super::rhs::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    Sin,
    Cos,
}

impl Trig {
    fn eval(self, arg: f64) -> (f64, f64) {
        match self {
            Trig::Sin => (arg.sin(), arg.cos()),
            Trig::Cos => (arg.cos(), -arg.sin()),
        }
    }
}

/// `amp * X(k pi x) * T(omega t)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub amp: f64,
    pub space: Trig,
    pub k: f64,
    pub time: Trig,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSeries {
    pub base: f64,
    #[serde(default)]
    pub modes: Vec<Mode>,
}

/// Value, x-derivative and t-derivative at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub f: f64,
    pub x: f64,
    pub t: f64,
}

impl FieldSeries {
    pub fn constant(base: f64) -> Self {
        FieldSeries { base, modes: Vec::new() }
    }

    pub fn single(base: f64, amp: f64, space: Trig, k: f64, time: Trig) -> Self {
        FieldSeries { base, modes: vec![Mode { amp, space, k, time, omega: 1.0 }] }
    }

    pub fn jet(&self, x: f64, t: f64) -> Jet {
        let mut j = Jet { f: self.base, x: 0.0, t: 0.0 };
        for m in &self.modes {
            let kx = m.k * std::f64::consts::PI;
            let (sx, dsx) = m.space.eval(kx * x);
            let (st, dst) = m.time.eval(m.omega * t);
            j.f += m.amp * sx * st;
            j.x += m.amp * kx * dsx * st;
            j.t += m.amp * m.omega * sx * dst;
        }
        j
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manufactured {
    pub v: FieldSeries,
    pub u: FieldSeries,
    pub theta: FieldSeries,
    pub q: FieldSeries,
    pub s: FieldSeries,
}

impl Manufactured {
    pub fn equilibrium() -> Self {
        Manufactured {
            v: FieldSeries::constant(1.0),
            u: FieldSeries::constant(0.0),
            theta: FieldSeries::constant(1.0),
            q: FieldSeries::constant(0.0),
            s: FieldSeries::constant(0.0),
        }
    }

    /// A set exercising every term, with `u` and `q` vanishing at both ends.
    pub fn five_field(amp: f64) -> Self {
        use Trig::*;
        Manufactured {
            v: FieldSeries::single(1.0, amp, Cos, 1.0, Cos),
            u: FieldSeries::single(0.0, amp, Sin, 1.0, Cos),
            theta: FieldSeries::single(1.0, amp, Cos, 2.0, Cos),
            q: FieldSeries::single(0.0, amp, Sin, 1.0, Sin),
            s: FieldSeries::single(0.0, amp, Cos, 1.0, Cos),
        }
    }

    pub fn sample(&self, grid: &Grid, t: f64) -> Fields {
        let x = grid.x();
        let col = |s: &FieldSeries| x.iter().map(|&x| s.jet(x, t).f).collect::<Vec<_>>();
        Fields { v: col(&self.v), u: col(&self.u), theta: col(&self.theta), q: col(&self.q), s: col(&self.s) }
    }

    /// Residual of the continuous equations, in rate form, at `(x, t)`.
    pub fn residual(&self, pp: &PhysParams, eps: f64, x: f64, t: f64) -> [f64; 5] {
        let v = self.v.jet(x, t);
        let u = self.u.jet(x, t);
        let th = self.theta.jet(x, t);
        let q = self.q.jet(x, t);
        let s = self.s.jet(x, t);
        let c = node_coeffs(th.f, q.f, pp).expect("manufactured temperature must stay positive");
        let p = pp.r * th.f / v.f;
        let p_x = pp.r * (th.x / v.f - th.f * v.x / (v.f * v.f));
        let theta_rate = (c.two_a_over_z() * q.f * th.x - p * u.x - q.x
            + c.two_a_over_tau1(pp.tau) * q.f * q.f * v.f
            + s.f * s.f * v.f / pp.mu)
            / c.energy.e_theta;
        let q_rate = -(v.f * q.f + c.kappa.f * th.x) / c.tau1(pp.tau);
        let s_rate = -eps * b_of_x(x) * s.x + (pp.mu * u.x - v.f * s.f) / pp.tau;
        [v.t - u.x, u.t + p_x - s.x, th.t - theta_rate, q.t - q_rate, s.t - s_rate]
    }
}

/// Source arrays that make `m` an exact solution at time `t`.
pub fn mms_rhs(grid: &Grid, pp: &PhysParams, eps: f64, m: &Manufactured, t: f64) -> Fields {
    let mut out = Fields::zeros(grid.len());
    for (i, &x) in grid.x().iter().enumerate() {
        let r = m.residual(pp, eps, x, t);
        out.v[i] = r[0];
        out.u[i] = r[1];
        out.theta[i] = r[2];
        out.q[i] = r[3];
        out.s[i] = r[4];
    }
    out
}

impl Forcing for Manufactured {
    fn add(&self, model: &Model<'_>, t: f64, out: &mut Fields) {
        let src = mms_rhs(model.grid, model.params, model.eps, self, t);
        out.axpy(1.0, &src);
    }
}
