//! Semi-discrete right-hand side of the relaxed system
//!
//! ```text
//! v_t = u_x
//! u_t + p_x = S_x
//! e_theta theta_t - (2a/Z) q theta_x + p u_x + q_x = (2a/tau_1) q^2 v + S^2 v / mu
//! tau_1(theta) q_t + v q + kappa(theta) theta_x = 0
//! tau (S_t + eps b(x) S_x) + v S = mu u_x
//! ```
//!
//! with `u = q = 0` imposed on the end nodes. The right side is split into
//! a transport part (all terms with an x-derivative) and a local part (the
//! relaxation terms `-v q / tau_1`, `-v S / tau` and the q^2, S^2 heating),
//! which the time stepper treats implicitly.

use crate::constitutive::{node_coeffs, NodeCoeffs, PhysParams};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::state::Fields;
use crate::structure::b_of_x;

/// The spatially discretized system on one grid.
#[derive(Debug, Clone, Copy)]
pub struct Model<'a> {
    pub grid: &'a Grid,
    pub params: &'a PhysParams,
    /// regularization of the stress equation; 0 is the original system
    pub eps: f64,
}

/// x-derivatives shared by the transport part and its time derivative.
struct Derivatives {
    pressure: Vec<f64>,
    du: Vec<f64>,
    dp: Vec<f64>,
    ds: Vec<f64>,
    dtheta: Vec<f64>,
    dq: Vec<f64>,
}

impl<'a> Model<'a> {
    pub fn new(grid: &'a Grid, params: &'a PhysParams, eps: f64) -> Self {
        Model { grid, params, eps }
    }

    fn coeffs(&self, f: &Fields, i: usize) -> Result<NodeCoeffs> {
        if !(f.v[i] > 0.0) {
            return Err(Error::Inadmissible {
                node: Some(i),
                gate: crate::error::Gate::SpecificVolume,
            });
        }
        node_coeffs(f.theta[i], f.q[i], self.params).map_err(|e| match e {
            Error::Inadmissible { gate, .. } => Error::Inadmissible { node: Some(i), gate },
            other => other,
        })
    }

    fn derivatives(&self, f: &Fields) -> Derivatives {
        let g = self.grid;
        let r = self.params.r;
        let pressure: Vec<f64> = f.theta.iter().zip(&f.v).map(|(th, v)| r * th / v).collect();
        Derivatives {
            du: g.sbp_d1_vec(&f.u),
            dp: g.sbp_d1_vec(&pressure),
            ds: g.sbp_d1_vec(&f.s),
            dtheta: g.sbp_d1_vec(&f.theta),
            dq: g.sbp_d1_vec(&f.q),
            pressure,
        }
    }

    /// Transport part of the rates, written into `out`.
    pub fn transport(&self, f: &Fields, out: &mut Fields) -> Result<()> {
        let pp = self.params;
        let d = self.derivatives(f);
        let last = self.grid.last();
        let x = self.grid.x();
        for i in 0..=last {
            let c = self.coeffs(f, i)?;
            let e_theta = c.energy.e_theta;
            if !(e_theta > 0.0) {
                return Err(Error::Inadmissible {
                    node: Some(i),
                    gate: crate::error::Gate::HeatCapacity,
                });
            }
            let boundary = i == 0 || i == last;
            out.v[i] = d.du[i];
            out.u[i] = if boundary { 0.0 } else { d.ds[i] - d.dp[i] };
            out.theta[i] =
                (c.two_a_over_z() * f.q[i] * d.dtheta[i] - d.pressure[i] * d.du[i] - d.dq[i]) / e_theta;
            out.q[i] = if boundary { 0.0 } else { -c.kappa.f * d.dtheta[i] / c.tau1(pp.tau) };
            let stretch = if self.eps != 0.0 { self.eps * b_of_x(x[i]) * d.ds[i] } else { 0.0 };
            out.s[i] = pp.mu * d.du[i] / pp.tau - stretch;
        }
        Ok(())
    }

    /// Local relaxation part of the rates, written into `out`.
    pub fn relaxation(&self, f: &Fields, out: &mut Fields) -> Result<()> {
        let pp = self.params;
        let last = self.grid.last();
        for i in 0..=last {
            let c = self.coeffs(f, i)?;
            let (v, q, s) = (f.v[i], f.q[i], f.s[i]);
            out.v[i] = 0.0;
            out.u[i] = 0.0;
            out.theta[i] = (c.two_a_over_tau1(pp.tau) * q * q * v + s * s * v / pp.mu) / c.energy.e_theta;
            out.q[i] = if i == 0 || i == last { 0.0 } else { -v * q / c.tau1(pp.tau) };
            out.s[i] = -v * s / pp.tau;
        }
        Ok(())
    }

    /// Full rates `U_t`.
    pub fn rates(&self, f: &Fields) -> Result<Fields> {
        let mut out = Fields::zeros(f.len());
        let mut loc = Fields::zeros(f.len());
        self.transport(f, &mut out)?;
        self.relaxation(f, &mut loc)?;
        out.axpy(1.0, &loc);
        Ok(out)
    }

    /// Second time derivative `U_tt` of the semi-discrete system, from the
    /// equations differentiated once in time with `first = U_t` substituted.
    pub fn second_rates(&self, f: &Fields, first: &Fields) -> Result<Fields> {
        let pp = self.params;
        let g = self.grid;
        let last = g.last();
        let x = g.x();
        let d = self.derivatives(f);
        let w = first;

        // p_t = R theta_t / v - R theta v_t / v^2
        let p_t: Vec<f64> = (0..=last)
            .map(|i| pp.r * (w.theta[i] / f.v[i] - f.theta[i] * w.v[i] / (f.v[i] * f.v[i])))
            .collect();
        let du_t = g.sbp_d1_vec(&w.u);
        let dp_t = g.sbp_d1_vec(&p_t);
        let ds_t = g.sbp_d1_vec(&w.s);
        let dtheta_t = g.sbp_d1_vec(&w.theta);
        let dq_t = g.sbp_d1_vec(&w.q);

        let mut out = Fields::zeros(f.len());
        for i in 0..=last {
            let c = self.coeffs(f, i)?;
            let boundary = i == 0 || i == last;
            let (v, q, s, th) = (f.v[i], f.q[i], f.s[i], f.theta[i]);
            let (v_t, q_t, s_t, th_t) = (w.v[i], w.q[i], w.s[i], w.theta[i]);
            let tau1 = c.tau1(pp.tau);

            out.v[i] = du_t[i];
            out.u[i] = if boundary { 0.0 } else { ds_t[i] - dp_t[i] };

            // d/dt [e_theta theta_t] = d/dt G
            let k1 = c.two_a_over_z();
            let k2 = c.two_a_over_tau1(pp.tau);
            let g_t = c.d_two_a_over_z() * th_t * q * d.dtheta[i]
                + k1 * (q_t * d.dtheta[i] + q * dtheta_t[i])
                - p_t[i] * d.du[i]
                - d.pressure[i] * du_t[i]
                - dq_t[i]
                + c.d_two_a_over_tau1(pp.tau) * th_t * q * q * v
                + k2 * (2.0 * q * q_t * v + q * q * v_t)
                + (2.0 * s * s_t * v + s * s * v_t) / pp.mu;
            let de_theta_dt = c.energy.e_theta_theta * th_t + c.energy.e_theta_q * q_t;
            out.theta[i] = (g_t - de_theta_dt * th_t) / c.energy.e_theta;

            out.q[i] = if boundary {
                0.0
            } else {
                // tau g' theta_t q_t + tau g q_tt = -v_t q - v q_t - kappa' theta_t theta_x - kappa theta_xt
                (-v_t * q - v * q_t
                    - c.kappa.d1 * th_t * d.dtheta[i]
                    - c.kappa.f * dtheta_t[i]
                    - pp.tau * c.g.d1 * th_t * q_t)
                    / tau1
            };

            let stretch = if self.eps != 0.0 { self.eps * b_of_x(x[i]) * ds_t[i] } else { 0.0 };
            out.s[i] = (pp.mu * du_t[i] - v_t * s - v * s_t) / pp.tau - stretch;
            let _ = th;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::CoeffFn;
    use std::f64::consts::PI;

    fn wavy(grid: &Grid, amp: f64) -> Fields {
        let x = grid.x();
        Fields {
            v: x.iter().map(|x| 1.0 + amp * (PI * x).cos()).collect(),
            u: x.iter().map(|x| amp * (PI * x).sin()).collect(),
            theta: x.iter().map(|x| 1.0 + amp * (2.0 * PI * x).cos()).collect(),
            q: x.iter().map(|x| amp * (3.0 * PI * x).sin()).collect(),
            s: x.iter().map(|x| amp * (PI * x).cos() + 0.3 * amp).collect(),
        }
    }

    #[test]
    fn equilibrium_is_an_exact_steady_state() {
        let grid = Grid::new(32).unwrap();
        let pp = PhysParams::default();
        for eps in [0.0, 0.01] {
            let r = Model::new(&grid, &pp, eps).rates(&Fields::equilibrium(grid.len())).unwrap();
            assert!(r.arrays().iter().all(|a| a.iter().all(|&x| x == 0.0)));
        }
    }

    #[test]
    fn velocity_mode_rates() {
        let grid = Grid::new(200).unwrap();
        let pp = PhysParams { mu: 2.0, tau: 0.05, ..PhysParams::default() };
        let amp = 1e-3;
        let mut f = Fields::equilibrium(grid.len());
        for (u, x) in f.u.iter_mut().zip(grid.x()) {
            *u = amp * (PI * x).sin();
        }
        let r = Model::new(&grid, &pp, 0.0).rates(&f).unwrap();
        let h2 = grid.dx() * grid.dx();
        for i in 1..grid.last() {
            let x = grid.x()[i];
            let exact = amp * PI * (PI * x).cos();
            assert!((r.v[i] - exact).abs() < 2.0 * amp * PI.powi(3) * h2);
            assert!((r.s[i] - pp.mu * exact / pp.tau).abs() < 2.0 * amp * PI.powi(3) * h2 * pp.mu / pp.tau);
        }
    }

    #[test]
    fn cattaneo_residual_vanishes_to_roundoff() {
        let grid = Grid::new(40).unwrap();
        let pp = PhysParams { g: CoeffFn::Power { alpha: 0.5 }, kappa: CoeffFn::Poly([0.5, 0.5, 0.0, 0.0]), ..PhysParams::default() };
        let f = wavy(&grid, 0.05);
        let r = Model::new(&grid, &pp, 0.0).rates(&f).unwrap();
        let dth = grid.sbp_d1_vec(&f.theta);
        for i in 1..grid.last() {
            let tau1 = pp.tau * pp.g.value(f.theta[i]);
            let res = tau1 * r.q[i] + f.v[i] * f.q[i] + pp.kappa.value(f.theta[i]) * dth[i];
            assert!(res.abs() < 1e-15, "{res}");
        }
    }

    #[test]
    fn boundary_rates_are_pinned() {
        let grid = Grid::new(20).unwrap();
        let pp = PhysParams::default();
        let r = Model::new(&grid, &pp, 0.1).rates(&wavy(&grid, 0.05)).unwrap();
        for i in [0, grid.last()] {
            assert_eq!(r.u[i], 0.0);
            assert_eq!(r.q[i], 0.0);
        }
    }

    #[test]
    fn second_rates_match_directional_difference() {
        // U_tt = d/ds rates(U + s U_t) at s = 0, by central differences
        let grid = Grid::new(24).unwrap();
        let pp = PhysParams {
            g: CoeffFn::Power { alpha: 0.5 },
            kappa: CoeffFn::Poly([0.5, 0.5, 0.0, 0.0]),
            tau: 0.2,
            ..PhysParams::default()
        };
        let f = wavy(&grid, 0.05);
        for eps in [0.0, 0.1] {
            let m = Model::new(&grid, &pp, eps);
            let w = m.rates(&f).unwrap();
            let exact = m.second_rates(&f, &w).unwrap();
            let h = 1e-6;
            let mut plus = f.clone();
            plus.axpy(h, &w);
            let mut minus = f.clone();
            minus.axpy(-h, &w);
            let mut fd = m.rates(&plus).unwrap();
            fd.axpy(-1.0, &m.rates(&minus).unwrap());
            for (a, b) in fd.arrays().into_iter().zip(exact.arrays()) {
                for (x, y) in a.iter().zip(b) {
                    let x = x / (2.0 * h);
                    assert!((x - y).abs() <= 1e-6 * (1.0 + y.abs()), "{x} vs {y}");
                }
            }
        }
    }
}
