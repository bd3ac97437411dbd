//! Uniform collocated grid on [0, 1] and the discrete operators on it.
//!
//! Two first-derivative operators live here:
//!
//! * [`Grid::sbp_d1`], used by the evolution equations: central differences
//!   inside, first-order one-sided at the two end nodes. Together with the
//!   trapezoid weights `H` it satisfies summation by parts,
//!   `sum H (a D b + b D a) = a_N b_N - a_0 b_0`, so `sum H D u = 0`
//!   whenever `u` vanishes at both ends.
//! * [`Grid::fd_d1`] / [`Grid::fd_d2`], used only to measure Sobolev norms:
//!   central inside, second-order one-sided at the ends.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_interior: usize,
    dx: f64,
    x: Vec<f64>,
}

impl Grid {
    pub const MIN_INTERIOR: usize = 8;

    /// `n_interior` interior nodes plus the two boundary nodes, `dx = 1/(N+1)`.
    pub fn new(n_interior: usize) -> Result<Self> {
        if n_interior < Self::MIN_INTERIOR {
            return Err(Error::Config(format!(
                "grid needs at least {} interior nodes, got {n_interior}",
                Self::MIN_INTERIOR
            )));
        }
        let cells = n_interior + 1;
        let dx = 1.0 / cells as f64;
        let x = (0..=cells).map(|i| i as f64 / cells as f64).collect();
        Ok(Grid { n_interior, dx, x })
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    /// Total node count including both boundary nodes.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn last(&self) -> usize {
        self.x.len() - 1
    }

    /// Trapezoid weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.last() {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// Trapezoid rule.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        let last = self.last();
        let inner: f64 = f[1..last].iter().sum();
        self.dx * (inner + 0.5 * (f[0] + f[last]))
    }

    /// Trapezoid rule over `f(i)` evaluated per node.
    pub fn integrate_with(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        let last = self.last();
        let mut inner = 0.0;
        for i in 1..last {
            inner += f(i);
        }
        self.dx * (inner + 0.5 * (f(0) + f(last)))
    }

    pub fn l2_sq(&self, f: &[f64]) -> f64 {
        self.integrate_with(|i| f[i] * f[i])
    }

    /// L2 norm over the interior nodes only (weight dx each).
    pub fn l2_interior(&self, f: &[f64]) -> f64 {
        let last = self.last();
        (self.dx * f[1..last].iter().map(|a| a * a).sum::<f64>()).sqrt()
    }

    pub fn l2(&self, f: &[f64]) -> f64 {
        self.l2_sq(f).sqrt()
    }

    /// Summation-by-parts first derivative.
    pub fn sbp_d1(&self, f: &[f64], out: &mut [f64]) {
        let last = self.last();
        debug_assert!(f.len() == last + 1 && out.len() == last + 1);
        let idx = 1.0 / self.dx;
        let half = 0.5 * idx;
        out[0] = (f[1] - f[0]) * idx;
        for i in 1..last {
            out[i] = (f[i + 1] - f[i - 1]) * half;
        }
        out[last] = (f[last] - f[last - 1]) * idx;
    }

    pub fn sbp_d1_vec(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.sbp_d1(f, &mut out);
        out
    }

    /// Second-order first derivative for norm evaluation.
    pub fn fd_d1(&self, f: &[f64]) -> Vec<f64> {
        let last = self.last();
        let half = 0.5 / self.dx;
        let mut out = vec![0.0; f.len()];
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * half;
        for i in 1..last {
            out[i] = (f[i + 1] - f[i - 1]) * half;
        }
        out[last] = (3.0 * f[last] - 4.0 * f[last - 1] + f[last - 2]) * half;
        out
    }

    /// Second-order second derivative for norm evaluation.
    pub fn fd_d2(&self, f: &[f64]) -> Vec<f64> {
        let last = self.last();
        let idx2 = 1.0 / (self.dx * self.dx);
        let mut out = vec![0.0; f.len()];
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * idx2;
        for i in 1..last {
            out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * idx2;
        }
        out[last] = (2.0 * f[last] - 5.0 * f[last - 1] + 4.0 * f[last - 2] - f[last - 3]) * idx2;
        out
    }

    /// Four-point Lagrange interpolation of nodal values at `x`.
    pub fn interpolate(&self, f: &[f64], x: f64) -> f64 {
        let last = self.last();
        let s = (x / self.dx).clamp(0.0, last as f64);
        let base = (s.floor() as usize).saturating_sub(1).min(last - 3);
        let mut acc = 0.0;
        for j in base..base + 4 {
            let mut w = 1.0;
            for m in base..base + 4 {
                if m != j {
                    w *= (s - m as f64) / (j as f64 - m as f64);
                }
            }
            acc += w * f[j];
        }
        acc
    }

    /// Resample nodal values given on `from` onto this grid.
    pub fn resample(&self, from: &Grid, f: &[f64]) -> Vec<f64> {
        self.x.iter().map(|&x| from.interpolate(f, x)).collect()
    }

    /// Squared discrete `H^s` norm, `s <= 2`: sum of squared L2 norms of the
    /// function and its first `s` derivatives.
    pub fn h_sq(&self, f: &[f64], s: usize) -> f64 {
        let mut acc = self.l2_sq(f);
        if s >= 1 {
            acc += self.l2_sq(&self.fd_d1(f));
        }
        if s >= 2 {
            acc += self.l2_sq(&self.fd_d2(f));
        }
        assert!(s <= 2, "only H^0..H^2 are supported");
        acc
    }
}
