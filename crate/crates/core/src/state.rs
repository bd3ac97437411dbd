use serde::{Deserialize, Serialize};

use crate::constitutive::{self, Admissibility, PhysParams, ThermoPoint};
use crate::error::{Error, Gate, Result};

/// The five Lagrangian fields on the grid nodes. Also used for their time
/// derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fields {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
    pub q: Vec<f64>,
    pub s: Vec<f64>,
}

impl Fields {
    pub fn zeros(len: usize) -> Self {
        Fields {
            v: vec![0.0; len],
            u: vec![0.0; len],
            theta: vec![0.0; len],
            q: vec![0.0; len],
            s: vec![0.0; len],
        }
    }

    /// The rest state `(v, u, theta, q, S) = (1, 0, 1, 0, 0)`.
    pub fn equilibrium(len: usize) -> Self {
        Fields {
            v: vec![1.0; len],
            theta: vec![1.0; len],
            ..Fields::zeros(len)
        }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn arrays(&self) -> [&Vec<f64>; 5] {
        [&self.v, &self.u, &self.theta, &self.q, &self.s]
    }

    pub fn arrays_mut(&mut self) -> [&mut Vec<f64>; 5] {
        [&mut self.v, &mut self.u, &mut self.theta, &mut self.q, &mut self.s]
    }

    pub fn point(&self, i: usize) -> ThermoPoint {
        ThermoPoint::new(self.v[i], self.theta[i], self.q[i], self.s[i])
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Fields) {
        if alpha == 0.0 {
            return;
        }
        for (dst, src) in self.arrays_mut().into_iter().zip(other.arrays()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += alpha * s;
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Fields) -> f64 {
        self.arrays()
            .into_iter()
            .zip(other.arrays())
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Zero `u` and `q` at both end nodes.
    pub fn pin_boundary(&mut self) {
        let last = self.len() - 1;
        for i in [0, last] {
            self.u[i] = 0.0;
            self.q[i] = 0.0;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.arrays().iter().all(|a| a.iter().all(|x| x.is_finite()))
    }

    /// First failing gate over all nodes. `e_theta < C_v/2` is reported as
    /// [`Gate::APrioriBand`].
    pub fn check_admissible(&self, pp: &PhysParams) -> Result<()> {
        for i in 0..self.len() {
            match constitutive::admissibility(&self.point(i), pp) {
                Admissibility::Admissible => {}
                Admissibility::Marginal => {
                    return Err(Error::Inadmissible { node: Some(i), gate: Gate::APrioriBand })
                }
                Admissibility::Inadmissible(gate) => {
                    return Err(Error::Inadmissible { node: Some(i), gate })
                }
            }
        }
        if !self.is_finite() {
            return Err(Error::Numerical("non-finite field value".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub fields: Fields,
}

impl State {
    pub fn new(t: f64, fields: Fields) -> Self {
        State { t, fields }
    }

    pub fn equilibrium(len: usize) -> Self {
        State { t: 0.0, fields: Fields::equilibrium(len) }
    }
}
