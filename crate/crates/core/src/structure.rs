//! First-order symmetric form `A0 U_t + A1 U_x + B U = F` of the
//! (eps-regularized) system, its characteristic speeds, and the boundary
//! algebra behind well-posedness of the boundary conditions `u = q = 0`.
//!
//! For `eps > 0` the boundary is non-characteristic: `det(A0^-1 A1)` at
//! `x in {0, 1}` equals `eps R b(x) theta / (v^2 Z e_theta)`. The boundary
//! condition is maximally nonnegative: `A1 nu` is positive semidefinite on
//! `ker M` and fails to be on every proper superspace of it.

use nalgebra::{Matrix5, Vector5};
use serde::Serialize;

use crate::constitutive::{self, node_coeffs, Admissibility, PhysParams, ThermoPoint};
use crate::error::{Error, Result};

/// State ordering used by every 5-vector here: `(v, u, theta, q, S)`.
pub type StateVec = Vector5<f64>;

/// `b(x) = 2x - 1`.
#[inline]
pub fn b_of_x(x: f64) -> f64 {
    2.0 * x - 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a0: Matrix5<f64>,
    pub a1: Matrix5<f64>,
    pub b: Matrix5<f64>,
    pub f: Vector5<f64>,
    pub eps: f64,
    pub x: f64,
}

pub fn assemble(u: &StateVec, x: f64, pp: &PhysParams, eps: f64) -> Result<SystemMatrices> {
    let pt = ThermoPoint::new(u[0], u[2], u[3], u[4]);
    if let Admissibility::Inadmissible(gate) = constitutive::admissibility(&pt, pp) {
        return Err(Error::Inadmissible { node: None, gate });
    }
    let (v, theta, q, s) = (pt.v, pt.theta, pt.q, pt.s);
    let c = node_coeffs(theta, q, pp)?;
    let z = c.z.z;
    let r = pp.r;

    let a0 = Matrix5::from_diagonal(&Vector5::new(
        r * theta / (v * v),
        1.0,
        c.energy.e_theta / theta,
        z / theta,
        pp.tau / pp.mu,
    ));

    // upper triangle, then mirrored
    let mut a1 = Matrix5::zeros();
    a1[(0, 1)] = -r * theta / (v * v);
    a1[(1, 2)] = r / v;
    a1[(1, 4)] = -1.0;
    a1[(2, 2)] = -2.0 * c.a.a * q / (theta * z);
    a1[(2, 3)] = 1.0 / theta;
    a1[(4, 4)] = pp.tau * eps / pp.mu * b_of_x(x);
    for i in 0..5 {
        for j in 0..i {
            a1[(i, j)] = a1[(j, i)];
        }
    }

    let b = Matrix5::from_diagonal(&Vector5::new(
        0.0,
        0.0,
        0.0,
        v / (theta * c.kappa.f),
        v / pp.mu,
    ));

    // energy equation divided by theta: its sources move to the right side
    let mut f = Vector5::zeros();
    f[2] = v / theta * (c.two_a_over_tau1(pp.tau) * q * q + s * s / pp.mu);

    Ok(SystemMatrices { a0, a1, b, f, eps, x })
}

/// `A0^{-1/2} A1 A0^{-1/2}`, the symmetric matrix similar to `A0^{-1} A1`.
fn symmetrized(m: &SystemMatrices) -> Result<Matrix5<f64>> {
    let d = m.a0.diagonal();
    if d.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Numerical("A0 is not positive definite".into()));
    }
    let s = d.map(|x| 1.0 / x.sqrt());
    let mut c = m.a1;
    for i in 0..5 {
        for j in 0..5 {
            c[(i, j)] *= s[i] * s[j];
        }
    }
    Ok(c)
}

/// Eigenvalues of `A0^{-1} A1`, ascending, from the symmetric-definite pencil
/// `A1 w = lambda A0 w`.
pub fn characteristic_speeds(m: &SystemMatrices) -> Result<[f64; 5]> {
    let c = symmetrized(m)?;
    let eig = nalgebra::SymmetricEigen::try_new(c, f64::EPSILON, 200)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut out: [f64; 5] = eig.eigenvalues.into();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Largest characteristic speed in absolute value.
pub fn max_speed(m: &SystemMatrices) -> Result<f64> {
    let c = symmetrized(m)?;
    let vals = c.symmetric_eigenvalues();
    if vals.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite characteristic speed".into()));
    }
    Ok(vals.iter().fold(0.0, |acc, x| acc.max(x.abs())))
}

/// Determinant by cofactor expansion along the first row. The flux matrix
/// has a single nonvanishing permutation product, which makes this exact up
/// to the rounding of that one product; LU would not be.
fn det_cofactor(m: &Matrix5<f64>) -> f64 {
    fn det(m: &[[f64; 5]; 5], rows: &[usize], cols: &[usize]) -> f64 {
        if rows.len() == 1 {
            return m[rows[0]][cols[0]];
        }
        let r = rows[0];
        let mut acc = 0.0;
        let mut sign = 1.0;
        for (k, &c) in cols.iter().enumerate() {
            let entry = m[r][c];
            if entry != 0.0 {
                let sub_cols: Vec<usize> =
                    cols.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &c)| c).collect();
                acc += sign * entry * det(m, &rows[1..], &sub_cols);
            }
            sign = -sign;
        }
        acc
    }
    let mut a = [[0.0; 5]; 5];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = m[(i, j)];
        }
    }
    det(&a, &[0, 1, 2, 3, 4], &[0, 1, 2, 3, 4])
}

/// `det(A0^{-1} A1)` evaluated from the assembled matrices.
pub fn boundary_det(u: &StateVec, x: f64, pp: &PhysParams, eps: f64) -> Result<f64> {
    let m = assemble(u, x, pp, eps)?;
    let mut scaled = m.a1;
    for i in 0..5 {
        let d = m.a0[(i, i)];
        for j in 0..5 {
            scaled[(i, j)] /= d;
        }
    }
    Ok(det_cofactor(&scaled))
}

/// Scale for judging `boundary_det` against zero: the product of the row
/// norms of `A0^{-1} A1` (Hadamard's bound).
pub fn boundary_det_scale(u: &StateVec, x: f64, pp: &PhysParams, eps: f64) -> Result<f64> {
    let m = assemble(u, x, pp, eps)?;
    Ok((0..5)
        .map(|i| m.a1.row(i).norm() / m.a0[(i, i)])
        .product())
}

/// Closed form `eps R b(x) theta / (v^2 Z(theta) e_theta(theta, q))`.
pub fn boundary_det_closed_form(u: &StateVec, x: f64, pp: &PhysParams, eps: f64) -> Result<f64> {
    let (v, theta, q) = (u[0], u[2], u[3]);
    let c = node_coeffs(theta, q, pp)?;
    Ok(eps * pp.r * b_of_x(x) * theta / (v * v * c.z.z * c.energy.e_theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn x(self) -> f64 {
        match self {
            Side::Left => 0.0,
            Side::Right => 1.0,
        }
    }

    /// Outward normal.
    pub fn normal(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

/// Boundary matrix selecting the `u` and `q` rows, plus the outward normal.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    pub m: Matrix5<f64>,
    pub nu: f64,
}

impl BoundarySpec {
    pub fn new(side: Side) -> Self {
        BoundarySpec {
            m: Matrix5::from_diagonal(&Vector5::new(0.0, 1.0, 0.0, 1.0, 0.0)),
            nu: side.normal(),
        }
    }

    /// Orthonormal basis of `ker M`: `e_v, e_theta, e_S`.
    pub fn kernel_basis(&self) -> [StateVec; 3] {
        [unit(0), unit(2), unit(4)]
    }
}

fn unit(i: usize) -> StateVec {
    let mut e = StateVec::zeros();
    e[i] = 1.0;
    e
}

/// The 26 directions of the 3x3x3 lattice around the origin, normalized.
pub fn kernel_design() -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(26);
    for i in -1i32..=1 {
        for j in -1i32..=1 {
            for k in -1i32..=1 {
                if (i, j, k) == (0, 0, 0) {
                    continue;
                }
                let n = ((i * i + j * j + k * k) as f64).sqrt();
                out.push([i as f64 / n, j as f64 / n, k as f64 / n]);
            }
        }
    }
    out
}

/// `xi^T (A1 nu) xi`.
pub fn normal_form(m: &SystemMatrices, nu: f64, xi: &StateVec) -> f64 {
    nu * (xi.transpose() * m.a1 * xi)[(0, 0)]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub side: Side,
    pub x: f64,
    pub det: f64,
    pub det_closed_form: f64,
    /// min of the normal form over the unit-sphere design in `ker M`
    pub kernel_min: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub psi3: f64,
    /// whether `psi2 < 0` is part of the verdict on this side
    pub psi2_asserted: bool,
    pub verdict: bool,
}

/// Test vectors for the three 4-dimensional superspaces of `ker M`:
/// `ker M + e_u`, `ker M + e_q`, `ker M + (e_u + e_q)`.
///
/// `psi1` and `psi3` are oriented with the outward normal so that the form
/// equals `-2 R theta / v^2` on both sides; on the right side they are
/// `(1,1,0,0,0)` and `(1,1,0,1,0)`. `psi2 = (0,0,1,-1,0)` on both sides;
/// it detects the `e_q` superspace only on the right.
pub fn psi_vectors(side: Side) -> [StateVec; 3] {
    let nu = side.normal();
    [
        StateVec::new(1.0, nu, 0.0, 0.0, 0.0),
        StateVec::new(0.0, 0.0, 1.0, -1.0, 0.0),
        StateVec::new(1.0, nu, 0.0, nu, 0.0),
    ]
}

pub fn check_maximal_nonnegativity(
    u: &StateVec,
    side: Side,
    pp: &PhysParams,
    eps: f64,
) -> Result<BoundaryReport> {
    if u[3] != 0.0 {
        return Err(Error::domain(format!(
            "boundary analysis needs q = 0 at the boundary, got q = {}",
            u[3]
        )));
    }
    let x = side.x();
    let spec = BoundarySpec::new(side);
    let m = assemble(u, x, pp, eps)?;
    let [e_v, e_th, e_s] = spec.kernel_basis();

    let kernel_min = kernel_design()
        .into_iter()
        .map(|[a, b, c]| normal_form(&m, spec.nu, &(e_v * a + e_th * b + e_s * c)))
        .fold(f64::INFINITY, f64::min);

    let [p1, p2, p3] = psi_vectors(side);
    let psi1 = normal_form(&m, spec.nu, &p1);
    let psi2 = normal_form(&m, spec.nu, &p2);
    let psi3 = normal_form(&m, spec.nu, &p3);
    let psi2_asserted = side == Side::Right;

    let verdict = kernel_min >= 0.0 && psi1 < 0.0 && psi3 < 0.0 && (!psi2_asserted || psi2 < 0.0);

    Ok(BoundaryReport {
        side,
        x,
        det: boundary_det(u, x, pp, eps)?,
        det_closed_form: boundary_det_closed_form(u, x, pp, eps)?,
        kernel_min,
        psi1,
        psi2,
        psi3,
        psi2_asserted,
        verdict,
    })
}
