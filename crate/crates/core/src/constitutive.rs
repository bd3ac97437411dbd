//! Pointwise thermodynamics of the relaxed gas.
//!
//! Pressure `p = R theta / v`, relaxation time `tau_1(theta) = tau g(theta)`,
//! `Z(theta) = tau g(theta) / kappa(theta)`, the q-dependent internal energy
//! `e(theta, q) = C_v theta + a(theta) q^2` with `a = Z/theta - Z'/2`, and the
//! derivatives of all of these that the solvers and diagnostics need.
//!
//! Every function here is a pure function of plain values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Gate, Result};

/// Lower and upper ends of the temperature band on which `kappa` and `g`
/// must be positive.
pub const COEFF_BAND: (f64, f64) = (0.5, 1.5);

/// Band for v and theta used when sampling "small data" states.
pub const ADMISSIBLE_BAND: (f64, f64) = (0.75, 1.25);

/// A smooth coefficient function of temperature with exact derivatives.
///
/// Text form (as used in config files): `const`, `const:c=<float>`,
/// `pow:alpha=<float>` for `theta^alpha`, and `poly:c0,c1,c2,c3` for
/// `c0 + c1 theta + c2 theta^2 + c3 theta^3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CoeffFn {
    Const(f64),
    Power { alpha: f64 },
    Poly([f64; 4]),
}

/// Value and first three derivatives of a scalar function at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Derivs {
    pub f: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl CoeffFn {
    pub const ONE: CoeffFn = CoeffFn::Const(1.0);

    pub fn eval(&self, theta: f64) -> Derivs {
        match *self {
            CoeffFn::Const(c) => Derivs { f: c, ..Derivs::default() },
            CoeffFn::Power { alpha } => {
                let f = theta.powf(alpha);
                let d1 = alpha * f / theta;
                let d2 = (alpha - 1.0) * d1 / theta;
                let d3 = (alpha - 2.0) * d2 / theta;
                Derivs { f, d1, d2, d3 }
            }
            CoeffFn::Poly([c0, c1, c2, c3]) => Derivs {
                f: c0 + theta * (c1 + theta * (c2 + theta * c3)),
                d1: c1 + theta * (2.0 * c2 + 3.0 * c3 * theta),
                d2: 2.0 * c2 + 6.0 * c3 * theta,
                d3: 6.0 * c3,
            },
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.eval(theta).f
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CoeffFn::Const(_))
            || matches!(self, CoeffFn::Power { alpha } if *alpha == 0.0)
            || matches!(self, CoeffFn::Poly([_, c1, c2, c3]) if *c1 == 0.0 && *c2 == 0.0 && *c3 == 0.0)
    }
}

impl Default for CoeffFn {
    fn default() -> Self {
        CoeffFn::ONE
    }
}

impl fmt::Display for CoeffFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffFn::Const(c) if *c == 1.0 => write!(f, "const"),
            CoeffFn::Const(c) => write!(f, "const:c={c:?}"),
            CoeffFn::Power { alpha } => write!(f, "pow:alpha={alpha:?}"),
            CoeffFn::Poly([c0, c1, c2, c3]) => write!(f, "poly:{c0:?},{c1:?},{c2:?},{c3:?}"),
        }
    }
}

impl FromStr for CoeffFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("bad coefficient descriptor `{s}`"));
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k.trim(), Some(r.trim())),
            None => (s, None),
        };
        match (kind, rest) {
            ("const", None) => Ok(CoeffFn::ONE),
            ("const", Some(r)) => {
                let v = r.strip_prefix("c=").ok_or_else(bad)?;
                Ok(CoeffFn::Const(parse(v)?))
            }
            ("pow", Some(r)) => {
                let v = r.strip_prefix("alpha=").ok_or_else(bad)?;
                Ok(CoeffFn::Power { alpha: parse(v)? })
            }
            ("poly", Some(r)) => {
                let cs = r.split(',').map(parse).collect::<Result<Vec<_>>>()?;
                if cs.is_empty() || cs.len() > 4 {
                    return Err(bad());
                }
                let mut c = [0.0; 4];
                c[..cs.len()].copy_from_slice(&cs);
                Ok(CoeffFn::Poly(c))
            }
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for CoeffFn {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CoeffFn> for String {
    fn from(c: CoeffFn) -> String {
        c.to_string()
    }
}

/// Physical parameters. The two relaxation times are taken equal:
/// `tau_1(theta) = tau g(theta)` and `tau_2 = tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysParams {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "Cv")]
    pub cv: f64,
    pub mu: f64,
    pub tau: f64,
    pub kappa: CoeffFn,
    pub g: CoeffFn,
    /// Require `g(1) = kappa(1) = 1`.
    pub normalized: bool,
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams {
            r: 1.0,
            cv: 1.0,
            mu: 1.0,
            tau: 1e-2,
            kappa: CoeffFn::ONE,
            g: CoeffFn::ONE,
            normalized: true,
        }
    }
}

impl PhysParams {
    pub fn with_tau(&self, tau: f64) -> Self {
        PhysParams { tau, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, val) in [("R", self.r), ("Cv", self.cv), ("mu", self.mu), ("tau", self.tau)] {
            if !(val > 0.0 && val.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {val}")));
            }
        }
        let (lo, hi) = COEFF_BAND;
        for (name, func) in [("kappa", &self.kappa), ("g", &self.g)] {
            // 1001-point scan of the band; descriptors are low-order so this
            // resolves any sign change.
            for i in 0..=1000 {
                let th = lo + (hi - lo) * i as f64 / 1000.0;
                let val = func.value(th);
                if !(val > 0.0) {
                    return Err(Error::Config(format!(
                        "{name}({th}) = {val} is not positive on [{lo}, {hi}]"
                    )));
                }
            }
            if self.normalized && (func.value(1.0) - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "{name}(1) = {} but normalized parameters require 1",
                    func.value(1.0)
                )));
            }
        }
        Ok(())
    }
}

/// One thermodynamic state point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    pub v: f64,
    pub theta: f64,
    pub q: f64,
    pub s: f64,
}

impl ThermoPoint {
    pub fn new(v: f64, theta: f64, q: f64, s: f64) -> Self {
        ThermoPoint { v, theta, q, s }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admissibility {
    Admissible,
    /// Hyperbolic, but `e_theta < C_v/2`.
    Marginal,
    Inadmissible(Gate),
}

impl Admissibility {
    pub fn is_hyperbolic(self) -> bool {
        !matches!(self, Admissibility::Inadmissible(_))
    }
}

pub fn pressure(pt: &ThermoPoint, pp: &PhysParams) -> Result<f64> {
    if !(pt.v > 0.0) {
        return Err(Error::Inadmissible { node: None, gate: Gate::SpecificVolume });
    }
    Ok(pp.r * pt.theta / pt.v)
}

/// `Z = tau g / kappa` and its first three derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZDerivs {
    pub z: f64,
    pub dz: f64,
    pub d2z: f64,
    pub d3z: f64,
}

pub fn z_of_theta(theta: f64, pp: &PhysParams) -> Result<ZDerivs> {
    if !(theta > 0.0) {
        return Err(Error::Inadmissible { node: None, gate: Gate::Temperature });
    }
    let k = pp.kappa.eval(theta);
    if !(k.f > 0.0) {
        return Err(Error::domain(format!("kappa({theta}) = {} is not positive", k.f)));
    }
    Ok(z_from(pp.tau, &pp.g.eval(theta), &k))
}

fn z_from(tau: f64, g: &Derivs, k: &Derivs) -> ZDerivs {
    // 1/kappa and its derivatives, then Leibniz on g * (1/kappa)
    let inv = 1.0 / k.f;
    let w1 = -k.d1 * inv * inv;
    let w2 = (2.0 * k.d1 * k.d1 - k.f * k.d2) * inv * inv * inv;
    let w3 = (-6.0 * k.d1.powi(3) + 6.0 * k.f * k.d1 * k.d2 - k.f * k.f * k.d3) * inv.powi(4);
    ZDerivs {
        z: tau * g.f * inv,
        dz: tau * (g.d1 * inv + g.f * w1),
        d2z: tau * (g.d2 * inv + 2.0 * g.d1 * w1 + g.f * w2),
        d3z: tau * (g.d3 * inv + 3.0 * g.d2 * w1 + 3.0 * g.d1 * w2 + g.f * w3),
    }
}

/// `a = Z/theta - Z'/2` and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ADerivs {
    pub a: f64,
    pub da: f64,
    pub d2a: f64,
}

pub fn a_of_theta(theta: f64, pp: &PhysParams) -> Result<ADerivs> {
    Ok(a_from(theta, &z_of_theta(theta, pp)?))
}

fn a_from(theta: f64, z: &ZDerivs) -> ADerivs {
    let it = 1.0 / theta;
    ADerivs {
        a: z.z * it - 0.5 * z.dz,
        da: z.dz * it - z.z * it * it - 0.5 * z.d2z,
        d2a: z.d2z * it - 2.0 * z.dz * it * it + 2.0 * z.z * it * it * it - 0.5 * z.d3z,
    }
}

/// Internal energy and the partial derivatives used by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDerivs {
    pub e: f64,
    pub e_theta: f64,
    pub e_q: f64,
    pub e_theta_theta: f64,
    pub e_theta_q: f64,
}

pub fn energy_derivatives(pt: &ThermoPoint, pp: &PhysParams) -> Result<EnergyDerivs> {
    let a = a_of_theta(pt.theta, pp)?;
    Ok(energy_from(pp.cv, pt.theta, pt.q, &a))
}

fn energy_from(cv: f64, theta: f64, q: f64, a: &ADerivs) -> EnergyDerivs {
    let q2 = q * q;
    EnergyDerivs {
        e: cv * theta + a.a * q2,
        e_theta: cv + a.da * q2,
        e_q: 2.0 * a.a * q,
        e_theta_theta: a.d2a * q2,
        e_theta_q: 2.0 * a.da * q,
    }
}

pub fn internal_energy(pt: &ThermoPoint, pp: &PhysParams) -> Result<f64> {
    Ok(energy_derivatives(pt, pp)?.e)
}

pub fn e_theta(pt: &ThermoPoint, pp: &PhysParams) -> Result<f64> {
    Ok(energy_derivatives(pt, pp)?.e_theta)
}

/// `u^2/2 + tau S^2 / (2 mu) + e(theta, q)`.
pub fn total_energy_density(pt: &ThermoPoint, u: f64, pp: &PhysParams) -> Result<f64> {
    let e = internal_energy(pt, pp)?;
    Ok(0.5 * u * u + 0.5 * pp.tau / pp.mu * pt.s * pt.s + e)
}

/// `|rho^2 e_rho - (p - theta p_theta)|`. The internal energy has no density
/// dependence and `p` is linear in `theta`, so this vanishes identically.
pub fn check_thermo_relation(pt: &ThermoPoint, pp: &PhysParams) -> f64 {
    let rho = 1.0 / pt.v;
    let e_rho = 0.0;
    let p = pp.r * rho * pt.theta;
    let p_theta = pp.r * rho;
    (rho * rho * e_rho - (p - pt.theta * p_theta)).abs()
}

/// Coefficient of `q^2` in the entropy functional:
/// `a + (Z/theta)'/2`, bounded below by `tau/4` near equilibrium.
pub fn entropy_q_weight(theta: f64, pp: &PhysParams) -> Result<f64> {
    let z = z_of_theta(theta, pp)?;
    let a = a_from(theta, &z);
    Ok(a.a + 0.5 * (z.dz / theta - z.z / (theta * theta)))
}

pub fn admissibility(pt: &ThermoPoint, pp: &PhysParams) -> Admissibility {
    if !(pt.v > 0.0) {
        return Admissibility::Inadmissible(Gate::SpecificVolume);
    }
    if !(pt.theta > 0.0) {
        return Admissibility::Inadmissible(Gate::Temperature);
    }
    match e_theta(pt, pp) {
        Ok(et) if et > 0.5 * pp.cv => Admissibility::Admissible,
        Ok(et) if et > 0.0 => Admissibility::Marginal,
        _ => Admissibility::Inadmissible(Gate::HeatCapacity),
    }
}

/// Everything the discretized equations need at one node, evaluated once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCoeffs {
    pub kappa: Derivs,
    pub g: Derivs,
    pub z: ZDerivs,
    pub a: ADerivs,
    pub energy: EnergyDerivs,
}

impl NodeCoeffs {
    /// `tau_1(theta) = tau g(theta)`.
    pub fn tau1(&self, tau: f64) -> f64 {
        tau * self.g.f
    }

    /// `2 a / Z`, the coefficient of `q theta_x` in the energy equation.
    pub fn two_a_over_z(&self) -> f64 {
        2.0 * self.a.a / self.z.z
    }

    /// `d/dtheta (2 a / Z)`.
    pub fn d_two_a_over_z(&self) -> f64 {
        2.0 * (self.a.da * self.z.z - self.a.a * self.z.dz) / (self.z.z * self.z.z)
    }

    /// `2 a / tau_1`, the coefficient of `q^2 v` in the energy source.
    pub fn two_a_over_tau1(&self, tau: f64) -> f64 {
        2.0 * self.a.a / (tau * self.g.f)
    }

    /// `d/dtheta (2 a / tau_1)`.
    pub fn d_two_a_over_tau1(&self, tau: f64) -> f64 {
        2.0 * (self.a.da * self.g.f - self.a.a * self.g.d1) / (tau * self.g.f * self.g.f)
    }
}

pub fn node_coeffs(theta: f64, q: f64, pp: &PhysParams) -> Result<NodeCoeffs> {
    if !(theta > 0.0) {
        return Err(Error::Inadmissible { node: None, gate: Gate::Temperature });
    }
    let kappa = pp.kappa.eval(theta);
    let g = pp.g.eval(theta);
    if !(kappa.f > 0.0 && g.f > 0.0) {
        return Err(Error::domain(format!(
            "coefficient functions not positive at theta = {theta}"
        )));
    }
    let z = z_from(pp.tau, &g, &kappa);
    let a = a_from(theta, &z);
    let energy = energy_from(pp.cv, theta, q, &a);
    Ok(NodeCoeffs { kappa, g, z, a, energy })
}
