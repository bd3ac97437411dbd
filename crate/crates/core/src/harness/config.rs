//! Run configuration, read from a TOML file with `[section]` headers and
//! `key = value` lines.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constitutive::PhysParams;
use crate::error::{Error, Result};
use crate::initdata::Preset;
use crate::solver::{DtPolicy, SchemeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Simulate,
    RelaxStudy,
    EpsStudy,
    MmsVerify,
    BcAnalyze,
    EntropyReport,
}

impl StudyKind {
    pub const ALL: [StudyKind; 6] = [
        StudyKind::Simulate,
        StudyKind::RelaxStudy,
        StudyKind::EpsStudy,
        StudyKind::MmsVerify,
        StudyKind::BcAnalyze,
        StudyKind::EntropyReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Simulate => "simulate",
            StudyKind::RelaxStudy => "relax-study",
            StudyKind::EpsStudy => "eps-study",
            StudyKind::MmsVerify => "mms-verify",
            StudyKind::BcAnalyze => "bc-analyze",
            StudyKind::EntropyReport => "entropy-report",
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StudyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown study kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n: 128 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSection {
    pub cfl: f64,
    pub eps: f64,
    pub imex: bool,
    pub t_end: f64,
    /// fixed step; overrides `cfl` when present
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub dt_refresh: usize,
    /// implicit viscosity and conduction in the classical solver
    pub implicit_diffusion: bool,
}

impl Default for SchemeSection {
    fn default() -> Self {
        SchemeSection {
            cfl: 0.5,
            eps: 0.0,
            imex: true,
            t_end: 1.0,
            dt: None,
            dt_refresh: 10,
            implicit_diffusion: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitSection {
    pub preset: Preset,
    pub amplitude: f64,
    pub prepared: bool,
}

impl Default for InitSection {
    fn default() -> Self {
        InitSection { preset: Preset::Acoustic, amplitude: 1e-3, prepared: true }
    }
}

/// Acceptance thresholds. The slope targets are empirical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub relax_slope: f64,
    pub residual_slope: f64,
    pub eps_slope: f64,
    pub mms_order: f64,
    /// allowed growth of the running max of the weighted energy
    pub envelope_factor: f64,
    /// allowed spread of the weighted-energy maxima across tau
    pub uniformity_factor: f64,
    /// allowed per-step increase rate of the entropy functional
    pub entropy_band: f64,
    pub mass_drift: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            relax_slope: 0.5,
            residual_slope: 0.5,
            eps_slope: 0.9,
            mms_order: 1.8,
            envelope_factor: 10.0,
            uniformity_factor: 3.0,
            entropy_band: 1e-10,
            mass_drift: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<StudyKind>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tau_list: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub eps_list: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub n_list: Vec<usize>,
    pub t_compare: f64,
    /// amplitude of the manufactured solution
    pub mms_amplitude: f64,
    /// random boundary states per side and eps
    pub samples: usize,
    pub seed: u64,
    pub thresholds: Thresholds,
}

impl Default for StudySection {
    fn default() -> Self {
        StudySection {
            kind: None,
            tau_list: Vec::new(),
            eps_list: Vec::new(),
            n_list: Vec::new(),
            t_compare: 0.5,
            mms_amplitude: 0.05,
            samples: 100,
            seed: 0,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutSection {
    pub dir: PathBuf,
    /// probe interval in time units; 0 probes only at start and end
    pub cadence: f64,
}

impl Default for OutSection {
    fn default() -> Self {
        OutSection { dir: PathBuf::from("out"), cadence: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub scheme: SchemeSection,
    pub phys: PhysParams,
    pub init: InitSection,
    pub study: StudySection,
    pub out: OutSection,
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    /// Normalized TOML text; parsing it gives back an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn cadence(&self) -> Option<f64> {
        (self.out.cadence > 0.0).then_some(self.out.cadence)
    }

    pub fn scheme(&self) -> SchemeConfig {
        SchemeConfig {
            dt: match self.scheme.dt {
                Some(dt) => DtPolicy::Fixed(dt),
                None => DtPolicy::Cfl { cfl: self.scheme.cfl, refresh: self.scheme.dt_refresh },
            },
            eps: self.scheme.eps,
            imex: self.scheme.imex,
            t_end: self.scheme.t_end,
            cadence: self.cadence(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::grid::Grid::new(self.grid.n)?;
        self.scheme().validate()?;
        self.phys.validate()?;
        if !(self.out.cadence >= 0.0 && self.out.cadence.is_finite()) {
            return Err(Error::Config(format!("out.cadence must be nonnegative, got {}", self.out.cadence)));
        }
        if !(self.init.amplitude >= 0.0 && self.init.amplitude.is_finite()) {
            return Err(Error::Config(format!("init.amplitude must be nonnegative, got {}", self.init.amplitude)));
        }
        let st = &self.study;
        if st.tau_list.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Config("study.tau_list entries must be positive".into()));
        }
        if st.eps_list.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(Error::Config("study.eps_list entries must be nonnegative".into()));
        }
        for &n in &st.n_list {
            crate::grid::Grid::new(n)?;
        }
        if !(st.t_compare > 0.0 && st.t_compare.is_finite()) {
            return Err(Error::Config(format!("study.t_compare must be positive, got {}", st.t_compare)));
        }
        match st.kind {
            Some(StudyKind::RelaxStudy) if st.tau_list.is_empty() => {
                Err(Error::Config("relax-study needs a non-empty study.tau_list".into()))
            }
            Some(StudyKind::EpsStudy) if st.eps_list.is_empty() => {
                Err(Error::Config("eps-study needs a non-empty study.eps_list".into()))
            }
            Some(StudyKind::MmsVerify) if st.n_list.is_empty() => {
                Err(Error::Config("mms-verify needs a non-empty study.n_list".into()))
            }
            _ => Ok(()),
        }
    }
}
