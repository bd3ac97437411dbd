use std::fmt;

use thiserror::Error;

/// Which admissibility gate a state failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    /// v <= 0
    SpecificVolume,
    /// theta <= 0
    Temperature,
    /// e_theta <= 0 (loss of hyperbolicity)
    HeatCapacity,
    /// e_theta < C_v / 2: the solution left the small-data regime
    APrioriBand,
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Gate::SpecificVolume => "specific volume v <= 0",
            Gate::Temperature => "temperature theta <= 0",
            Gate::HeatCapacity => "e_theta <= 0",
            Gate::APrioriBand => "e_theta < C_v/2",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("inadmissible state{}: {gate}", node.map(|n| format!(" at node {n}")).unwrap_or_default())]
    Inadmissible { node: Option<usize>, gate: Gate },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("Newton iteration did not converge at node {node} after {iterations} iterations")]
    NewtonDiverged { node: usize, iterations: usize },

    #[error("integration aborted at t = {t}: {reason}")]
    StepAborted { t: f64, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
