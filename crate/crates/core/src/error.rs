use thiserror::Error;

use crate::params::Group;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid value for `{path}`: {message}")]
    Invalid { path: String, message: String },

    #[error("solver error: {0}")]
    Solver(String),

    #[error(
        "steady state for group {group} did not converge: residual {residual:.3e} after {iterations} iterations"
    )]
    NonConvergence {
        group: Group,
        residual: f64,
        iterations: usize,
    },

    #[error("period {period}, group {group}: {source}")]
    AtPeriod {
        period: usize,
        group: Group,
        #[source]
        source: Box<ModelError>,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error(
        "calibration target {target} for group {group} is unreachable; achievable informality share is [{lo:.6}, {hi:.6}] for tau in [0, {tau_max:.6}]"
    )]
    Infeasible {
        group: Group,
        target: f64,
        lo: f64,
        hi: f64,
        tau_max: f64,
    },
}

impl ModelError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad inputs rather than by numerics.
    pub fn is_validation(&self) -> bool {
        match self {
            ModelError::Invalid { .. } | ModelError::Domain(_) => true,
            ModelError::AtPeriod { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
