use thiserror::Error;

use crate::time::SimTime;

/// Errors surfaced by the framework API.
#[derive(Debug, Error)]
pub enum DaasError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unsupported scheme `{0}`: only local configuration files are supported")]
    UnsupportedScheme(String),

    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },

    #[error("illegal state: cannot {op} while mission is {state}")]
    IllegalState { op: &'static str, state: String },

    #[error("robot `{robot}` does not support capability `{capability}`")]
    UnsupportedCapability { robot: String, capability: &'static str },

    #[error("timestamp regression: {got} precedes last published {last}")]
    TimestampRegression { last: SimTime, got: SimTime },

    #[error("no service time for analytic `{analytic}` on compute `{target}`")]
    MissingServiceTime { analytic: String, target: String },

    #[error("analytic `{0}` used before deploy")]
    NotDeployed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl DaasError {
    pub(crate) fn not_found(kind: &'static str, id: impl Into<String>) -> Self {
        DaasError::NotFound { kind, id: id.into() }
    }

    /// True for errors caused by bad input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            DaasError::Parse(_)
                | DaasError::Validation(_)
                | DaasError::UnsupportedScheme(_)
                | DaasError::NotFound { .. }
                | DaasError::MissingServiceTime { .. }
                | DaasError::InvalidArgument(_)
                | DaasError::Graph(_)
        )
    }
}

pub type Result<T, E = DaasError> = std::result::Result<T, E>;
