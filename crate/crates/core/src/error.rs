use thiserror::Error;

/// Errors raised by scenario loading, model evaluation and optimization.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration parse error: {0}")]
    Parse(String),

    #[error("{field} {reason}")]
    InvalidParam { field: String, reason: String },

    #[error("unknown period `{0}`")]
    UnknownPeriod(String),

    #[error("x = {x} km lies outside [0, {radius}] km")]
    OutOfDomain { x: f64, radius: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no stop fits: stop spacing {d} km >= 2·l = {limit} km")]
    NoStopFits { d: f64, limit: f64 },

    #[error("infeasible at x = {x} km: {constraint}")]
    Infeasible { x: f64, constraint: String },

    #[error("sweep over `{0}` exhausted its bounds without finding a minimum")]
    SweepExhausted(String),

    #[error("missing period result for `{0}`")]
    MissingPeriod(String),

    #[error("reference cost is zero; gain undefined")]
    ZeroReference,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn infeasible(x: f64, constraint: impl Into<String>) -> Self {
        Error::Infeasible {
            x,
            constraint: constraint.into(),
        }
    }
}
