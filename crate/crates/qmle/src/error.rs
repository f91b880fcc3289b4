//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by simulation, estimation, and experiment runs.
#[derive(Debug, Error)]
pub enum Error {
    /// A natural parameter fell outside the model's natural domain.
    #[error("parameter {value} outside the natural domain {domain:?} of model `{model}`")]
    Domain {
        model: String,
        value: f64,
        domain: (f64, f64),
    },

    /// The mean-map inverse was asked for a value outside the range of η.
    /// Signals a degenerate sample mean of the sufficient statistic.
    #[error("cannot invert mean map at y = {y} for model `{model}`: {detail}")]
    Inversion {
        model: String,
        y: f64,
        detail: String,
    },

    /// Estimation requires at least one completed interarrival and service time.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A defective sampler or an unreachable stopping target.
    #[error("simulation fault: {0}")]
    SimulationFault(String),

    /// A precondition of a numeric or experiment routine was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Malformed or misaligned input data.
    #[error("invalid input: {0}")]
    Input(String),

    /// Configuration file or flag errors.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
