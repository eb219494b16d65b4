//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by every subsystem of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or layer shapes do not line up.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A NaN or infinity showed up where finite values are required.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An operation was invoked in the wrong state (e.g. backward before forward).
    #[error("state error: {0}")]
    State(String),

    /// An argument is outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Training data cannot support the requested task (e.g. only one class).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Training diverged (loss became non-finite).
    #[error("training diverged at step {step} (seed {seed})")]
    Divergence { seed: u64, step: usize },

    /// Configuration problems; every violation is listed.
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
