use thiserror::Error;

use crate::geometry::Vec2;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A field evaluation produced a non-finite value while tracing.
    #[error("numerical failure: {message} (last valid vertex ({}, {}))", last_valid.x, last_valid.y)]
    Numerical { message: String, last_valid: Vec2 },

    /// Every kernel weight underflowed during a mean-shift step.
    #[error("mean shift start ({}, {}) is too far from the data: all kernel weights are zero", start.x, start.y)]
    StartTooFar { start: Vec2 },

    /// Gradient requested on the edge of the background support.
    #[error("density is not differentiable on the boundary of the background support at ({}, {})", at.x, at.y)]
    NondifferentiableBoundary { at: Vec2 },

    /// A malformed row in a data file; `line` is 1-based.
    #[error("{path}: line {line}: {message}")]
    Data { path: String, line: u64, message: String },

    #[error("invalid model: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
