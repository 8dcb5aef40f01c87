use thiserror::Error;

/// Errors raised by the laboratory's operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A search ran out of candidates.
    #[error("not found: {0}")]
    NotFound(String),

    /// A hypothesis of a construction does not hold for the given input.
    #[error("precondition `{condition}` violated: {detail}")]
    Precondition {
        condition: &'static str,
        detail: String,
    },

    /// A grid is too coarse for the requested construction.
    #[error("resolution {have} is below the required {need}")]
    Resolution { have: u32, need: u32 },

    /// A quadrature could not certify the requested accuracy.
    #[error("accuracy: {0}")]
    Accuracy(String),

    /// A frequency integral does not converge.
    #[error("divergent integral: {0}")]
    Divergence(String),

    /// Malformed serialized input.
    #[error("format: {0}")]
    Format(String),

    /// A pipeline stage failed.
    #[error("stage `{stage}`: {inner}")]
    Stage {
        stage: &'static str,
        inner: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            inner: Box::new(self),
        }
    }
}

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}
