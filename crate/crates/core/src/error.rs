use thiserror::Error;

/// Errors raised by the library.
///
/// `Input` covers malformed arguments, `Contract` covers violated pre- or
/// post-conditions, and `Unsupported` marks shape/measure pairs that have no
/// certified evaluation path.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no continuity modulus available at {point:?}")]
    NoModulus { point: Vec<f64> },

    #[error("family is not fine at tag {tag:?}: {reason}")]
    NotFine { tag: Vec<f64>, reason: String },

    #[error("exhaustion stalled with residual {residual} above tolerance {tol}: {reason}")]
    Stalled { residual: f64, tol: f64, reason: String },

    #[error("possible non-integrability: absolute sum {abs_sum} exceeds ceiling {ceiling}")]
    NonIntegrable { abs_sum: f64, ceiling: f64 },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// True for errors caused by bad caller input rather than a failed guarantee.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. } | Error::Input(_) | Error::Unsupported(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
