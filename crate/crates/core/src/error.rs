use thiserror::Error;

/// Failure modes of the witness pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("numerical failure in {context}: {reason} (best estimate {best_re} + {best_im}i, error {err_estimate:e})")]
    NumericalFailure {
        context: String,
        reason: String,
        best_re: f64,
        best_im: f64,
        err_estimate: f64,
    },

    #[error("truncation too small: {reason}")]
    TruncationTooSmall { reason: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn numerical(context: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::NumericalFailure {
            context: context.into(),
            reason: reason.into(),
            best_re: f64::NAN,
            best_im: f64::NAN,
            err_estimate: f64::INFINITY,
        }
    }

    /// True for errors caused by bad inputs rather than numerics.
    pub fn is_invalid_parameter(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
