use thiserror::Error;

/// Errors raised by the solver, the probability layer and the simulation harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of a function.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A problem instance or demand model failed validation.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    /// A covariance block could not be factorized even at the largest jitter.
    #[error(
        "covariance matrix of dimension {dim} is not numerically positive definite \
         (factorization failed with diagonal jitter up to {max_jitter:e}); \
         check the conditioning of sigma"
    )]
    Factorization { dim: usize, max_jitter: f64 },

    /// A simulation trial failed; the trial index is kept for reporting.
    #[error("trial {index} failed: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
