use thiserror::Error;

/// Errors raised by the block-maxima toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("all truncated observations are tied at {0}")]
    AllTied(f64),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("{failures} of {total} bootstrap replicates failed (limit 5%): {last}")]
    TooManyFailures {
        failures: usize,
        total: usize,
        last: String,
    },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures caused by the data rather than by the caller.
    pub fn is_statistical(&self) -> bool {
        matches!(
            self,
            Error::AllTied(_)
                | Error::Degenerate(_)
                | Error::NoConvergence(_)
                | Error::TooManyFailures { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
