use thiserror::Error;

/// Errors raised by the library. Each variant names the offending input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("L must be an even integer >= 6, got {0}")]
    InvalidL(i64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at token {position}: {message}")]
    Parse { position: usize, message: String },

    #[error(
        "state budget of {budget} exceeded while expanding radius {radius} \
         (visited {visited}, frontier {frontier})"
    )]
    BudgetExceeded {
        budget: usize,
        radius: u32,
        visited: usize,
        frontier: usize,
    },

    #[error("verification incomplete: {0}")]
    Incomplete(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
