use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An index or value lies outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The problem is too large for exact enumeration.
    #[error("capacity exceeded: {what} needs {required} cells, limit is {limit} (use the Monte Carlo path)")]
    Capacity {
        what: String,
        required: u128,
        limit: u128,
    },

    /// `p(x) > 0` where the reference measure has `q(x) = 0`.
    #[error("support error: p({label}) = {p} but q({label}) = 0")]
    Support { label: String, p: f64 },

    /// A loss value that is not a multiple of `1/D`.
    #[error("grid error: value {value} is not on the 1/{denominator} grid")]
    Grid { value: f64, denominator: u64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Probabilities that do not form a distribution.
    #[error("invalid distribution: {0}")]
    Distribution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
