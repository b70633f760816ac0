use thiserror::Error;

/// Errors produced by the matcher library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed or inconsistent input (bad distribution, empty composition, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The precision parameter cannot support the requested model or length.
    #[error("configuration error: {0}")]
    Config(String),

    /// A codeword walked into a child interval of zero width.
    #[error("symbol {symbol} at step {step} selects a zero-width interval")]
    ZeroWidthChild { step: usize, symbol: usize },

    /// The codeword is a valid sequence but its interval holds no input point.
    #[error("codeword is outside the encoder image: {0}")]
    DecodeOutsideImage(String),

    /// Exhaustive enumeration requested on an instance that is too large.
    #[error("instance too large for exhaustive enumeration: {0}")]
    InstanceTooLarge(String),

    /// Broken internal invariant. Never expected in practice.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
