use thiserror::Error;

/// Errors raised by the arithmetic and verification routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument violates the operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The request falls outside what this library supports
    /// (for example a non-quadratic twist of a character).
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A check's hypothesis is not met for this instance; nothing was checked.
    #[error("precondition not met: {0}")]
    Precondition(String),
    /// A mathematical invariant that must always hold was found broken.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidInput(format!($($arg)*))
    };
}
pub(crate) use invalid;
