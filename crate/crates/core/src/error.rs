use thiserror::Error;

/// Errors raised while validating parameters or evaluating the Green function.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates a domain invariant. The message names the invariant.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested truncation exceeds the hard cap.
    #[error("truncation limit {requested} exceeds the hard cap of {cap}")]
    TruncationCap { requested: usize, cap: usize },

    #[error(transparent)]
    Acceleration(#[from] AccelError),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

/// Failure modes of the sequence transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AccelError {
    #[error("sequence too short: need at least {needed} entries, got {got}")]
    TooShort { needed: usize, got: usize },

    /// Two neighbouring table entries coincide, so the rhombus rule divides by zero.
    #[error("degenerate difference in the transform table")]
    DegenerateDifference,

    #[error("sequence contains a non-finite entry")]
    NonFinite,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
