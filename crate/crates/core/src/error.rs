use thiserror::Error;

/// Errors raised by the evaluators.
///
/// Parameter problems (`InvalidArgument`, `Divergent`, `UnknownIdentity`) are
/// caller mistakes; `PrecisionNotReached` means an evaluator could not certify
/// the requested accuracy within its internal limits.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("divergent: requires m > r (got r = {r}, m = {m})")]
    Divergent { r: u32, m: u32 },
    #[error("unknown identity: {0}")]
    UnknownIdentity(String),
    #[error("could not certify {digits} digits: {reason}")]
    PrecisionNotReached { digits: u32, reason: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by the caller's parameters rather than by the
    /// evaluator itself.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::PrecisionNotReached { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
