use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("series too short: need at least {needed} points, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("timestamps not strictly increasing at index {index}")]
    NonIncreasing { index: usize },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("timestamp axes have an empty intersection")]
    EmptyIntersection,
    #[error("duplicate asset name `{0}`")]
    DuplicateAsset(String),
    #[error("kernel cannot be realized by a stationary process: {0}")]
    KernelNotRepresentable(String),
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
