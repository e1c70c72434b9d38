use thiserror::Error;

/// Everything that can go wrong while building, playing or checking a construction.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("enumeration refused: {len} items exceeds the cap of {cap}")]
    OverCap { len: usize, cap: usize },

    #[error("invalid decimal `{0}`: expected ASCII digits without sign or leading zeros")]
    BadDecimal(String),

    #[error("invalid fraction `{0}`: expected `p/q`, an integer, or a decimal like `0.25`")]
    BadFraction(String),

    #[error("invalid instance: {0}")]
    BadInstance(String),

    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("unsupported algorithm kind: {0}")]
    Unsupported(String),

    #[error("internal contradiction: {0}")]
    Contradiction(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed record: {0}")]
    BadRecord(String),
}

pub type Result<T> = std::result::Result<T, Error>;
