use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at `{token}`: {reason}")]
    Parse { token: String, reason: String },

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("point {point} out of range 1..={degree}")]
    PointOutOfRange { point: usize, degree: usize },

    #[error("group too large: order {order} exceeds limit {limit}")]
    GroupTooLarge { order: String, limit: usize },

    #[error("intersection too large to enumerate: both orders exceed limit {limit}")]
    IntersectionTooLarge { limit: usize },

    #[error("index {index} exceeds limit {limit} (limit-t)")]
    IndexTooLarge { index: String, limit: usize },

    #[error("memo table exceeded {limit} entries (limit-memo)")]
    MemoLimit { limit: usize },

    #[error("action not faithful: subgroup has a nontrivial normal core")]
    NotFaithful,

    #[error("not a subgroup of the ambient group")]
    NotSubgroup,

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("singular matrix")]
    SingularMatrix,

    #[error("excluded case: {0}")]
    ExcludedCase(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
