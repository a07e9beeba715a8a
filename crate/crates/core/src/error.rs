use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite even after jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("linear system is singular: {0}")]
    SingularSystem(String),

    #[error("unsupported Matern smoothness nu = {0} (supported: 0.5, 1.5, 2.5)")]
    UnsupportedNu(f64),

    #[error("duplicate knots")]
    DuplicateKnots,

    #[error("knots are not strictly increasing")]
    UnsortedKnots,

    #[error("regression matrix G_A is rank deficient")]
    RankDeficientRegression,

    #[error("no candidate points left outside the knot set")]
    NoCandidatesLeft,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("bad schema: {0}")]
    BadSchema(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn dims(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}
