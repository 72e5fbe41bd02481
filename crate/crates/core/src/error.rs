use thiserror::Error;

use crate::numerics::Rational;

#[derive(Debug, Error)]
pub enum TagError {
    #[error("denominator must be nonzero")]
    ZeroDenominator,

    #[error("cannot parse {0:?} as a rational (expected p/q, an integer, or a decimal)")]
    ParseRational(String),

    #[error("alpha must be at least 1, got {0}")]
    AlphaBelowOne(Rational),

    #[error("the window of the term 0 is undefined")]
    WindowOfZero,

    #[error("index {index} is outside the generated sequence (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("only positive integers have a Zeckendorf decomposition")]
    ZeckendorfOfZero,

    #[error(
        "pile bound {requested} exceeds the oracle limit {limit}; use sequence generation instead"
    )]
    OracleLimit { requested: u64, limit: u64 },

    #[error("no recurrence certified for alpha = {alpha} within {terms} terms")]
    Uncertified { alpha: Rational, terms: usize },

    #[error("cutoff verification failed for alpha = {alpha}: {reason}")]
    Verification { alpha: Rational, reason: String },

    #[error("illegal move: took {take} with {legal_max} allowed")]
    IllegalMove { take: String, legal_max: String },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = TagError> = std::result::Result<T, E>;
