use thiserror::Error;

use crate::equation::Diagnostics;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero coefficient at translation index {0}")]
    ZeroCoefficient(usize),

    #[error("duplicate translation at indices {0} and {1}")]
    DuplicateTranslation(usize, usize),

    #[error("duplicate point at indices {0} and {1}")]
    DuplicatePoint(usize, usize),

    #[error("equation is not admissible: {0}")]
    Inadmissible(Diagnostics),

    #[error("eigen-solver did not converge: {0}")]
    NonConvergence(String),

    #[error("enumeration budget exceeded: {words} words at level {level} (budget {budget})")]
    BudgetExceeded {
        level: usize,
        words: u128,
        budget: u64,
    },

    #[error("empty word")]
    EmptyWord,

    #[error("translation index {0} out of range")]
    BadDigit(usize),

    #[error("no runner-up exists: the translation set has a single element")]
    NoRunnerUp,

    #[error("degenerate direction: {0}")]
    DegenerateDirection(String),

    #[error("sum rule violated: sum of coefficients {sum} differs from |det A| = {det}")]
    SumRule { sum: f64, det: f64 },

    #[error("decay fit ill-posed: {0}")]
    IllPosedFit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
