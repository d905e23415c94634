//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// One or more data columns have zero sample variance and cannot be
    /// standardized; callers must drop them upstream.
    #[error("zero-variance column(s): {}", .0.join(", "))]
    ZeroVarianceColumn(Vec<String>),

    /// The Gram matrix U·Uᵀ is rank deficient; partial correlation scores are
    /// undefined. The message names the deficiency.
    #[error("rank-deficient Gram matrix: {0}")]
    RankDeficientGram(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain error: {0}")]
    DomainError(String),

    /// The critical-threshold formula has no root in (0, 1) for these
    /// parameters.
    #[error("degenerate threshold: {0}")]
    DegenerateThreshold(String),

    #[error("vertex {0} has no neighbors at this threshold")]
    VertexNotDiscovered(usize),

    /// A numerical routine failed to converge.
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("parse error at row {row}, column {column}: {token:?} is not numeric")]
    ParseError {
        row: usize,
        column: usize,
        token: String,
    },

    #[error("missing data in column(s): {}", .0.join(", "))]
    MissingData(Vec<String>),

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("non-finite value in column {label:?} at row {row}")]
    NonFiniteValue { label: String, row: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code convention: 2 for validation and usage errors,
    /// 3 for numerical degeneracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::RankDeficientGram(_) | Error::NonConvergence(_) => 3,
            _ => 2,
        }
    }
}
