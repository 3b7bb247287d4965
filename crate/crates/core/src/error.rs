use thiserror::Error;

/// Errors raised by the library. Numerical non-convergence is not an error:
/// it is reported through the `converged` flags on results.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("invalid inclusion: {0}")]
    InvalidInclusion(String),

    #[error("basis does not span a unital *-subalgebra: {0}")]
    NotSubalgebra(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("invalid predicate: {0}")]
    Predicate(String),

    #[error("malformed input: {0}")]
    Input(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
