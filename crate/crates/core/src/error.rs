use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Reasons an [`Instance`](crate::Instance) is rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("matrix has {rows} rows but b has length {b_len}")]
    RowMismatch { rows: usize, b_len: usize },
    #[error("declared {what} = {declared} but data has {actual}")]
    DeclaredShape {
        what: &'static str,
        declared: usize,
        actual: usize,
    },
    #[error("matrix must have at least one column")]
    NoColumns,
    #[error("sparsity s = {s} must be at most n - 1 = {}", .n - 1)]
    SparsityNotBelowColumns { s: usize, n: usize },
    #[error("sparsity s = {s} exceeds the number of measurements m = {m}")]
    SparsityExceedsMeasurements { s: usize, m: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid tolerance: {0}")]
    Tolerance(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    Validation(#[from] ValidationError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("matrix with {cols} columns has numerical rank {rank}")]
    RankDeficient { rank: usize, cols: usize },
    #[error("point has {support_size} nonzero entries but s = {s}")]
    Infeasible { support_size: usize, s: usize },
    #[error("point is not M-stationary (residual {residual:e} > {tol:e})")]
    NotStationary { residual: f64, tol: f64 },
    #[error("argument out of range: {0}")]
    OutOfRange(String),
}

impl Error {
    /// True for errors caused by the caller's data rather than by the computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::InvalidInput(_) | Error::Parse { .. }
        )
    }
}
