use thiserror::Error;

/// Errors raised by the numerical and statistical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("fold {fold} has {size} observations, at least 2 are required")]
    FoldTooSmall { fold: usize, size: usize },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("every fit along the lambda grid failed (last error: {last})")]
    AllFitsFailed { last: String },

    #[error("{failed} of {reps} replications failed, more than the allowed 20%")]
    TooManyFailures { failed: usize, reps: usize },
}

impl Error {
    /// True when the error comes from a numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotPositiveDefinite { .. }
            | Error::AllFitsFailed { .. }
            | Error::TooManyFailures { .. } => true,
            Error::Fold { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
