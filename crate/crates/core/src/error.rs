use thiserror::Error;

/// Errors raised by the alpha-loss toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The requested quantity is infinite or undefined at this point.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("outside the small-radius regime: {0}")]
    OutsideRegime(String),

    /// A target alpha lies beyond the admissible evolution range.
    #[error("target alpha {target} exceeds the admissible supremum {sup}")]
    RangeExceeded { target: f64, sup: f64 },

    #[error("insufficient samples for class {class}: requested {requested}, available {available}")]
    InsufficientSamples {
        class: i8,
        requested: usize,
        available: usize,
    },

    #[error("covariance is not positive semi-definite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
