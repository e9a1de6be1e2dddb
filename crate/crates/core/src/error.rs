use thiserror::Error;

/// Errors produced by the estimators, generators and experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite field value in cell {cell:?}")]
    Evaluation { cell: Vec<usize> },

    #[error("refused: {0}")]
    Refused(String),

    #[error("samples do not look sub-Gaussian: {0}")]
    NotSubGaussian(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
