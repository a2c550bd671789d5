use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("basis index {index} out of range (n_max = {n_max})")]
    IndexOutOfRange { index: usize, n_max: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("basis and integral table disagree: {0}")]
    BasisTableMismatch(String),

    #[error("eigensolver failed on block {context}")]
    SolverFailure { context: String },

    #[error("integral table cache rejected: {0}")]
    CacheInvalid(String),

    #[error("oracle did not converge: {0}")]
    OracleNonConvergence(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
