use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min:.3e}, largest {max:.3e})")]
    NotPsd { min: f64, max: f64 },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("perspective undefined: {0}")]
    PerspectiveUndefined(String),
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("operator is not invertible: {0}")]
    NotInvertible(String),
    #[error("support condition violated: {0}")]
    SupportCondition(String),
    #[error("structure extraction failed: {0}")]
    StructureExtraction(String),
    #[error("unknown identifier: {0}")]
    UnknownId(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
