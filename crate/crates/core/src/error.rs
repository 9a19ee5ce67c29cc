use thiserror::Error;

/// Errors produced by the tomography toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid effect: {0}")]
    InvalidEffect(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid Choi matrix: {0}")]
    InvalidChoi(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("infeasible confidence target: {0}")]
    InfeasibleAllocation(String),

    #[error("unbounded region: {0}")]
    Unbounded(String),

    #[error("empty confidence region: {0}")]
    EmptyRegion(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
