use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("curves are sampled on different grids")]
    GridMismatch,

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("insufficient data: {context} requires at least {needed}, got {got}")]
    InsufficientData {
        needed: usize,
        got: usize,
        context: &'static str,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is indefinite (smallest eigenvalue {min_eigenvalue:e})")]
    Indefinite { min_eigenvalue: f64 },

    #[error("lag {lag} out of range for {n} observations")]
    LagOutOfRange { lag: usize, n: usize },

    #[error("Kronecker path needs p_N <= {limit}, got p_N = {p_n}; use the fast statistic")]
    KroneckerTooLarge { p_n: usize, limit: usize },

    #[error("requested {requested} components but only {available} are available")]
    TooManyComponents { requested: usize, available: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
