use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not Hermitian (max |M - M^dag| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("support violation: eigenvector {index} of the first argument leaks {leakage:.3e} of its weight outside the support of the second")]
    SupportViolation { index: usize, leakage: f64 },

    #[error("Kraus operators are not trace preserving (||sum K^dag K - I|| = {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("POVM elements do not sum to the identity (||sum E - I|| = {deviation:.3e})")]
    IncompletePovm { deviation: f64 },

    #[error("POVM element {index} is outside 0 <= E <= I ({reason})")]
    PovmElementOutOfRange { index: usize, reason: String },

    #[error("conditional POVM branch {branch} is invalid: {message}")]
    InvalidBranch { branch: usize, message: String },

    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors caused by malformed input text rather than a violated
    /// mathematical invariant.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. })
    }
}
