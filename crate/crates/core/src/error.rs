use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad arguments or configuration.
    Usage,
    /// Malformed or insufficient input data.
    Data,
    /// A numerical routine failed.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    SymmetryViolation { max_asymmetry: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    IterationLimit { sweeps: usize },

    #[error("non-finite gradient at parameter {index}{}", path.as_deref().map(|p| format!(" ({p})")).unwrap_or_default())]
    NonFiniteGradient { index: usize, path: Option<String> },

    #[error("numeric overflow in flow block {block}")]
    NumericOverflow { block: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("no prior mean for class label {0}")]
    MissingPrior(i64),

    #[error("class {0} has no samples")]
    MissingClass(i64),

    #[error("cannot normalize a zero-norm vector")]
    ZeroNorm,

    #[error("degenerate scatter: {0}")]
    DegenerateScatter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidConfig(_) => ErrorClass::Usage,
            Error::SymmetryViolation { .. }
            | Error::IterationLimit { .. }
            | Error::NonFiniteGradient { .. }
            | Error::NumericOverflow { .. }
            | Error::NonFinite(_) => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
