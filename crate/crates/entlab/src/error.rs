//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error(
        "matrix is not Hermitian: |M[{row}][{col}] - conj(M[{col}][{row}])| = {deviation:.3e} \
         exceeds tolerance {tolerance:.3e}"
    )]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
        tolerance: f64,
    },

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("floating-point overflow in {context}")]
    Overflow { context: String },

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("microcanonical window is empty")]
    EmptyWindow,

    #[error("target {target:.6e} outside attainable range [{lo:.6e}, {hi:.6e}]")]
    TargetOutsideRange { target: f64, lo: f64, hi: f64 },

    #[error("eigensolver failed to converge ({context})")]
    NoConvergence { context: String },

    #[error("numeric invariant violated: {what} (value {value:.6e}, bound {bound:.6e})")]
    InvariantViolation {
        what: String,
        value: f64,
        bound: f64,
    },

    #[error("model file parse error at line {line}: {message}")]
    ModelFileParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    pub fn invariant(what: impl Into<String>, value: f64, bound: f64) -> Self {
        Error::InvariantViolation {
            what: what.into(),
            value,
            bound,
        }
    }
}
