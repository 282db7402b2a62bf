use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
///
/// Variants split into two groups: parameter/contract violations
/// ([`Error::is_validation`]) and numerical-contract failures such as an
/// insufficient truncation or an inconsistent moment sequence.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("family `{family}` is not supported by {operation}")]
    UnsupportedFamily {
        family: &'static str,
        operation: &'static str,
    },

    #[error("operator is not hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("initial state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("truncation insufficient at t = {t}: tail occupation {tail:e} exceeds {threshold:e}")]
    TruncationInsufficient { t: f64, tail: f64, threshold: f64 },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("operation has no exact result: {0}")]
    Inexact(String),

    #[error("moment inconsistency at level {level}: Hankel minor ratio {value} is not positive")]
    MomentInconsistency { level: usize, value: f64 },

    #[error("complex Lanczos diagonal at level {level}: moments imply a non-hermitian generator")]
    ComplexDiagonal { level: usize },

    #[error("precision loss at level {level}: cancellation exceeded half the mantissa, retry in exact mode")]
    PrecisionLoss { level: usize },

    #[error("fock bound is negative ({value:e})")]
    NegativeBound { value: f64 },

    #[error("covariance ordering mismatch")]
    OrderingMismatch,

    #[error("singular reference covariance")]
    SingularMatrix,

    #[error("mode with p = 0 and m = 0 is undefined")]
    UndefinedMode,
}

impl Error {
    /// True for errors caused by bad input rather than a failed numerical contract.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::IndexOutOfRange { .. }
                | Error::InvalidParameter(_)
                | Error::DimensionMismatch { .. }
                | Error::UnsupportedFamily { .. }
                | Error::NotNormalized { .. }
                | Error::OrderingMismatch
                | Error::UndefinedMode
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
