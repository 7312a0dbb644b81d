use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock cutoff {cutoff} too small: truncated tail mass {tail:.3e} exceeds tolerance {tolerance:.3e}")]
    CutoffTooSmall {
        cutoff: usize,
        tail: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("mean spin length {magnitude:.3e} is below the direction threshold {threshold:.3e}")]
    DegenerateMeanSpin { magnitude: f64, threshold: f64 },

    #[error("eigensolver failed in excitation sector k={sector}: {reason}")]
    ConvergenceFailure { sector: usize, reason: String },

    #[error("finite-difference step {dtau:.3e} too large: Richardson discrepancy {discrepancy:.3e} exceeds {tolerance:.3e}")]
    StepTooLarge {
        dtau: f64,
        discrepancy: f64,
        tolerance: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn mismatch(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::CutoffTooSmall { .. } => "CutoffTooSmall",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DegenerateMeanSpin { .. } => "DegenerateMeanSpin",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::GridMismatch(_) => "GridMismatch",
            Error::InvalidInput { .. } => "InvalidInput",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
