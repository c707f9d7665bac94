use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("degenerate pair: sites {0} and {1} occupy the same position")]
    DegeneratePair(usize, usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("spin index {index} out of range for a {n}-spin system")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("{n} spins exceeds the dense-simulation cap of {cap}")]
    TooManySpins { n: usize, cap: usize },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("plane {0} is not present in the model")]
    UnknownPlane(usize),

    #[error("unknown {kind} '{tag}'")]
    UnknownTag { kind: &'static str, tag: String },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    NonConvergence { achieved: f64, requested: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
