use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared across the crate.
///
/// Variants are grouped by [`ErrorKind`], which the command-line driver maps
/// onto process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{key}`: {value:?} ({reason})")]
    InvalidParameter {
        key: String,
        value: String,
        reason: String,
    },

    #[error("unknown configuration key `{key}` (value {value:?})")]
    UnknownKey { key: String, value: String },

    #[error("missing required configuration key `{key}`")]
    MissingKey { key: String },

    #[error("malformed configuration line {line}: {text:?}")]
    Syntax { line: usize, text: String },

    #[error("operation requires the {expected} model, got {found}")]
    ModelMismatch {
        expected: &'static str,
        found: String,
    },

    #[error("argument {point} sits on a branch point")]
    SingularInput { point: Complex64 },

    #[error("{what} = {value} outside [0, 1]")]
    Domain { what: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("{what}: size {size} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("mean spin vanishes; squeezing parameter undefined")]
    SingularMeanSpin,

    #[error("quadrature did not converge after {intervals} subintervals (estimate {estimate}, error {error:e})")]
    Quadrature {
        estimate: Complex64,
        error: f64,
        intervals: usize,
    },

    #[error("integrand denominator vanishes on the integration path at z = {z}")]
    OnPathSingularity { z: Complex64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("not converged: {0}")]
    Convergence(String),

    #[error("bracket precondition violated: {0}")]
    Bracket(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parameter,
    Numerical,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. }
            | Error::UnknownKey { .. }
            | Error::MissingKey { .. }
            | Error::Syntax { .. }
            | Error::ModelMismatch { .. }
            | Error::Domain { .. }
            | Error::DimensionMismatch { .. }
            | Error::TooLarge { .. }
            | Error::InvalidState(_)
            | Error::Bracket(_) => ErrorKind::Parameter,
            Error::SingularInput { .. }
            | Error::SingularMeanSpin
            | Error::Quadrature { .. }
            | Error::OnPathSingularity { .. }
            | Error::Consistency(_)
            | Error::Convergence(_) => ErrorKind::Numerical,
            Error::Io(_) | Error::Csv(_) => ErrorKind::Io,
        }
    }

    pub(crate) fn invalid(key: &str, value: impl ToString, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.into(),
        }
    }
}
