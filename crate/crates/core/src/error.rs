use std::fmt;

use thiserror::Error;

/// One failed input check, as reported by [`crate::validate_inputs`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BandCountMismatch { what: &'static str, expected: usize, found: usize },
    BinCountMismatch { what: &'static str, expected: usize, found: usize },
    GridMismatch { what: &'static str, expected: (usize, usize), found: (usize, usize) },
    NegativeEntry { what: &'static str, index: usize, value: f64 },
    EmptyDepthSupport { t_min: usize, t_max: usize, n_bin: usize },
    Other(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BandCountMismatch { what, expected, found } => {
                write!(f, "band-count mismatch: {what} has {found} bands, expected {expected}")
            }
            Violation::BinCountMismatch { what, expected, found } => {
                write!(f, "bin-count mismatch: {what} has {found} bins, expected {expected}")
            }
            Violation::GridMismatch { what, expected, found } => write!(
                f,
                "grid mismatch: {what} is {}x{}, expected {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
            Violation::NegativeEntry { what, index, value } => {
                write!(f, "negative entry in {what} at index {index}: {value}")
            }
            Violation::EmptyDepthSupport { t_min, t_max, n_bin } => write!(
                f,
                "empty depth support: [{t_min}, {t_max}] does not fit in 1..={n_bin}"
            ),
            Violation::Other(msg) => f.write_str(msg),
        }
    }
}

/// Every violation found while validating a problem instance.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} validation error(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("sweep {sweep}, pixel {pixel}: depth conditional has no support")]
    DegenerateConditional { sweep: usize, pixel: usize },

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
