use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported cumulant order {0} (only 3 and 4 are supported)")]
    UnsupportedOrder(u32),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("no root with Im w > 0 and |w| <= 5 at z = {re} + {im}i")]
    NoUpperRoot { re: f64, im: f64 },

    #[error("{count} admissible roots at z = {re} + {im}i (strict mode requires exactly one)")]
    AmbiguousRoot { re: f64, im: f64, count: usize },

    #[error("Q' does not change sign on the edge bracket [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {estimate:e} after {intervals} intervals")]
    QuadratureNonconvergence {
        a: f64,
        b: f64,
        estimate: f64,
        intervals: usize,
    },

    #[error("polynomial root finder did not converge")]
    RootFinderFailure,

    #[error("eigensolver failed: {0}")]
    SolverFailure(String),

    #[error("matrix size {n} exceeds the limit of {limit} for this operation")]
    SizeLimitExceeded { n: usize, limit: usize },

    #[error("eigenvectors were not computed for this spectrum")]
    MissingVectors,

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("estimated edge density {0} is outside (0, 1)")]
    DegenerateDensity(f64),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
