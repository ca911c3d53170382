use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("smoothing parameter {mu} outside (0, {mu_bar}]")]
    SmoothingOutOfRange { mu: f64, mu_bar: f64 },

    #[error("start point is not feasible (violation {violation:e})")]
    InfeasibleStart { violation: f64 },

    #[error("schedule violation at iteration {k}: beta = {beta}, L_mu = {l_mu}")]
    ScheduleViolation { k: u64, beta: f64, l_mu: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
