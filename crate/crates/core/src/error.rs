use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the solvers, the data generators and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex index {index} out of range for polytope with {count} vertices")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("polytope has no proper nonempty face")]
    NoProperFace,

    #[error("point is not feasible: {0}")]
    Infeasible(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
