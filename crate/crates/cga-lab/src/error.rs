//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library and the command-line front end.
#[derive(Debug, Error)]
pub enum LabError {
    /// A (n, mu) combination that does not yield a valid frequency grid.
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    /// A parameter outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An exhaustive computation was requested above its size cutoff.
    #[error("instance too large: {0}")]
    TooLarge(String),

    /// A state construction target that cannot be met on the grid.
    #[error("infeasible target: {0}")]
    Infeasible(String),

    /// Unknown claim id passed to the verifier dispatch.
    #[error("unknown claim id '{0}'")]
    UnknownClaim(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }
}
