use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::StateTag;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("operation requires a normal state, got {0:?}")]
    NotNormalState(StateTag),

    #[error("value iteration did not converge after {sweeps} sweeps (residual {residual:e}, tolerance {tolerance:e})")]
    NonConvergence {
        sweeps: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("corrupt wait-map file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },

    #[error("wait-map dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("command has no maneuver axis, no intent to extract")]
    NoIntent,

    #[error("infeasible encounter geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("group {0} requires a wait map but none was supplied")]
    MissingMap(String),

    #[error("schema mismatch in {path}: {reason}")]
    Schema { path: PathBuf, reason: String },

    #[error("reports were produced from different encounter sets ({0} vs {1})")]
    UnpairedBatch(String, String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
