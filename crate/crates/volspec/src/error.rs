use std::path::PathBuf;

use volspec_core::Error as CoreError;

/// Exit codes of the `volspec` binary.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const PRECONDITION: i32 = 4;
    pub const BOUNDARY: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("precondition failed: {0}")]
    Precondition(CoreError),

    #[error("{0}")]
    Boundary(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => exit::CONFIG,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Precondition(_) => exit::PRECONDITION,
            CliError::Boundary(_) => exit::BOUNDARY,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ConditionViolated { .. } => CliError::Precondition(e),
            CoreError::BoundaryNearZero { .. } => CliError::Boundary(e),
            CoreError::PicardNotConverged { .. } | CoreError::PhaseTracking { .. } | CoreError::Stage { .. } => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
