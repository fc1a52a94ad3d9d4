use std::path::PathBuf;

use trendcx_core::Error as CoreError;

/// Failure of a run, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("{0}")]
    Compute(CoreError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("acceptance check failed: {0}")]
    Acceptance(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Validation(_) => 1,
            RunError::Data { .. } | RunError::Compute(_) | RunError::Io { .. } => 2,
            RunError::Acceptance(_) => 3,
        }
    }

    pub fn data(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        RunError::Data {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. } | CoreError::KernelNotRepresentable(_) | CoreError::Unsupported(_) => {
                RunError::Validation(e.to_string())
            }
            e => RunError::Compute(e),
        }
    }
}

pub type Result<T, E = RunError> = std::result::Result<T, E>;
