use std::path::PathBuf;

use toruspot_core::Error as CoreError;

/// Errors of the command layer, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// The input parsed but describes no valid problem (code 1).
    #[error("infeasible input: {0}")]
    Infeasible(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(CoreError),
    /// A verification suite reported failures.
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Infeasible(_) => 1,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }
}

impl From<CoreError> for AppError {
    /// Measures that fail validation are infeasible inputs; everything else is an error.
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NotNormalized(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::NegativeDensity(_)
            | CoreError::InvalidMeasure(_) => AppError::Infeasible(e.to_string()),
            other => AppError::Core(other),
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
