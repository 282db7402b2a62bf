use std::path::PathBuf;

use krylov_gauss::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numeric(String),
    #[error("route mismatch: {0}")]
    RouteMismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Csv(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numeric(_) | CliError::RouteMismatch(_) => 2,
            CliError::Io { .. } | CliError::Csv(_) => 3,
        }
    }

    /// Greppable prefix printed in front of the message.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "KG-VALIDATION",
            CliError::Numeric(_) => "KG-NUMERIC",
            CliError::RouteMismatch(_) => "KG-ROUTE-MISMATCH",
            CliError::Io { .. } | CliError::Csv(_) => "KG-IO",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
