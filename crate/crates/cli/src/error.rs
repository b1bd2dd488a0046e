use std::io;
use std::path::PathBuf;

use nonlocal_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl CliError {
    /// 2 for configuration errors, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NonFiniteState {
                stage,
                species,
                i,
                j,
                t,
            } => CliError::Numerical(format!(
                "non-finite state at t={t}, i={i}, j={j}, k={species} (after {stage})"
            )),
            CoreError::NonFiniteFlux {
                direction,
                species,
                face,
                t,
            } => CliError::Numerical(format!(
                "non-finite {direction}-flux at t={t}, i={}, j={}, k={species}",
                face.0, face.1
            )),
            CoreError::NonFiniteInitial { i, j, species } => CliError::Numerical(format!(
                "non-finite initial datum at t=0, i={i}, j={j}, k={species}"
            )),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
