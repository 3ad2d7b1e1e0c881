use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid configuration at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{0}")]
    Core(#[from] orbitkit::error::Error),

    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 I/O, 2 configuration, 3 hypotheses, 4 numerical, 5 invariant.
    pub fn exit_code(&self) -> i32 {
        use orbitkit::error::Error as E;
        match self {
            CliError::Io { .. } => 1,
            CliError::Config { .. } => 2,
            CliError::Validation(_) => 5,
            CliError::Core(e) => match e {
                E::HypothesisViolated(_) => 3,
                E::InvariantBreach(_) | E::AuditFailed(_) => 5,
                e if e.is_numerical() => 4,
                _ => 2,
            },
        }
    }
}
