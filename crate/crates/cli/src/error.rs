use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config file {path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] pdm_core::Error),

    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for input the caller can fix, 3 for numeric breakdown.
    pub fn exit_code(&self) -> i32 {
        use pdm_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Core(e) => match e {
                E::Convergence { .. } | E::NonFinite(_) | E::ZeroVector => 3,
                _ => 2,
            },
            CliError::Io { .. } => 2,
            CliError::Json(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
