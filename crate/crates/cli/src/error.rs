use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes, one per error class.
pub mod exit {
    pub const OK: i32 = 0;
    /// Reserved for argument parsing errors (clap exits with this itself).
    pub const USAGE: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const IO: i32 = 4;
    pub const DATA: i32 = 5;
    pub const PIPELINE: i32 = 6;
    pub const ARTIFACT: i32 = 7;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid input data: {0}")]
    Data(geneprio::Error),
    #[error("pipeline error: {0}")]
    Pipeline(geneprio::Error),
    #[error("{path}: not a valid artifact: {reason}")]
    Artifact { path: PathBuf, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            CliError::Data(_) => exit::DATA,
            CliError::Pipeline(_) => exit::PIPELINE,
            CliError::Artifact { .. } => exit::ARTIFACT,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn artifact(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        CliError::Artifact {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}

impl From<geneprio::Error> for CliError {
    fn from(e: geneprio::Error) -> Self {
        use geneprio::Error as E;
        match e {
            E::Io { path, source } => CliError::Io {
                path: path.into(),
                source,
            },
            E::InvalidParameter(msg) => CliError::Config(msg),
            E::ModelFormat(msg) => CliError::Artifact {
                path: PathBuf::new(),
                reason: msg,
            },
            E::ShapeMismatch(_) | E::FoldPlan(_) => CliError::Pipeline(e),
            other => CliError::Data(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
