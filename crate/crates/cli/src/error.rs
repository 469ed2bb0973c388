use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Config(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    /// A verification check failed; the report has already been printed.
    #[error("{0}")]
    CheckFailed(String),
    #[error(transparent)]
    Core(#[from] heavymin::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 io, 2 configuration, 3 hypothesis, 4 failed check.
    pub fn exit_code(&self) -> i32 {
        use heavymin::Error as E;
        match self {
            CliError::Io { .. } | CliError::Csv(_) => 1,
            CliError::Config(_) | CliError::Json(_) => 2,
            CliError::Hypothesis(_) => 3,
            CliError::CheckFailed(_) => 4,
            CliError::Core(e) => match e {
                E::Hypothesis(_) | E::BoundedSupport(_) | E::TailAboveOne { .. } => 3,
                E::HorizonTooShort { .. } | E::BeyondHorizon(..) => 4,
                E::InvalidParameter(_)
                | E::Inadmissible(_)
                | E::NonMonotone(_)
                | E::SubsetSize(_)
                | E::Empty(_) => 2,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
