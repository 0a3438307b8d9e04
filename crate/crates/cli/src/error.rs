use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("cannot read config {path}: {source}")]
    ConfigRead {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },
    #[error("stage `{stage}`{}: {source}", window.map(|w| format!(" (window {w})")).unwrap_or_default())]
    Stage {
        stage: &'static str,
        window: Option<usize>,
        #[source]
        source: graphdrift::Error,
    },
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn stage(stage: &'static str, source: graphdrift::Error) -> Self {
        CliError::Stage {
            stage,
            window: None,
            source,
        }
    }

    /// Process exit code: 1 for validation problems, 2 for pipeline failures.
    pub fn exit_code(&self) -> i32 {
        use graphdrift::Error as E;
        match self {
            CliError::Validation(_) | CliError::ConfigRead { .. } | CliError::ConfigParse { .. } => 1,
            CliError::Stage { source, .. } => match source {
                E::Io { .. }
                | E::InvalidConfig(_)
                | E::Schema(_)
                | E::MissingColumn(_)
                | E::TooFewVariables(_)
                | E::NotBinary { .. }
                | E::TooFewWindows { .. } => 1,
                _ => 2,
            },
            CliError::Output { .. } | CliError::Json(_) => 2,
        }
    }
}

/// Attaches a stage name to core results.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for graphdrift::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| CliError::stage(stage, e))
    }
}
