use std::path::PathBuf;

/// Application-level errors with their process exit codes: 2 for input or
/// configuration problems, 3 for numerical non-convergence.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::NonConvergence(_) => 3,
        }
    }
}

impl From<mesinar_core::Error> for CliError {
    fn from(e: mesinar_core::Error) -> Self {
        match e {
            mesinar_core::Error::FitDidNotConverge(_) | mesinar_core::Error::NoConvergence => {
                CliError::NonConvergence(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}
