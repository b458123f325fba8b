//! CLI errors and their exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Input { path: String, source: volcast::Error },

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] volcast::Error),
}

impl CliError {
    /// 1 for usage and configuration errors, 2 for data and I/O errors,
    /// 3 for estimation and fold failures.
    pub fn exit_code(&self) -> u8 {
        use volcast::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Input { .. } | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                E::Convergence { .. } | E::NoFolds { .. } | E::Search { .. } => 3,
                E::InvalidValue(_) | E::Bounds(_) => 1,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
