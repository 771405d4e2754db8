use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// A config value failed validation.
    #[error("{path}: `{field}`: {message}")]
    Config {
        path: PathBuf,
        field: String,
        message: String,
    },

    /// TOML syntax or type error; the message carries line and column.
    #[error("{path}: {message}")]
    ConfigSyntax { path: PathBuf, message: String },

    /// Hamiltonian file grammar error.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Failure inside the numerical core.
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: qspan_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("writing {path}: {message}")]
    Output { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 2 for bad input, 3 when the numerics could not deliver, 1 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::ConfigSyntax { .. } | Self::Parse { .. } => 2,
            Self::Numerical { source, .. } => match source {
                qspan_core::Error::Domain { .. }
                | qspan_core::Error::Invalid(_)
                | qspan_core::Error::TooLarge { .. } => 2,
                _ => 3,
            },
            Self::Io { .. } | Self::Output { .. } => 1,
        }
    }
}

/// Attaches a context string to core errors.
pub(crate) trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for qspan_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| CliError::Numerical {
            context: what(),
            source,
        })
    }
}
