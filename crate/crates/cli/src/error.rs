use thiserror::Error;

/// Failures mapped to process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(dioph_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0} invariant check(s) failed")]
    Violations(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Violations(_) => 1,
            Self::Usage(_) | Self::Config(_) => 2,
            Self::Core(dioph_core::Error::Budget { .. }) => 3,
            Self::Core(_) => 2,
            Self::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}

impl From<dioph_core::Error> for CliError {
    fn from(e: dioph_core::Error) -> Self {
        Self::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
