use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] ldp_range::error::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl CliError {
    /// 2 for usage problems, 3 for capacity limits, 4 for failed `--assert`
    /// checks, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        use ldp_range::error::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Library(E::Domain(_) | E::EmptyInput(_)) => 2,
            CliError::Library(E::Capacity(_)) => 3,
            CliError::Assertion(_) => 4,
            CliError::Library(_) | CliError::Io { .. } => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}
