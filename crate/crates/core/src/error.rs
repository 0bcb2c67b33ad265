use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain the operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// The request is valid but too large for the chosen algorithm.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// No user sampled this tree or wavelet level, so its estimates are undefined.
    #[error("level {level} received no reports")]
    MissingLevel { level: usize },

    #[error("degenerate estimate: {0}")]
    DegenerateEstimate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
