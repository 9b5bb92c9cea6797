use thiserror::Error;

/// Errors surfaced by the numerical kernels and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on user-supplied data was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An operation was evaluated outside its mathematical domain
    /// (singular point, past a blow-up horizon, outside the mesh).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative kernel failed to converge or produced non-finite values.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// The experiment configuration could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
