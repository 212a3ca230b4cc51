use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
///
/// The three variants map onto distinct caller responsibilities: malformed
/// input never reached the mathematics, a contract error means the input was
/// well formed but violates an operation's precondition, and a solver error
/// means an optimisation kernel failed on an admissible instance.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
