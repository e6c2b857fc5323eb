use thiserror::Error;

/// Errors raised by the toolkit.
///
/// `Resource` is deliberately distinct from a negative answer: a search that
/// runs into a configured cap has not decided anything.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("unknown variable {var} (instance has {num_vars} variables)")]
    UnknownVariable { var: usize, num_vars: usize },

    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    Resource {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("invalid class expression: {0}")]
    InvalidClass(String),

    #[error("refused: {0}")]
    Refused(String),
}

impl Error {
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }

    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        Error::Malformed(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
