use thiserror::Error;

use crate::combinatorics::KSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("count {count} out of range 0..={max}")]
    InvalidCount { count: String, max: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("guard exceeded: {what} is {actual}, limit is {limit}")]
    Guard {
        what: &'static str,
        actual: String,
        limit: String,
    },

    #[error("member {member} violates the {condition}")]
    ConditionViolated {
        member: KSet,
        condition: &'static str,
    },

    #[error("{0} is undefined for an empty family")]
    EmptyFamily(&'static str),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
