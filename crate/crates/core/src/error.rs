use std::time::Duration;

use thiserror::Error;

use crate::model::RuleId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },

    #[error("malformed configuration: {0}")]
    MalformedConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("rule {0:?} removes itself; run normalize_selfmod first")]
    SelfReference(RuleId),

    #[error("phase set is not closed under self-modifying rules")]
    UnclosedPhases,

    #[error("ill-formed system: {0}")]
    Invalid(String),

    #[error("time budget of {0:?} exhausted")]
    Timeout(Duration),

    #[error("memory budget of {0} bytes exhausted")]
    OutOfMemory(usize),

    #[error("invalid parameters: {0}")]
    Params(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Timeout(_) | Error::OutOfMemory(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
