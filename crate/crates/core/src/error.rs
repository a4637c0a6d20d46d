use thiserror::Error;

use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Position in a text input, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{at}: syntax error: {message}")]
    Syntax { at: Location, message: String },

    #[error("{at}: probabilities of `{rule}` sum to {sum}, expected 1")]
    ProbabilitySum {
        at: Location,
        rule: String,
        sum: Rational,
    },

    #[error("{at}: unknown {kind} `{name}`")]
    UnknownSymbol {
        at: Location,
        kind: &'static str,
        name: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("exploration budget of {budget} states exceeded ({explored} states materialized)")]
    BudgetExceeded { explored: usize, budget: usize },

    #[error("size guard exceeded for {what}: {actual} > {limit}")]
    SizeGuard {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("machine is not a {class}: {reason}")]
    NotInClass { class: &'static str, reason: String },

    #[error("action `{action}` is a {actual} action but a {expected} outcome set was given")]
    ActionClassMismatch {
        action: String,
        expected: &'static str,
        actual: &'static str,
    },
}

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    /// True for errors caused by a resource guard rather than by the input.
    pub fn is_resource_guard(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::SizeGuard { .. })
    }
}
