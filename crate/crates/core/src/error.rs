use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// Input-shaped problems (`Parse`, `Invalid`, `Dimension`, `RankTooLarge`) are
/// distinguished from mathematical failures so that frontends can map them to
/// different exit codes.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("ambient rank {0} unsupported (polyhedral kernel handles rank <= 4)")]
    RankTooLarge(usize),

    #[error("not Q-Gorenstein; inconsistent equations:\n  {}", .equations.join("\n  "))]
    NotQGorenstein { equations: Vec<String> },

    #[error("Q-Gorenstein data not unique; free directions remain in:\n  {}", .equations.join("\n  "))]
    AmbiguousGorenstein { equations: Vec<String> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("certificate rejected: {0}")]
    Certificate(String),

    #[error("unbounded: {0}")]
    Unbounded(String),

    #[error("not klt: {0}")]
    NotKlt(String),
}

impl Error {
    /// True for errors caused by malformed or structurally invalid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::Invalid(_) | Error::Dimension { .. } | Error::RankTooLarge(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
