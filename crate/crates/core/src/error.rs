use thiserror::Error;

/// Errors raised across the search stack.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("fixed-width integer overflow ({0})")]
    Overflow(&'static str),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("evaluation undecided after reaching precision cap ({0} bits)")]
    Undecided(u32),
}

impl Error {
    /// True for errors caused by user-facing parameters rather than runtime state.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Range(_) | Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
