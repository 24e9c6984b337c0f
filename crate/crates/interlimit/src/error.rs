//! Error type shared by all modules.

use thiserror::Error;

/// Unified error enum. Variants map onto the CLI exit codes: config problems
/// exit 2, solver failures exit 3, self-test failures exit 4.
#[derive(Debug, Error)]
pub enum InterlimitError {
    /// Invalid or inconsistent configuration / parameters.
    #[error("config error: {0}")]
    Config(String),

    /// A linear or nonlinear solver failed to reach its tolerance.
    #[error("solver failure: {0}")]
    Solver(String),

    /// An internal acceptance/self-check failed during a run.
    #[error("self-check failure: {0}")]
    SelfCheck(String),

    /// File I/O problem (path included in the message).
    #[error("io error: {0}")]
    Io(String),
}

impl InterlimitError {
    /// Exit code associated with this error for the CLI.
    #[must_use]
    pub fn exit_code(&self) -> i32 {
        match self {
            InterlimitError::Config(_) => 2,
            InterlimitError::Solver(_) | InterlimitError::Io(_) => 3,
            InterlimitError::SelfCheck(_) => 4,
        }
    }
}

impl From<std::io::Error> for InterlimitError {
    fn from(e: std::io::Error) -> Self {
        InterlimitError::Io(e.to_string())
    }
}
