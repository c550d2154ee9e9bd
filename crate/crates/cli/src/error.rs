//! Error type for the command-line layer, carrying the process exit code.
//!
//! Exit-code contract: 0 success, 1 usage or configuration problem,
//! 2 numerical abort (including i/o failures mid-run), 3 invariant
//! violation (an identity, bound, or geometric guarantee failed).

use bqpatch_core::error::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad invocation, unreadable or invalid configuration.
    #[error("{0}")]
    Usage(String),
    /// The run itself failed: solver abort, non-finite state, i/o.
    #[error("{0}")]
    Numerical(String),
    /// A checked invariant did not hold.
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o: {e}"))
    }
}

/// Core errors raised while interpreting configuration or seeding a run
/// are the user's to fix.
pub fn setup_err(e: CoreError) -> CliError {
    CliError::Usage(e.to_string())
}

/// Core errors raised mid-run: violated invariants keep their class,
/// everything else is a numerical abort.
pub fn run_err(e: CoreError) -> CliError {
    match e {
        CoreError::LemmaViolation(_) => CliError::Invariant(e.to_string()),
        _ => CliError::Numerical(e.to_string()),
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
