//! Command-line front end for the `complementarity` library: scenario files,
//! randomized sweeps, and CSV/JSON output.
//!
//! Exit codes are 0 when every check held, 1 when a check failed and 2 when
//! the input was rejected.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;

pub use error::CliError;
pub use scenario::Scenario;

/// Result of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Violation,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Self::Ok => 0,
            Self::Violation => 1,
        }
    }
}

pub const EXIT_INVALID_INPUT: u8 = 2;
