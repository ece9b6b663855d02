//! Library surface of the ledgerlens command-line tool: argument
//! definitions, architecture resolution, and the subcommand
//! implementations, kept callable for integration tests.

pub mod arch;
pub mod commands;
pub mod opts;

use ledgerlens_core::Error;

/// Process exit code for an error: 2 for configuration problems, 4 for
/// numerical failures, 3 for data and I/O problems.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) | Error::DimensionMismatch { .. } => 2,
        Error::NonFiniteGradient { .. }
        | Error::NonFiniteLoss
        | Error::TrainingAborted { .. }
        | Error::Numerical(_) => 4,
        _ => 3,
    }
}
