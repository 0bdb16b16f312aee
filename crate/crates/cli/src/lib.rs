//! File formats and command implementations behind the `exponent` binary.
//!
//! Exit codes: 0 converged, 1 invalid input or infeasible problem, 2 not
//! converged within the iteration budget.

pub mod channel_file;
pub mod commands;
pub mod error;
pub mod result_file;

pub use commands::{run, Cli, Outcome};
pub use error::{CliError, Result};
