//! File formats, reports and the command-line frontend for `twospin-core`.

pub mod cli;
pub mod format;
pub mod io;
pub mod parallel;
pub mod report;

pub use cli::{run, CliError};
