//! Parallel drivers, file formats and command implementations on top of `shiftlab-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod par;

pub use commands::{run, Command};
pub use config::RunConfig;
pub use error::CliError;
