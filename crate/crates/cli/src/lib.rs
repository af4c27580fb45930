//! The `zhnp` command line: pipeline stages, analyses and the assessment
//! service.

pub mod args;
pub mod commands;
pub mod meta;
pub mod server;

pub use args::{Cli, Command};
pub use commands::run;
