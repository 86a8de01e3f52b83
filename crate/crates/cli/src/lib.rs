//! Library side of the `zdistill` command-line tool: configuration parsing,
//! the verification checks, and the subcommand implementations.

pub mod checks;
pub mod commands;
pub mod config;
