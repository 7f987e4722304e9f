//! File formats and subcommands behind the `pairsolve` binary.

pub mod commands;
pub mod io;
