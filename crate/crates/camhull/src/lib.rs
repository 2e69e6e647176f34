//! Scene files, run configuration, output writers and the subcommands behind
//! the `camhull` binary.

pub mod commands;
pub mod config;
pub mod obj;
pub mod output;
pub mod presets;
