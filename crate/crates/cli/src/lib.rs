//! Configuration and subcommands behind the `danrl` binary.

pub mod commands;
pub mod config;

pub use commands::{cmd_eval, cmd_grid, cmd_synth, cmd_train, evaluate, grid_search, GridRow};
pub use config::{DatasetFormat, GridSpec, RunConfig, Task, UsageError};
