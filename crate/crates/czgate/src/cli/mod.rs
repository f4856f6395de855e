//! Command implementations behind the `czgate` binary.

pub mod commands;
pub mod config;
pub mod sweep;
pub mod table;

pub use commands::{cmd_compare, cmd_gate, cmd_leakage, cmd_spectrum, CommandOutput};
pub use config::{Grid, RunConfig, SweepConfig};
pub use table::Table;
