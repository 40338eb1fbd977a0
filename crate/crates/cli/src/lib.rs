//! Command-line driver: resumable batch assessment, agreement comparison,
//! corpus reporting and single-artifact probing.

pub mod commands;
pub mod config;
pub mod state;

pub use commands::Outcome;
pub use config::RunConfig;
pub use state::{RunReport, RunState};
