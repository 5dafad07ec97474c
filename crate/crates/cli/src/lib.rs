//! Scenario runner behind the `pelab` binary.

pub mod config;
pub mod report;
pub mod scenarios;

pub use config::{ConfigError, Scenario, ScenarioConfig};
pub use report::{Outcome, Rule};
pub use scenarios::{run, run_and_write, RunError};
