//! Scenario runner for the Sinkhorn gradient flow between Gaussians.

pub mod config;
pub mod emit;
pub mod error;
pub mod run;
pub mod scenarios;

pub use config::{Output, Scenario, ScenarioConfig};
pub use emit::{emit, parse_csv, to_csv, Format};
pub use error::CliError;
pub use run::{run_scenario, Row, RunRecord};
pub use scenarios::{builtin, builtin_scenarios, BUILTIN_NAMES};
