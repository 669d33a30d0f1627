//! Scenario runner for the two-chain braiding simulations: config parsing,
//! sweeps and Monte Carlo ensembles, CSV and manifest output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod expr;
pub mod grid;
pub mod output;
pub mod scenario;

pub use config::{parse_config_text, parse_override, ResolvedConfig, RunConfig, ScenarioName};
pub use error::{ExperimentError, Result};
pub use output::{write_results, Manifest};
pub use scenario::{run_scenario, ResultRow, RunOutput};
