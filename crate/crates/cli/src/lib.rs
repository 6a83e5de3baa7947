//! Scenario runner for selex: configuration loading, staged execution,
//! persisted outputs and plot tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod scenario;

pub use config::{load_config, parse_config, LoadedConfig, ScenarioConfig};
pub use error::{CliError, CliResult};
pub use plot::{emit_plot_data, PlotKind};
pub use scenario::{run_scenario, RunManifest, RunRequest, Stage, Summary};
