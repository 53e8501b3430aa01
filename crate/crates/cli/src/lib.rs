//! Scenario runner for the fronthaul allocators: config parsing, the
//! method comparison, and CSV/JSON emitters for the figure data.

pub mod compare;
pub mod config;
pub mod emit;
pub mod error;
pub mod table1;

pub use compare::{run_comparison, Comparison, ComparisonRow, RunOptions};
pub use config::{load_config, parse_config, render_config, ChannelSpec, Method, ScenarioConfig};
pub use error::CliError;
