//! Scenario files, CSV output and the report/identify commands behind the `reinfect` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use commands::{
    equilibrium_report, fate_report, identify, run_scenario, simulate, stats_report, IdentifyOutcome, IdentifyRequest,
    RunSummary, Y_ONLY_NOTICE,
};
pub use config::{load, parse_config, preset, ScenarioConfig};
pub use error::{CliError, Result};
pub use table::{CsvTable, Report};
