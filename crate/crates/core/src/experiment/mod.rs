//! Experiment configuration and the command drivers behind the CLI.
//!
//! Results live under `<out>/<dataset>/<setting>/<method>/`, one `row.json`
//! per cell plus `run.json` and `trajectory.csv` for the engine. Summaries
//! can always be regenerated from those rows.

mod commands;
mod config;

pub use commands::{
    baseline_prepared, cell_dir, cmd_baseline, cmd_bench, cmd_optimize, cmd_report, config_files,
    optimize_prepared, prepare, resolve_methods, BenchOutcome, CellOutcome, Prepared, ReportOutcome,
    TrajectorySummary, ENGINE_METHOD,
};
pub use config::{DatasetConfig, ExperimentConfig, Overrides, Setting};

use crate::error::Error;

/// Process exit status for an error: 2 for usage and configuration
/// problems, 1 for failures while running.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } | Error::InvalidSpec(_) | Error::Io { .. } | Error::Parse { .. } => 2,
        _ => 1,
    }
}
