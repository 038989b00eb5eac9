use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::run::{EngineConfig, OptimizeOutcome};
use crate::error::{Error, Result};

#[derive(Serialize)]
struct RunArtifact<'a> {
    config: &'a EngineConfig,
    /// Whether `estimated_val` includes a fitted intercept.
    estimated_val_includes_intercept: bool,
    temperatures: Vec<f64>,
    #[serde(flatten)]
    outcome: &'a OptimizeOutcome,
}

/// Writes the config echo and every run (trajectory, final values,
/// selection, estimate) as pretty JSON.
pub fn write_run_json(
    path: impl AsRef<Path>,
    config: &EngineConfig,
    outcome: &OptimizeOutcome,
) -> Result<()> {
    let path = path.as_ref();
    let artifact = RunArtifact {
        config,
        estimated_val_includes_intercept: config.intercept,
        temperatures: config.temperatures(),
        outcome,
    };
    let text = serde_json::to_string_pretty(&artifact)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Writes `run,tau,round,best_so_far,elapsed_seconds` for every run.
pub fn write_trajectory_csv(path: impl AsRef<Path>, outcome: &OptimizeOutcome) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    writeln!(out, "run,tau,round,best_so_far,elapsed_seconds").expect("write to memory");
    for r in &outcome.runs {
        for rec in &r.trajectory {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.run, r.tau, rec.round, rec.best_so_far, rec.elapsed_seconds
            )
            .expect("write to memory");
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
