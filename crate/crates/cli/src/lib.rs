//! Library side of the `banach-rep` command-line tool: configuration,
//! CSV ingestion, solver dispatch, JSON and CSV emission and the randomized
//! verification suites.

pub mod config;
pub mod data;
pub mod error;
pub mod grid;
pub mod output;
pub mod parse;
pub mod tasks;
pub mod verify;

use std::time::Instant;

use config::{RunConfig, Task};
use error::{CliError, CliResult, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_VERIFY_FAILED};

/// Executes a resolved configuration, writes every requested file and
/// returns the process exit code. Verification tallies go to stdout.
pub fn run(cfg: &RunConfig) -> CliResult<u8> {
    if cfg.task == Task::Verify {
        let s = &cfg.settings;
        let report = verify::run_suites(
            s.suite.as_deref().unwrap_or("all"),
            s.trials.unwrap_or(config::DEFAULT_TRIALS),
            cfg.seed(),
        )?;
        for line in report.lines() {
            println!("{line}");
        }
        if let Some(path) = &s.output {
            report.write(path)?;
        }
        return Ok(if report.all_passed() { EXIT_OK } else { EXIT_VERIFY_FAILED });
    }

    let start = Instant::now();
    let mut outcome = tasks::run_task(cfg)?;
    if !cfg.settings.no_timing.unwrap_or(false) {
        outcome.doc.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let output = cfg.require(&cfg.settings.output, "output")?;
    outcome.doc.write(&output)?;
    if let Some(path) = &cfg.settings.grid_output {
        let (model, spec) = outcome
            .model
            .as_ref()
            .ok_or_else(|| CliError::config(format!("{} has no prediction grid", cfg.task.name())))?;
        grid::emit_prediction_grid(model, spec, path)?;
    }
    Ok(if outcome.doc.certificates.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}
