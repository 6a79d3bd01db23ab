//! Experiment orchestration: configuration, k-sweeps, fits, randomized
//! inequality checks and result files.

pub mod config;
pub mod experiments;
pub mod fit;
pub mod fuzz;
pub mod report;
pub mod sweep;

use std::path::Path;

use crate::error::{Error, Result};

pub use config::{ExperimentConfig, PotentialRecipe, RunConfig, SweepConfig};
pub use experiments::run_experiment;
pub use report::{Check, ExperimentOutput, Manifest, Table};
pub use sweep::{k_sweep, SweepReport, SweepRow};

/// Runs the experiment on a pool of `threads` workers (0 = rayon default) and
/// writes the artifacts into `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path, threads: usize) -> Result<(ExperimentOutput, Manifest)> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Contract(format!("thread pool: {e}")))?;
    let output = pool.install(|| run_experiment(cfg))?;
    let config_json = serde_json::to_string(cfg)?;
    let manifest = report::write_artifacts(
        out_dir,
        &output,
        &config_json,
        cfg.seed,
        pool.current_num_threads(),
    )?;
    Ok((output, manifest))
}

/// 0 when every check passed, 1 on a failed check or runtime error, 2 on a
/// configuration error.
pub fn exit_code(result: &Result<(ExperimentOutput, Manifest)>) -> i32 {
    match result {
        Ok((out, _)) if out.passed() => 0,
        Ok(_) => 1,
        Err(Error::Config { .. }) => 2,
        Err(_) => 1,
    }
}
