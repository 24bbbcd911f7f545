//! Experiment harness for online DR-submodular maximization: configuration,
//! MovieLens ingestion, presets, multi-seed runs and CSV/SVG output.

pub mod checks;
pub mod config;
pub mod error;
pub mod instance;
pub mod movielens;
pub mod plot;
pub mod presets;
pub mod runner;

pub use config::{AlgorithmConfig, CheckConfig, ExperimentConfig};
pub use error::{BenchError, Result};
pub use runner::{run_experiment, ExperimentOutput, RunResult, Summary};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "DRSUB_THREADS";

/// Configures the global rayon pool from `DRSUB_THREADS` when set. Later
/// calls (or a pool that is already running) leave the pool unchanged.
pub fn init_thread_pool() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| BenchError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Some(n))
}
