//! Replicates on a worker pool. Results are gathered by replicate index, so
//! aggregates do not depend on the worker count.

use ebslab_core::simulation::{self, ExperimentConfig, ExperimentResult, ExperimentSetup};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "EBSLAB_WORKERS";

/// Worker count from [`WORKERS_ENV`], defaulting to the available parallelism.
pub fn workers_from_env() -> CliResult<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |k| k.get())),
    }
}

pub fn run_parallel(config: &ExperimentConfig, workers: usize) -> CliResult<ExperimentResult> {
    let setup = ExperimentSetup::new(config.clone())?;
    let runner = setup.runner()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let outcomes = pool.install(|| (0..config.replicates).into_par_iter().map(|r| runner.replicate(r)).collect());
    Ok(simulation::aggregate(config, outcomes))
}
