use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemSpec;

use super::conventional::conventional_run;
use super::rng::RandomStream;
use super::samples::{yearly_grid, FptSampleSet, RunRecord};
use super::unif::{CorrelationMode, UnifEngine};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_runs: u64,
    pub seed: u64,
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
    /// Reporting grid; empty means yearly up to the horizon.
    pub grid: Vec<f64>,
    pub correlation: CorrelationMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_runs: 100_000,
            seed: 0,
            workers: 0,
            grid: Vec::new(),
            correlation: CorrelationMode::default(),
        }
    }
}

impl SimConfig {
    fn grid_for(&self, system: &SystemSpec) -> Vec<f64> {
        if self.grid.is_empty() {
            yearly_grid(system.horizon)
        } else {
            self.grid.clone()
        }
    }
}

fn run_parallel<F>(system: &SystemSpec, config: &SimConfig, f: F) -> Result<FptSampleSet>
where
    F: Fn(u64, &mut RandomStream) -> Result<RunRecord> + Sync,
{
    if config.n_runs == 0 {
        return Err(Error::InvalidModel("number of runs must be positive".into()));
    }
    system.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidModel(format!("thread pool: {e}")))?;
    // Each run owns a substream, so results do not depend on scheduling.
    let records: Result<Vec<RunRecord>> = pool.install(|| {
        (0..config.n_runs)
            .into_par_iter()
            .map(|k| f(k, &mut RandomStream::new(config.seed, k)))
            .collect()
    });
    let names = system.firms.iter().map(|f| f.name.clone()).collect();
    Ok(FptSampleSet::from_records(
        names,
        system.horizon,
        config.grid_for(system),
        records?,
    ))
}

/// Runs the uniform-sampling estimator.
pub fn simulate(system: &SystemSpec, config: &SimConfig) -> Result<FptSampleSet> {
    let engine = UnifEngine::new(system, config.correlation)?;
    run_parallel(system, config, |k, rng| Ok(engine.run(k, rng)))
}

/// Runs the Euler oracle with step `dt`.
pub fn simulate_conventional(system: &SystemSpec, config: &SimConfig, dt: f64) -> Result<FptSampleSet> {
    run_parallel(system, config, |k, rng| conventional_run(system, dt, k, rng))
}
