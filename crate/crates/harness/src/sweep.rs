//! Scenario × replication sweeps on a fixed-size worker pool.

use rayon::prelude::*;

use lassotune_core::datagen::{derive_seed, gen_dataset, ScenarioConfig};
use lassotune_core::metrics::EvalRecord;
use lassotune_core::MethodId;

use crate::config::SweepSpec;
use crate::error::Result;
use crate::methods::{run_methods, MethodSettings};

const METHOD_TAG: u64 = 0x4d45_5448; // "METH"

/// Seed for the selectors' own randomness (folds, splits, test samples) in
/// one replication.
pub fn replication_seed(cfg: &ScenarioConfig) -> u64 {
    derive_seed(derive_seed(cfg.seed, cfg.replication_id), METHOD_TAG)
}

/// Generates one replication and runs every method on it. A generator failure
/// is recorded against every method.
pub fn run_replication(cfg: &ScenarioConfig, methods: &[MethodId], settings: &MethodSettings) -> Vec<EvalRecord> {
    match gen_dataset(cfg) {
        Ok(data) => run_methods(&data, methods, settings, replication_seed(cfg)),
        Err(e) => methods
            .iter()
            .map(|&method| EvalRecord {
                method,
                scenario: cfg.clone(),
                replication_id: cfg.replication_id,
                lambda: None,
                sigma2_used: None,
                df: None,
                scores: None,
                error_code: Some(e.code()),
                runtime_ms: None,
            })
            .collect(),
    }
}

/// Runs `f` on every `(scenario, replication)` pair using `workers` threads
/// and returns the results in task order.
pub fn par_tasks<T, F>(spec: &SweepSpec, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&ScenarioConfig) -> T + Sync,
{
    let tasks: Vec<ScenarioConfig> = spec
        .scenarios()
        .into_iter()
        .flat_map(|s| (0..spec.replications as u64).map(move |r| s.clone().with_seed(s.seed, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(spec.workers).build()?;
    Ok(pool.install(|| tasks.par_iter().map(&f).collect()))
}

/// Every record of the sweep in canonical order: scenario id, replication,
/// then the order of `spec.methods`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<EvalRecord>> {
    spec.validate()?;
    let mut records: Vec<EvalRecord> = par_tasks(spec, |cfg| run_replication(cfg, &spec.methods, &spec.settings))?
        .into_iter()
        .flatten()
        .collect();
    let rank = |m: MethodId| spec.methods.iter().position(|&x| x == m);
    records.sort_by(|a, b| {
        (a.scenario.scenario_id(), a.replication_id, rank(a.method)).cmp(&(
            b.scenario.scenario_id(),
            b.replication_id,
            rank(b.method),
        ))
    });
    Ok(records)
}
