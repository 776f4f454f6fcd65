//! The oracle least-squares risk-estimation experiment over a sweep.

use std::io::Write;

use lassotune_core::datagen::{derive_seed, gen_dataset, ScenarioConfig};
use lassotune_core::metrics::{risk_estimation_experiment, RiskEstimator, RiskExpRecord};

use crate::config::SweepSpec;
use crate::error::Result;
use crate::output::write_risk_records;
use crate::sweep::{par_tasks, replication_seed};

/// Mean squared error of each estimator in one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct MseRow {
    pub scenario: ScenarioConfig,
    /// `(estimator, mean squared error over successful replications, failures)`
    /// in [`RiskEstimator::ALL`] order.
    pub mse: Vec<(RiskEstimator, f64, usize)>,
}

impl MseRow {
    pub fn get(&self, e: RiskEstimator) -> f64 {
        self.mse.iter().find(|m| m.0 == e).map_or(f64::NAN, |m| m.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskRun {
    /// `(scenario id, replication, record)` in canonical order.
    pub rows: Vec<(String, u64, RiskExpRecord)>,
    pub table: Vec<MseRow>,
}

fn failed(true_risk: f64, code: &'static str) -> Vec<RiskExpRecord> {
    RiskEstimator::ALL
        .into_iter()
        .map(|estimator| RiskExpRecord {
            estimator,
            estimate: f64::NAN,
            true_risk,
            squared_error: f64::NAN,
            error_code: Some(code),
        })
        .collect()
}

fn one_replication(cfg: &ScenarioConfig, spec: &SweepSpec) -> Vec<RiskExpRecord> {
    let seed = replication_seed(cfg);
    let opts = spec.settings.variance_options(derive_seed(seed, 1));
    gen_dataset(cfg)
        .and_then(|d| risk_estimation_experiment(&d, seed, &opts, spec.settings.n_test))
        .unwrap_or_else(|e| failed(f64::NAN, e.code()))
}

/// Arithmetic mean of the finite entries and the count of the others.
pub fn mean_finite(values: impl IntoIterator<Item = f64>) -> (f64, usize) {
    let (mut sum, mut n, mut bad) = (0.0, 0usize, 0usize);
    for v in values {
        if v.is_finite() {
            sum += v;
            n += 1;
        } else {
            bad += 1;
        }
    }
    (if n == 0 { f64::NAN } else { sum / n as f64 }, bad)
}

pub fn run_risk_experiment(spec: &SweepSpec) -> Result<RiskRun> {
    spec.validate()?;
    let per_task = par_tasks(spec, |cfg| (cfg.clone(), one_replication(cfg, spec)))?;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for scenario in spec.scenarios() {
        let id = scenario.scenario_id();
        let mine: Vec<&(ScenarioConfig, Vec<RiskExpRecord>)> =
            per_task.iter().filter(|(c, _)| c.scenario_id() == id).collect();
        for (cfg, recs) in &mine {
            for r in recs {
                rows.push((id.clone(), cfg.replication_id, r.clone()));
            }
        }
        let mse = RiskEstimator::ALL
            .into_iter()
            .map(|e| {
                let errs = mine
                    .iter()
                    .flat_map(|(_, recs)| recs.iter().filter(move |r| r.estimator == e));
                let (m, bad) = mean_finite(errs.map(|r| r.squared_error));
                (e, m, bad)
            })
            .collect();
        table.push(MseRow { scenario, mse });
    }
    Ok(RiskRun { rows, table })
}

/// The MSE table, one scenario per row and one estimator per column.
pub fn write_mse_table<W: Write>(out: W, table: &[MseRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "snr".to_string(),
        "alpha".into(),
        "p".into(),
        "rho".into(),
        "noise".into(),
    ];
    header.extend(RiskEstimator::ALL.iter().map(|e| e.to_string()));
    header.push("failures".into());
    w.write_record(&header)?;
    for row in table {
        let s = &row.scenario;
        let mut rec = vec![
            crate::output::fmt_opt(s.snr),
            s.sparsity_exponent.to_string(),
            s.p.to_string(),
            s.rho.to_string(),
            s.noise_kind.to_string(),
        ];
        rec.extend(row.mse.iter().map(|(_, m, _)| format!("{m:.6}")));
        rec.push(row.mse.iter().map(|m| m.2).sum::<usize>().to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_risk_rows<W: Write>(out: W, run: &RiskRun) -> Result<()> {
    write_risk_records(out, &run.rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_is_mean_of_squared_errors() {
        let (m, bad) = mean_finite([0.25, 1.0, 4.0]);
        assert!((m - 1.75).abs() < 1e-15);
        assert_eq!(bad, 0);
        let (m, bad) = mean_finite([f64::NAN, 2.0]);
        assert_eq!((m, bad), (2.0, 1));
    }
}
