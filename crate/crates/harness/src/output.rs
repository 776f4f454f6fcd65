//! CSV writers for sweep records, risk-experiment records and plot data.

use std::io::Write;

use lassotune_core::metrics::{EvalRecord, RiskExpRecord};

use crate::error::Result;

pub const RECORDS_HEADER: [&str; 19] = [
    "scenario_id",
    "n",
    "p",
    "rho",
    "alpha",
    "snr",
    "noise",
    "replication",
    "method",
    "lambda",
    "sigma2_used",
    "df",
    "pred_risk",
    "consistency",
    "precision",
    "recall",
    "fscore",
    "error_code",
    "runtime_ms",
];

pub const RISK_HEADER: [&str; 6] = [
    "scenario_id",
    "replication",
    "estimator",
    "estimate",
    "true_risk",
    "squared_error",
];

pub const PLOT_HEADER: [&str; 5] = ["scenario_id", "method", "metric", "replication", "value"];

/// Missing values are written as `NA`.
pub fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        v.to_string()
    }
}

pub fn write_records<W: Write>(out: W, records: &[EvalRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORDS_HEADER)?;
    for r in records {
        let s = &r.scenario;
        let sc = r.scores;
        w.write_record([
            s.scenario_id(),
            s.n.to_string(),
            s.p.to_string(),
            s.rho.to_string(),
            s.sparsity_exponent.to_string(),
            fmt_opt(s.snr),
            s.noise_kind.to_string(),
            r.replication_id.to_string(),
            r.method.to_string(),
            fmt_opt(r.lambda),
            fmt_opt(r.sigma2_used),
            fmt_opt(r.df),
            fmt_opt(sc.map(|v| v.pred_risk)),
            fmt_opt(sc.map(|v| v.consistency)),
            fmt_opt(sc.map(|v| v.precision)),
            fmt_opt(sc.map(|v| v.recall)),
            fmt_opt(sc.map(|v| v.fscore)),
            r.error_code.unwrap_or("").to_string(),
            fmt_opt(r.runtime_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per `(record, metric)` for box plots.
pub fn write_plot_data<W: Write>(out: W, records: &[EvalRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PLOT_HEADER)?;
    for r in records {
        let Some(sc) = r.scores else { continue };
        let id = r.scenario.scenario_id();
        for (metric, value) in [
            ("pred_risk", sc.pred_risk),
            ("consistency", sc.consistency),
            ("fscore", sc.fscore),
        ] {
            w.write_record([
                id.clone(),
                r.method.to_string(),
                metric.to_string(),
                r.replication_id.to_string(),
                fmt_f64(value),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_risk_records<W: Write>(out: W, rows: &[(String, u64, RiskExpRecord)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RISK_HEADER)?;
    for (id, rep, r) in rows {
        w.write_record([
            id.clone(),
            rep.to_string(),
            r.estimator.to_string(),
            fmt_f64(r.estimate),
            fmt_f64(r.true_risk),
            fmt_f64(r.squared_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}
