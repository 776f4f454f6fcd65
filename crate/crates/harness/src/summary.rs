//! Per-(scenario, method) summaries of a records CSV.
//!
//! Quartiles use the midpoint convention: the `q`-quantile of sorted values
//! `x₀ ≤ … ≤ x_{m−1}` is the average of the entries at positions
//! `⌊q(m−1)⌋` and `⌈q(m−1)⌉`. The standard deviation uses the `m − 1` divisor.

use std::io::{Read, Write};

use crate::error::{HarnessError, Result};
use crate::output::{fmt_opt, RECORDS_HEADER};

pub const SUMMARY_HEADER: [&str; 10] = [
    "scenario_id",
    "method",
    "metric",
    "count",
    "failures",
    "median",
    "q1",
    "q3",
    "mean",
    "sd",
];

const METRICS: [&str; 7] = [
    "pred_risk",
    "consistency",
    "precision",
    "recall",
    "fscore",
    "lambda",
    "df",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Stats {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub mean: f64,
    pub sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario_id: String,
    pub method: String,
    pub metric: &'static str,
    pub count: usize,
    pub failures: usize,
    /// `None` when no replication produced a value.
    pub stats: Option<Stats>,
}

/// Midpoint-convention quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    (sorted[pos.floor() as usize] + sorted[pos.ceil() as usize]) / 2.0
}

pub fn stats(values: &[f64]) -> Option<Stats> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let sd = (v.len() > 1).then(|| (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0)).sqrt());
    Some(Stats {
        median: quantile_sorted(&v, 0.5),
        q1: quantile_sorted(&v, 0.25),
        q3: quantile_sorted(&v, 0.75),
        mean,
        sd,
    })
}

struct Group {
    scenario_id: String,
    method: String,
    failures: usize,
    values: Vec<Vec<f64>>,
}

fn parse_cell(cell: &str, line: u64, column: &str) -> Result<Option<f64>> {
    if cell == "NA" || cell.is_empty() {
        return Ok(None);
    }
    cell.parse::<f64>().map(Some).map_err(|_| HarnessError::Parse {
        line,
        msg: format!("column `{column}`: {cell:?} is not a number"),
    })
}

/// Reads a records CSV and summarises every metric per (scenario, method), in
/// order of first appearance.
pub fn summarize<R: Read>(input: R) -> Result<Vec<SummaryRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(RECORDS_HEADER.iter().copied()) {
        return Err(HarnessError::Parse {
            line: 1,
            msg: "header does not match the records schema".into(),
        });
    }
    let col = |name: &str| RECORDS_HEADER.iter().position(|h| *h == name).expect("known column");
    let mut groups: Vec<Group> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            HarnessError::Parse {
                line,
                msg: e.to_string(),
            }
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != RECORDS_HEADER.len() {
            return Err(HarnessError::Parse {
                line,
                msg: format!("expected {} fields, found {}", RECORDS_HEADER.len(), rec.len()),
            });
        }
        let (sid, method) = (&rec[col("scenario_id")], &rec[col("method")]);
        let idx = match groups.iter().position(|g| g.scenario_id == sid && g.method == method) {
            Some(i) => i,
            None => {
                groups.push(Group {
                    scenario_id: sid.to_string(),
                    method: method.to_string(),
                    failures: 0,
                    values: vec![Vec::new(); METRICS.len()],
                });
                groups.len() - 1
            }
        };
        let g = &mut groups[idx];
        if !rec[col("error_code")].is_empty() {
            g.failures += 1;
        }
        for (k, metric) in METRICS.iter().enumerate() {
            if let Some(v) = parse_cell(&rec[col(metric)], line, metric)? {
                g.values[k].push(v);
            }
        }
    }
    Ok(groups
        .into_iter()
        .flat_map(|g| {
            METRICS.iter().zip(g.values).map(move |(&metric, vals)| SummaryRow {
                scenario_id: g.scenario_id.clone(),
                method: g.method.clone(),
                metric,
                count: vals.len(),
                failures: g.failures,
                stats: stats(&vals),
            })
        })
        .collect())
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        let s = r.stats.as_ref();
        w.write_record([
            r.scenario_id.clone(),
            r.method.clone(),
            r.metric.to_string(),
            r.count.to_string(),
            r.failures.to_string(),
            fmt_opt(s.map(|s| s.median)),
            fmt_opt(s.map(|s| s.q1)),
            fmt_opt(s.map(|s| s.q3)),
            fmt_opt(s.map(|s| s.mean)),
            fmt_opt(s.and_then(|s| s.sd)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_quartiles() {
        let s = stats(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        let s = stats(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (1.5, 2.5, 3.5));
    }

    #[test]
    fn single_value() {
        let s = stats(&[0.7]).unwrap();
        assert_eq!((s.median, s.mean, s.sd), (0.7, 0.7, None));
        assert!(stats(&[]).is_none());
    }
}
