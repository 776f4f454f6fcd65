//! Evaluation of fitted coefficients against the generating truth, and the
//! oracle least-squares experiment comparing risk estimators.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{StandardNormal, StudentT};

use crate::datagen::{correlate_row, derive_seed, equicorrelation_quad_form, equicorrelation_sqrt, stream_rng};
use crate::datagen::{NoiseKind, ScenarioConfig, SimulatedDataset};
use crate::error::{bail, Error, Result};
use crate::linalg::{lstsq_min_norm, Matrix};
use crate::selectors::{fold_assignment, split_rows, MethodId};
use crate::solvers::{df_lasso, ols_refit, train_error};
use crate::variance::{sigma2_cv_rmle, sigma2_rcv, VarianceOptions};

/// Default number of fresh observations behind a prediction-risk estimate.
pub const N_TEST: usize = 5000;

/// Streams test observations `(x, y)` from the law that produced `data`.
struct TestSampler {
    p: usize,
    rho: f64,
    a: f64,
    b: f64,
    sigma: f64,
    noise: NoiseKind,
    t3: StudentT<f64>,
    row: Vec<f64>,
}

impl TestSampler {
    fn new(data: &SimulatedDataset) -> Self {
        let rho = data.config.rho;
        let p = data.p();
        let (a, b) = equicorrelation_sqrt(p, rho);
        Self {
            p,
            rho,
            a,
            b,
            sigma: data.sigma2.sqrt(),
            noise: data.config.noise_kind,
            t3: StudentT::new(3.0).expect("t(3) is a valid law"),
            row: vec![0.0; p],
        }
    }

    /// Draws a design row into `self.row` and returns the noise term.
    fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        for v in self.row.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        if self.rho != 0.0 {
            correlate_row(&mut self.row, self.a, self.b);
        }
        let e: f64 = match self.noise {
            NoiseKind::Gaussian => rng.sample(StandardNormal),
            NoiseKind::ScaledT3 => rng.sample(self.t3) / 3.0.sqrt(),
        };
        debug_assert_eq!(self.row.len(), self.p);
        self.sigma * e
    }
}

/// Nonzero entries of `β* − β`.
fn sparse_gap(beta: &[f64], beta_star: &[f64]) -> Vec<(usize, f64)> {
    beta_star
        .iter()
        .zip(beta)
        .enumerate()
        .filter_map(|(j, (s, b))| {
            let d = s - b;
            (d != 0.0).then_some((j, d))
        })
        .collect()
}

/// Prediction risk `E(y − xᵀβ)² − σ²` of several coefficient vectors,
/// estimated on one shared sample of `n_test` fresh observations.
pub fn pred_risk_many<R: Rng + ?Sized>(
    betas: &[&[f64]],
    data: &SimulatedDataset,
    n_test: usize,
    rng: &mut R,
) -> Vec<f64> {
    assert!(n_test > 0, "n_test must be positive");
    let gaps: Vec<_> = betas
        .iter()
        .map(|b| {
            assert_eq!(b.len(), data.p(), "coefficient length differs from p");
            sparse_gap(b, &data.beta_star)
        })
        .collect();
    let mut sampler = TestSampler::new(data);
    let mut sse = vec![0.0; betas.len()];
    for _ in 0..n_test {
        let e = sampler.draw(rng);
        for (acc, gap) in sse.iter_mut().zip(&gaps) {
            let r = e + gap.iter().map(|&(j, d)| sampler.row[j] * d).sum::<f64>();
            *acc += r * r;
        }
    }
    sse.into_iter().map(|s| s / n_test as f64 - data.sigma2).collect()
}

pub fn pred_risk<R: Rng + ?Sized>(beta: &[f64], data: &SimulatedDataset, n_test: usize, rng: &mut R) -> f64 {
    pred_risk_many(&[beta], data, n_test, rng)[0]
}

/// The exact excess risk `(β − β*)ᵀD(β − β*)` that [`pred_risk`] estimates.
pub fn excess_risk_exact(beta: &[f64], data: &SimulatedDataset) -> f64 {
    let gap: Vec<f64> = beta.iter().zip(&data.beta_star).map(|(b, s)| b - s).collect();
    equicorrelation_quad_form(&gap, data.config.rho)
}

/// `‖β − β*‖² / ‖β*‖²`.
pub fn consistency(beta: &[f64], beta_star: &[f64]) -> Result<f64> {
    let denom: f64 = beta_star.iter().map(|v| v * v).sum();
    if denom == 0.0 {
        bail!(
            InvalidConfig,
            "consistency is undefined for a zero true coefficient vector"
        );
    }
    let num: f64 = beta.iter().zip(beta_star).map(|(b, s)| (b - s) * (b - s)).sum();
    Ok(num / denom)
}

/// `(precision, recall, F)` of an estimated support. Both supports are index
/// sets; an empty estimate has precision 0.
pub fn fscore(support: &[usize], support_star: &[usize]) -> (f64, f64, f64) {
    let hits = support.iter().filter(|j| support_star.contains(j)).count() as f64;
    let precision = if support.is_empty() {
        0.0
    } else {
        hits / support.len() as f64
    };
    let recall = if support_star.is_empty() {
        0.0
    } else {
        hits / support_star.len() as f64
    };
    let f = if precision * recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f)
}

/// Least squares on the true support.
pub fn oracle_ols(data: &SimulatedDataset) -> Result<Vec<f64>> {
    if data.support_star.len() >= data.n() {
        bail!(
            Saturated,
            "true support of size {} needs more than n = {} observations",
            data.support_star.len(),
            data.n()
        );
    }
    Ok(ols_refit(&data.x, &data.support_star, &data.y))
}

/// Every metric for one fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub pred_risk: f64,
    pub consistency: f64,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
}

impl Scores {
    /// `pred_risk` is passed in so several fits can share one test sample.
    pub fn new(beta: &[f64], support: &[usize], data: &SimulatedDataset, pred_risk: f64) -> Result<Self> {
        let (precision, recall, fscore) = fscore(support, &data.support_star);
        Ok(Self {
            pred_risk,
            consistency: consistency(beta, &data.beta_star)?,
            precision,
            recall,
            fscore,
        })
    }
}

/// One method on one replication: its scores, or why it has none.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub method: MethodId,
    pub scenario: ScenarioConfig,
    pub replication_id: u64,
    pub lambda: Option<f64>,
    pub sigma2_used: Option<f64>,
    pub df: Option<usize>,
    pub scores: Option<Scores>,
    pub error_code: Option<&'static str>,
    pub runtime_ms: Option<f64>,
}

/// Risk estimators compared in the oracle experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RiskEstimator {
    Cv2Fold,
    Cv10Fold,
    RCv2,
    RRcv2,
    RRmle2,
}

impl RiskEstimator {
    pub const ALL: [RiskEstimator; 5] = [
        RiskEstimator::Cv2Fold,
        RiskEstimator::Cv10Fold,
        RiskEstimator::RCv2,
        RiskEstimator::RRcv2,
        RiskEstimator::RRmle2,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RiskEstimator::Cv2Fold => "CV-2-Fold",
            RiskEstimator::Cv10Fold => "CV-10-Fold",
            RiskEstimator::RCv2 => "R-CV-2",
            RiskEstimator::RRcv2 => "R-RCV-2",
            RiskEstimator::RRmle2 => "R-RMLE-2",
        }
    }
}

impl fmt::Display for RiskEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RiskEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RiskEstimator::ALL
            .into_iter()
            .find(|e| e.as_str() == s.trim())
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown risk estimator {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskExpRecord {
    pub estimator: RiskEstimator,
    /// NaN when the estimator failed.
    pub estimate: f64,
    pub true_risk: f64,
    /// `(estimate − true_risk)²`.
    pub squared_error: f64,
    pub error_code: Option<&'static str>,
}

impl RiskExpRecord {
    fn new(estimator: RiskEstimator, estimate: Result<f64>, true_risk: f64) -> Self {
        match estimate {
            Ok(v) => Self {
                estimator,
                estimate: v,
                true_risk,
                squared_error: (v - true_risk) * (v - true_risk),
                error_code: None,
            },
            Err(e) => Self {
                estimator,
                estimate: f64::NAN,
                true_risk,
                squared_error: f64::NAN,
                error_code: Some(e.code()),
            },
        }
    }
}

/// K-fold cross-validation estimate of the prediction error of least squares
/// on the columns `support`.
pub fn cv_ols_error(x: &Matrix, y: &[f64], support: &[usize], k: usize, seed: u64) -> Result<f64> {
    let labels = fold_assignment(x.nrows(), k, seed)?;
    let xs = x.select_columns(support);
    let mut total = 0.0;
    for fold in 0..k {
        let (val, train) = split_rows(&labels, fold);
        let xt = xs.select_rows(&train);
        let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let coef = if support.is_empty() {
            Vec::new()
        } else {
            lstsq_min_norm(&xt, &yt)
        };
        let xv = xs.select_rows(&val);
        let fit = xv.mul_vec(&coef);
        let mse = val.iter().zip(&fit).map(|(&i, f)| (y[i] - f) * (y[i] - f)).sum::<f64>() / val.len() as f64;
        total += mse;
    }
    Ok(total / k as f64)
}

/// Full prediction-risk estimate `R̂ + σ̂² = train + 2σ̂²·df/n` of a fit.
pub fn risk_estimate_full(x: &Matrix, y: &[f64], beta: &[f64], df: usize, sigma2: f64) -> f64 {
    train_error(x, y, beta) + 2.0 * sigma2 * df as f64 / x.nrows() as f64
}

const TEST_TAG: u64 = 0x5445_5354; // "TEST"

/// Estimates the prediction risk of the oracle least-squares fit by 2- and
/// 10-fold CV and by the risk estimator with each plug-in variance, and
/// compares each with the risk on a fresh test sample of size `n_test`.
pub fn risk_estimation_experiment(
    data: &SimulatedDataset,
    seed: u64,
    var_opts: &VarianceOptions,
    n_test: usize,
) -> Result<Vec<RiskExpRecord>> {
    let beta_o = oracle_ols(data)?;
    let mut test_rng = stream_rng(derive_seed(seed, TEST_TAG), 0);
    let true_risk = pred_risk(&beta_o, data, n_test, &mut test_rng) + data.sigma2;
    let (x, y) = (&data.x, &data.y[..]);
    let df = df_lasso(x, &data.support_star);

    let opts = VarianceOptions {
        seed: derive_seed(seed, 3),
        ..var_opts.clone()
    };
    let (cv, rmle) = match sigma2_cv_rmle(x, y, &opts) {
        Ok((a, b)) => (Ok(a.value), Ok(b.value)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    let rcv = sigma2_rcv(x, y, &opts).map(|v| v.value);
    let plug = |s: Result<f64>| s.map(|s2| risk_estimate_full(x, y, &beta_o, df, s2));

    Ok(vec![
        RiskExpRecord::new(
            RiskEstimator::Cv2Fold,
            cv_ols_error(x, y, &data.support_star, 2, derive_seed(seed, 2)),
            true_risk,
        ),
        RiskExpRecord::new(
            RiskEstimator::Cv10Fold,
            cv_ols_error(x, y, &data.support_star, 10, derive_seed(seed, 10)),
            true_risk,
        ),
        RiskExpRecord::new(RiskEstimator::RCv2, plug(cv), true_risk),
        RiskExpRecord::new(RiskEstimator::RRcv2, plug(rcv), true_risk),
        RiskExpRecord::new(RiskEstimator::RRmle2, plug(rmle), true_risk),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::gen_dataset;

    #[test]
    fn fscore_cases() {
        assert_eq!(fscore(&[0, 1, 2], &[0, 1, 2]), (1.0, 1.0, 1.0));
        assert_eq!(fscore(&[4], &[0]).2, 0.0);
        assert_eq!(fscore(&[], &[0]), (0.0, 0.0, 0.0));
        let (p, r, f) = fscore(&[1, 2], &[1]);
        assert_eq!((p, r), (0.5, 1.0));
        assert!((f - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn consistency_cases() {
        let b = [1.0, 0.0, -2.0];
        assert_eq!(consistency(&b, &b).unwrap(), 0.0);
        assert_eq!(consistency(&[0.0; 3], &b).unwrap(), 1.0);
        assert_eq!(consistency(&[2.0, 0.0, -4.0], &b).unwrap(), 1.0);
        assert!(consistency(&b, &[0.0; 3]).is_err());
    }

    #[test]
    fn pred_risk_matches_quadratic_form() {
        let cfg = ScenarioConfig::new(50, 40, 0.5, 0.5, 2.0).with_seed(1, 0);
        let d = gen_dataset(&cfg).unwrap();
        let zero = vec![0.0; 40];
        let mut rng = stream_rng(9, 0);
        let risks = pred_risk_many(&[&zero, &d.beta_star], &d, 20_000, &mut rng);
        assert!((excess_risk_exact(&zero, &d) - 2.0).abs() < 1e-10);
        assert!((risks[0] - 2.0).abs() < 0.15, "{}", risks[0]);
        assert!(risks[1].abs() < 0.1, "{}", risks[1]);
    }

    #[test]
    fn oracle_recovers_noiseless_truth() {
        let cfg = ScenarioConfig::new(40, 60, 0.2, 0.5, 1.0).with_seed(2, 0);
        let mut d = gen_dataset(&cfg).unwrap();
        d.y = d.x.mul_vec(&d.beta_star);
        let b = oracle_ols(&d).unwrap();
        for (u, v) in b.iter().zip(&d.beta_star) {
            assert!((u - v).abs() < 1e-10);
        }
    }
}
