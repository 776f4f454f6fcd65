//! Noise-variance estimators for `p > n`: residual variance at the
//! cross-validated lasso fit (CV), after projecting off the selected columns
//! (RMLE), and refitted cross-validation on two halves of the data (RCV).

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::datagen::{derive_seed, stream_rng};
use crate::error::{bail, Result};
use crate::linalg::{norm_sq, project_out, Matrix};
use crate::selectors::{cv_lasso, CvFit, CvOptions};
use crate::solvers::{CdOptions, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarianceKind {
    Cv,
    Rmle,
    Rcv,
}

impl VarianceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VarianceKind::Cv => "CV",
            VarianceKind::Rmle => "RMLE",
            VarianceKind::Rcv => "RCV",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceEstimate {
    pub value: f64,
    pub estimator: VarianceKind,
    /// Cross-validated `λ` behind the estimate (the first half's for RCV).
    pub lambda_cv: f64,
    /// Rank subtracted from the sample size (the larger half's for RCV).
    pub df_used: usize,
    /// `(σ̂₁², σ̂₂²)` for RCV.
    pub half_estimates: Option<(f64, f64)>,
    /// Set when the cross-validated fit was too dense and a sparser grid fit
    /// was used instead.
    pub fallback: bool,
}

/// How RCV estimates the variance on the held-out half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RcvRefit {
    /// Least squares on the held-out half, restricted to the columns selected
    /// on the other half.
    #[default]
    Ols,
    /// Residuals of the other half's lasso coefficients.
    PlugIn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceOptions {
    pub folds: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub cd: CdOptions,
    pub rcv_refit: RcvRefit,
}

impl Default for VarianceOptions {
    fn default() -> Self {
        Self {
            folds: 10,
            seed: 0,
            grid: GridSpec::default(),
            cd: CdOptions::default(),
            rcv_refit: RcvRefit::Ols,
        }
    }
}

impl VarianceOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn cv_options(&self, seed: u64) -> CvOptions {
        CvOptions {
            folds: self.folds,
            seed,
            grid: self.grid.clone(),
            cd: self.cd,
        }
    }
}

/// Cross-validated lasso guarded against near-saturated fits: a choice with
/// `df ≥ n − 1` is replaced by the densest grid fit with `df ≤ n/2`.
fn guarded_cv(x: &Matrix, y: &[f64], opts: &CvOptions) -> Result<CvFit> {
    let n = x.nrows();
    if n < 3 {
        bail!(InvalidConfig, "variance estimation needs n >= 3, got {n}");
    }
    cv_lasso(x, y, opts, Some(n - 2))
}

/// `σ̂²_CV` and `σ̂²_RMLE` computed from one shared cross-validated fit.
///
/// `σ̂²_CV = ‖Y − Xβ̂‖²/(n − df)` and `σ̂²_RMLE = ‖H⊥Y‖²/(n − df)` with `H⊥` the
/// projection off `col(X_S)`. The RMLE numerator is a least-squares minimum
/// over coefficients supported on `S`, which the lasso fit also belongs to,
/// so it is evaluated as the smaller of the two residual sums.
pub fn sigma2_cv_rmle(x: &Matrix, y: &[f64], opts: &VarianceOptions) -> Result<(VarianceEstimate, VarianceEstimate)> {
    let n = x.nrows();
    let cv = guarded_cv(x, y, &opts.cv_options(opts.seed))?;
    let df = cv.fit.df;
    if df >= n {
        bail!(Saturated, "cross-validated fit has rank {df} >= n = {n}");
    }
    let denom = (n - df) as f64;
    let rss = cv.fit.train_err * n as f64;
    let projected = if cv.fit.support.is_empty() {
        norm_sq(y)
    } else {
        let (r, _) = project_out(&x.select_columns(&cv.fit.support), y);
        norm_sq(&r)
    };
    let est = |value: f64, estimator| VarianceEstimate {
        value,
        estimator,
        lambda_cv: cv.fit.lambda,
        df_used: df,
        half_estimates: None,
        fallback: cv.fallback,
    };
    Ok((
        est(rss / denom, VarianceKind::Cv),
        est(projected.min(rss) / denom, VarianceKind::Rmle),
    ))
}

pub fn sigma2_cv(x: &Matrix, y: &[f64], opts: &VarianceOptions) -> Result<VarianceEstimate> {
    Ok(sigma2_cv_rmle(x, y, opts)?.0)
}

pub fn sigma2_rmle(x: &Matrix, y: &[f64], opts: &VarianceOptions) -> Result<VarianceEstimate> {
    Ok(sigma2_cv_rmle(x, y, opts)?.1)
}

const HALF_TAG: u64 = 0x4841_4c46; // "HALF"

/// Seeded split into halves of sizes `⌊n/2⌋` and `⌈n/2⌉`, each sorted.
pub fn half_split(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream_rng(derive_seed(seed, HALF_TAG), 0));
    let mut a = perm[..n / 2].to_vec();
    let mut b = perm[n / 2..].to_vec();
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

struct HalfEstimate {
    value: f64,
    lambda: f64,
    rank: usize,
    fallback: bool,
}

fn one_half(
    x: &Matrix,
    y: &[f64],
    select: &[usize],
    refit: &[usize],
    opts: &VarianceOptions,
    seed: u64,
) -> Result<HalfEstimate> {
    let xa = x.select_rows(select);
    let ya: Vec<f64> = select.iter().map(|&i| y[i]).collect();
    let xb = x.select_rows(refit);
    let yb: Vec<f64> = refit.iter().map(|&i| y[i]).collect();
    let cv = guarded_cv(&xa, &ya, &opts.cv_options(seed))?;
    let support = &cv.fit.support;
    let nb = refit.len();
    let (rss, rank) = if support.is_empty() {
        (norm_sq(&yb), 0)
    } else {
        let xbs = xb.select_columns(support);
        let (r, rank) = project_out(&xbs, &yb);
        match opts.rcv_refit {
            RcvRefit::Ols => (norm_sq(&r), rank),
            RcvRefit::PlugIn => {
                let fitted = xb.mul_vec(&cv.fit.beta);
                let resid: Vec<f64> = yb.iter().zip(&fitted).map(|(a, b)| a - b).collect();
                (norm_sq(&resid), rank)
            }
        }
    };
    if rank >= nb {
        bail!(
            Saturated,
            "RCV: {} selected columns span the {nb}-point refit half",
            support.len()
        );
    }
    Ok(HalfEstimate {
        value: rss / (nb - rank) as f64,
        lambda: cv.fit.lambda,
        rank,
        fallback: cv.fallback,
    })
}

/// Refitted cross-validation: select on one half by cross-validated lasso,
/// estimate on the other, swap and average.
pub fn sigma2_rcv(x: &Matrix, y: &[f64], opts: &VarianceOptions) -> Result<VarianceEstimate> {
    let n = x.nrows();
    if n < 6 {
        bail!(InvalidConfig, "RCV needs n >= 6, got {n}");
    }
    let (a, b) = half_split(n, opts.seed);
    let first = one_half(x, y, &a, &b, opts, derive_seed(opts.seed, 1))?;
    let second = one_half(x, y, &b, &a, opts, derive_seed(opts.seed, 2))?;
    Ok(VarianceEstimate {
        value: (first.value + second.value) / 2.0,
        estimator: VarianceKind::Rcv,
        lambda_cv: first.lambda,
        df_used: first.rank.max(second.rank),
        half_estimates: Some((first.value, second.value)),
        fallback: first.fallback || second.fallback,
    })
}

/// Dispatches on the estimator kind.
pub fn estimate(kind: VarianceKind, x: &Matrix, y: &[f64], opts: &VarianceOptions) -> Result<VarianceEstimate> {
    match kind {
        VarianceKind::Cv => sigma2_cv(x, y, opts),
        VarianceKind::Rmle => sigma2_rmle(x, y, opts),
        VarianceKind::Rcv => sigma2_rcv(x, y, opts),
    }
}
