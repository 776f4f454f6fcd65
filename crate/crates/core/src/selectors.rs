//! Tuning-parameter selectors: unbiased-risk minimisation with a plug-in noise
//! variance, the generalized information criteria (AIC, BIC, GCV), K-fold
//! cross-validation, the GCV-screened two-stage method, scaled sparse
//! regression and the square-root lasso.
//!
//! Grid-based work (cross-validation, variance estimation) runs on a shared
//! `λ` grid so fold errors are comparable; risk-estimator minimisation runs on
//! the exact lasso path knots.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::seq::SliceRandom;

use crate::datagen::{derive_seed, stream_rng};
use crate::error::{bail, Error, Result};
use crate::linalg::{dot, norm_sq, Matrix};
use crate::quantile::norm_quantile;
use crate::solvers::{
    df_lasso, lasso_path, ols_refit, support_of, train_error, CdOptions, CoordinateDescent, FittedModel, GridSpec,
    LambdaGrid, LassoPath,
};
use crate::variance::{self, VarianceOptions};

/// Identifiers of every selection method the crate implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    Cv10Fold,
    RiskCv2,
    RiskRmle2,
    RiskRcv2,
    RiskCvLogn,
    TwoStage,
    Ssr,
    Sqrt,
    SqrtRefitted,
    Gcv,
    Aic,
    Bic,
    /// Risk estimate with a fixed, assumed-known noise variance.
    RiskKnown,
}

impl MethodId {
    /// The methods compared in the simulation study, in reporting order.
    pub const STUDY: [MethodId; 9] = [
        MethodId::Cv10Fold,
        MethodId::RiskCv2,
        MethodId::RiskRmle2,
        MethodId::RiskRcv2,
        MethodId::RiskCvLogn,
        MethodId::TwoStage,
        MethodId::Ssr,
        MethodId::Sqrt,
        MethodId::SqrtRefitted,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodId::Cv10Fold => "CV-10-Fold",
            MethodId::RiskCv2 => "R-CV-2",
            MethodId::RiskRmle2 => "R-RMLE-2",
            MethodId::RiskRcv2 => "R-RCV-2",
            MethodId::RiskCvLogn => "R-CV-logn",
            MethodId::TwoStage => "2-stage",
            MethodId::Ssr => "SSR",
            MethodId::Sqrt => "SQRT",
            MethodId::SqrtRefitted => "SQRT-refitted",
            MethodId::Gcv => "GCV",
            MethodId::Aic => "AIC",
            MethodId::Bic => "BIC",
            MethodId::RiskKnown => "R-known",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let all = [
            MethodId::Cv10Fold,
            MethodId::RiskCv2,
            MethodId::RiskRmle2,
            MethodId::RiskRcv2,
            MethodId::RiskCvLogn,
            MethodId::TwoStage,
            MethodId::Ssr,
            MethodId::Sqrt,
            MethodId::SqrtRefitted,
            MethodId::Gcv,
            MethodId::Aic,
            MethodId::Bic,
            MethodId::RiskKnown,
        ];
        all.into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .or_else(|| match s.to_ascii_lowercase().as_str() {
                "sqrt refitted" | "sqrt_refitted" => Some(MethodId::SqrtRefitted),
                "two-stage" | "2stage" => Some(MethodId::TwoStage),
                _ => None,
            })
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

/// Criterion values over a set of candidate `λ`s and the chosen one.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionTrace {
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    pub minimizer_index: usize,
}

impl CriterionTrace {
    /// Picks the smallest value, breaking ties toward the largest `λ`. NaN
    /// counts as `+∞`. `None` if every value is `+∞`/NaN.
    pub fn new(lambdas: Vec<f64>, values: Vec<f64>) -> Option<Self> {
        assert_eq!(lambdas.len(), values.len());
        let mut best: Option<usize> = None;
        for (i, &v) in values.iter().enumerate() {
            if v.is_nan() || v == f64::INFINITY {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(b) => {
                    let bv = values[b];
                    if v < bv || (v == bv && lambdas[i] > lambdas[b]) {
                        Some(i)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        best.map(|minimizer_index| Self {
            lambdas,
            values,
            minimizer_index,
        })
    }

    pub fn min_lambda(&self) -> f64 {
        self.lambdas[self.minimizer_index]
    }

    pub fn min_value(&self) -> f64 {
        self.values[self.minimizer_index]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub iterations: usize,
    pub converged: bool,
    /// Noise level estimated jointly with the coefficients (SSR, √lasso).
    pub sigma_hat: Option<f64>,
    pub flags: Vec<&'static str>,
}

/// The outcome of one selection method on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub method: MethodId,
    pub beta: Vec<f64>,
    /// Chosen penalty; `None` for methods that set it internally.
    pub lambda: Option<f64>,
    pub support: Vec<usize>,
    /// `rank(X_S)` of the returned fit.
    pub df: usize,
    pub sigma2_used: Option<f64>,
    pub trace: Option<CriterionTrace>,
    pub diagnostics: Diagnostics,
}

/// A fitted coefficient vector with the ingredients of every criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub lambda: f64,
    pub beta: Vec<f64>,
    pub df: usize,
    pub train_err: f64,
}

/// Candidates at every knot of a lasso path.
pub fn path_candidates(path: &LassoPath, x: &Matrix, y: &[f64]) -> Vec<Candidate> {
    (0..path.len())
        .map(|k| Candidate {
            lambda: path.knots[k],
            beta: path.betas[k].clone(),
            df: path.ranks[k],
            train_err: train_error(x, y, &path.betas[k]),
        })
        .collect()
}

/// Candidates at every grid point, by warm-started coordinate descent.
pub fn grid_candidates(x: &Matrix, y: &[f64], grid: &LambdaGrid, cd: &CdOptions) -> Result<Vec<Candidate>> {
    let betas = crate::solvers::lasso_grid(x, y, grid, cd)?;
    Ok(grid
        .values()
        .iter()
        .zip(betas)
        .map(|(&lambda, beta)| {
            let df = df_lasso(x, &support_of(&beta));
            let train_err = train_error(x, y, &beta);
            Candidate {
                lambda,
                beta,
                df,
                train_err,
            }
        })
        .collect())
}

/// Unbiased-risk-type estimate `train − σ̂² + C_n·σ̂²·df`.
pub fn risk_estimate(train_err: f64, sigma2: f64, df: f64, c_n: f64) -> f64 {
    train_err - sigma2 + c_n * sigma2 * df
}

/// Minimises `criterion` over the candidates.
pub fn select_by<F>(candidates: &[Candidate], method: MethodId, criterion: F) -> Result<SelectionResult>
where
    F: Fn(&Candidate) -> f64,
{
    if candidates.is_empty() {
        bail!(InvalidConfig, "no candidates to select from");
    }
    let lambdas = candidates.iter().map(|c| c.lambda).collect();
    let values = candidates.iter().map(&criterion).collect();
    let trace = match CriterionTrace::new(lambdas, values) {
        Some(t) => t,
        None => bail!(Saturated, "{method}: criterion is infinite at every candidate"),
    };
    let chosen = &candidates[trace.minimizer_index];
    Ok(SelectionResult {
        method,
        beta: chosen.beta.clone(),
        lambda: Some(chosen.lambda),
        support: support_of(&chosen.beta),
        df: chosen.df,
        sigma2_used: None,
        trace: Some(trace),
        diagnostics: Diagnostics {
            converged: true,
            ..Diagnostics::default()
        },
    })
}

/// Minimises the risk estimate with plug-in variance `sigma2` and penalty
/// constant `c_n`.
pub fn select_risk(candidates: &[Candidate], sigma2: f64, c_n: f64, method: MethodId) -> Result<SelectionResult> {
    let mut res = select_by(candidates, method, |c| {
        risk_estimate(c.train_err, sigma2, c.df as f64, c_n)
    })?;
    res.sigma2_used = Some(sigma2);
    Ok(res)
}

/// [`select_risk`] over the knots of a lasso path.
pub fn select_risk_path(
    path: &LassoPath,
    x: &Matrix,
    y: &[f64],
    sigma2: f64,
    c_n: f64,
    method: MethodId,
) -> Result<SelectionResult> {
    if path.is_empty() {
        bail!(InvalidConfig, "empty lasso path");
    }
    select_risk(&path_candidates(path, x, y), sigma2, c_n, method)
}

/// Penalty shape `g` in `log(train) + C_n·g(df)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GicPenalty {
    /// `g(x) = x`
    Identity,
    /// `g(x) = log(1 − x/n)`
    GcvLog,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GicSpec {
    pub c_n: f64,
    pub g: GicPenalty,
}

impl GicSpec {
    pub fn aic(n: usize) -> Self {
        Self {
            c_n: 2.0 / n as f64,
            g: GicPenalty::Identity,
        }
    }

    pub fn bic(n: usize) -> Self {
        Self {
            c_n: (n as f64).ln() / n as f64,
            g: GicPenalty::Identity,
        }
    }

    /// GCV on the log scale.
    pub fn gcv() -> Self {
        Self {
            c_n: -2.0,
            g: GicPenalty::GcvLog,
        }
    }
}

/// `log(train) + C_n·g(df)`. A zero training error gives `−∞` (the saturated
/// fit wins); a GCV penalty at `df ≥ n` gives `+∞`.
pub fn gic(train_err: f64, df: f64, spec: &GicSpec, n: usize) -> f64 {
    let penalty = match spec.g {
        GicPenalty::Identity => spec.c_n * df,
        GicPenalty::GcvLog => {
            let frac = 1.0 - df / n as f64;
            if frac <= 0.0 {
                return f64::INFINITY;
            }
            spec.c_n * frac.ln()
        }
    };
    train_err.ln() + penalty
}

pub fn select_gic(candidates: &[Candidate], spec: &GicSpec, n: usize, method: MethodId) -> Result<SelectionResult> {
    select_by(candidates, method, |c| gic(c.train_err, c.df as f64, spec, n))
}

/// `train/(1 − df/n)²`, `+∞` once `df ≥ n`.
pub fn gcv_value(train_err: f64, df: f64, n: usize) -> f64 {
    let frac = 1.0 - df / n as f64;
    if frac <= 0.0 {
        f64::INFINITY
    } else {
        train_err / (frac * frac)
    }
}

pub fn select_gcv(candidates: &[Candidate], n: usize) -> Result<SelectionResult> {
    select_by(candidates, MethodId::Gcv, |c| gcv_value(c.train_err, c.df as f64, n))
}

/// GCV minimised over the knots of a lasso path.
pub fn gcv_select(path: &LassoPath, x: &Matrix, y: &[f64]) -> Result<SelectionResult> {
    select_gcv(&path_candidates(path, x, y), x.nrows())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub cd: CdOptions,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: 10,
            seed: 0,
            grid: GridSpec::default(),
            cd: CdOptions::default(),
        }
    }
}

const FOLD_STREAM: u64 = 0x464f_4c44; // "FOLD"

/// Fold label of every observation: a seeded permutation dealt round-robin
/// into `k` folds whose sizes differ by at most one.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || k > n {
        bail!(InvalidConfig, "need 2 <= K <= n, got K = {k}, n = {n}");
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream_rng(seed, FOLD_STREAM));
    let mut folds = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        folds[i] = pos % k;
    }
    Ok(folds)
}

/// Splits observations into those with `labels[i] == fold` and the rest.
pub(crate) fn split_rows(labels: &[usize], fold: usize) -> (Vec<usize>, Vec<usize>) {
    let (mut inside, mut outside) = (Vec::new(), Vec::new());
    for (i, &l) in labels.iter().enumerate() {
        if l == fold {
            inside.push(i);
        } else {
            outside.push(i);
        }
    }
    (inside, outside)
}

fn gather(v: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| v[i]).collect()
}

/// K-fold cross-validation error of the lasso at every grid value:
/// the mean over folds of the mean squared validation error.
pub fn cv_curve(
    x: &Matrix,
    y: &[f64],
    grid: &LambdaGrid,
    labels: &[usize],
    k: usize,
    cd: &CdOptions,
) -> Result<Vec<f64>> {
    let mut curve = vec![0.0; grid.len()];
    for fold in 0..k {
        let errs = fold_errors(x, y, grid, labels, fold, cd)?;
        for (c, e) in curve.iter_mut().zip(errs) {
            *c += e / k as f64;
        }
    }
    Ok(curve)
}

/// A fold's path stops once its fit explains this fraction of `‖y‖²`; the
/// remaining grid values reuse that fit.
pub const CV_SATURATION: f64 = 0.999;

/// Validation error of fold `fold` at every grid value.
pub fn fold_errors(
    x: &Matrix,
    y: &[f64],
    grid: &LambdaGrid,
    labels: &[usize],
    fold: usize,
    cd: &CdOptions,
) -> Result<Vec<f64>> {
    let (val, train) = split_rows(labels, fold);
    if val.is_empty() {
        bail!(InvalidConfig, "fold {fold} is empty");
    }
    let xt = x.select_rows(&train);
    let yt = gather(y, &train);
    let xv = x.select_rows(&val);
    let yv = gather(y, &val);
    let engine = CoordinateDescent::new(&xt);
    let mut beta = vec![0.0; x.ncols()];
    let mut resid = yt.clone();
    let null_rss = norm_sq(&yt);
    let mut out = Vec::with_capacity(grid.len());
    for &lambda in grid.values() {
        match engine.solve(lambda, &mut beta, &mut resid, cd) {
            Ok(_) => {}
            // Unreached grid values cannot be chosen.
            Err(Error::NoConvergence { .. }) => {
                out.resize(grid.len(), f64::INFINITY);
                return Ok(out);
            }
            Err(e) => return Err(e),
        }
        let pred = xv.mul_vec(&beta);
        let mse = yv.iter().zip(&pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / yv.len() as f64;
        out.push(mse);
        if norm_sq(&resid) <= (1.0 - CV_SATURATION) * null_rss {
            out.resize(grid.len(), mse);
            return Ok(out);
        }
    }
    Ok(out)
}

/// Result of cross-validating the lasso and refitting on all the data.
#[derive(Debug, Clone, PartialEq)]
pub struct CvFit {
    pub grid: LambdaGrid,
    pub trace: CriterionTrace,
    /// Full-data fit at the chosen grid value.
    pub fit: FittedModel,
    /// Index into `grid` of `fit.lambda`.
    pub index: usize,
    /// Set when the guard replaced the CV choice by a sparser grid model.
    pub fallback: bool,
}

/// Cross-validates the lasso over the grid, then fits the full data at the
/// CV minimiser. With `max_df = Some(d)`, a full-data fit whose rank exceeds
/// `d` is replaced by the densest grid fit of rank at most `n/2`.
pub fn cv_lasso(x: &Matrix, y: &[f64], opts: &CvOptions, max_df: Option<usize>) -> Result<CvFit> {
    let n = x.nrows();
    let grid = opts.grid.build(x, y)?;
    let labels = fold_assignment(n, opts.folds, opts.seed)?;
    let curve = cv_curve(x, y, &grid, &labels, opts.folds, &opts.cd)?;
    let trace = match CriterionTrace::new(grid.values().to_vec(), curve) {
        Some(t) => t,
        None => bail!(Degenerate, "cross-validation curve is not finite"),
    };
    let chosen = trace.minimizer_index;

    let engine = CoordinateDescent::new(x);
    let mut beta = vec![0.0; x.ncols()];
    let mut resid = y.to_vec();
    let mut sweeps = 0;
    let mut betas = Vec::with_capacity(chosen + 1);
    for &lambda in &grid.values()[..=chosen] {
        sweeps += engine.solve(lambda, &mut beta, &mut resid, &opts.cd)?;
        betas.push(beta.clone());
    }
    let mut index = chosen;
    let mut fit = FittedModel::from_beta(x, y, beta, grid.values()[chosen], sweeps);
    let mut fallback = false;
    if let Some(limit) = max_df {
        if fit.df > limit {
            let half = n / 2;
            let found = (0..chosen).rev().find(|&k| {
                let s = support_of(&betas[k]);
                s.len() <= half || df_lasso(x, &s) <= half
            });
            let k = found.unwrap_or(0);
            index = k;
            fit = FittedModel::from_beta(x, y, betas[k].clone(), grid.values()[k], sweeps);
            fallback = true;
        }
    }
    Ok(CvFit {
        grid,
        trace,
        fit,
        index,
        fallback,
    })
}

/// K-fold cross-validation selector.
pub fn kfold_cv(x: &Matrix, y: &[f64], opts: &CvOptions) -> Result<SelectionResult> {
    let cv = cv_lasso(x, y, opts, None)?;
    Ok(SelectionResult {
        method: MethodId::Cv10Fold,
        support: cv.fit.support.clone(),
        df: cv.fit.df,
        lambda: Some(cv.fit.lambda),
        beta: cv.fit.beta,
        sigma2_used: None,
        trace: Some(cv.trace),
        diagnostics: Diagnostics {
            iterations: cv.fit.sweeps,
            converged: true,
            ..Diagnostics::default()
        },
    })
}

/// Which plug-in variance a risk-estimator method uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceSource {
    Cv,
    Rmle,
    Rcv,
}

/// `(variance source, C_n)` of a risk-estimator method, if it is one.
pub fn risk_method_spec(method: MethodId, n: usize) -> Option<(VarianceSource, f64)> {
    let two = 2.0 / n as f64;
    let logn = (n as f64).ln() / n as f64;
    match method {
        MethodId::RiskCv2 => Some((VarianceSource::Cv, two)),
        MethodId::RiskRmle2 => Some((VarianceSource::Rmle, two)),
        MethodId::RiskRcv2 => Some((VarianceSource::Rcv, two)),
        MethodId::RiskCvLogn => Some((VarianceSource::Cv, logn)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageOptions {
    pub variance: VarianceOptions,
}

/// GCV screening on the full lasso path, then risk minimisation with
/// `C_n = log(n)/n` and a CV variance estimate on the lasso path of the
/// screened columns only.
pub fn two_stage(x: &Matrix, y: &[f64], opts: &TwoStageOptions) -> Result<SelectionResult> {
    let n = x.nrows();
    let p = x.ncols();
    let path = lasso_path(x, y)?;
    let screen = gcv_select(&path, x, y)?;
    let screened = screen.support.clone();
    if screened.is_empty() {
        return Ok(SelectionResult {
            method: MethodId::TwoStage,
            beta: vec![0.0; p],
            lambda: screen.lambda,
            support: Vec::new(),
            df: 0,
            sigma2_used: None,
            trace: screen.trace,
            diagnostics: Diagnostics {
                converged: true,
                flags: vec!["empty_screen"],
                ..Diagnostics::default()
            },
        });
    }
    if screen.df >= n {
        bail!(Saturated, "GCV screen kept {} columns of rank n = {n}", screened.len());
    }
    let xs = x.select_columns(&screened);
    let sub_path = lasso_path(&xs, y)?;
    let (cv_est, _) = variance::sigma2_cv_rmle(&xs, y, &opts.variance)?;
    let c_n = (n as f64).ln() / n as f64;
    let inner = select_risk_path(&sub_path, &xs, y, cv_est.value, c_n, MethodId::TwoStage)?;
    let mut beta = vec![0.0; p];
    for (&j, &b) in screened.iter().zip(&inner.beta) {
        beta[j] = b;
    }
    let mut flags = Vec::new();
    if cv_est.fallback {
        flags.push("variance_fallback");
    }
    Ok(SelectionResult {
        method: MethodId::TwoStage,
        support: support_of(&beta),
        beta,
        lambda: inner.lambda,
        df: inner.df,
        sigma2_used: Some(cv_est.value),
        trace: inner.trace,
        diagnostics: Diagnostics {
            converged: true,
            flags,
            ..Diagnostics::default()
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledOptions {
    /// Convergence threshold on successive noise-level iterates.
    pub tol: f64,
    pub max_iter: usize,
    pub cd: CdOptions,
}

impl Default for ScaledOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            cd: CdOptions {
                tol: 1e-10,
                ..CdOptions::default()
            },
        }
    }
}

/// Default SSR penalty level `√(2·log(p)/n)`.
pub fn ssr_lambda0_default(n: usize, p: usize) -> f64 {
    (2.0 * (p as f64).ln() / n as f64).sqrt()
}

struct ScaledFit {
    beta: Vec<f64>,
    sigma: f64,
    iterations: usize,
}

/// Alternating minimisation shared by SSR and the √lasso.
///
/// For a fixed `σ`, `(1/(2nσ))‖r‖² + λ₀‖β‖₁` times `2σ` is the lasso objective
/// at `λ = 2σλ₀`. For a fixed `β`, the stationarity condition of
/// `(1/(2nσ))‖r‖² + (1−a)σ/2` in `σ` gives `σ² = ‖r‖²/(n(1−a))`.
///
/// Returns the lasso fit at the last `σ` used together with the `σ` update
/// computed from it; the two differ by less than `tol`.
fn scaled_lasso(x: &Matrix, y: &[f64], lambda0: f64, a: f64, opts: &ScaledOptions) -> Result<ScaledFit> {
    let n = x.nrows() as f64;
    let engine = CoordinateDescent::new(x);
    let mut beta = vec![0.0; x.ncols()];
    let mut resid = y.to_vec();
    let sigma_of = |r: &[f64]| (dot(r, r) / (n * (1.0 - a))).sqrt();
    let mut sigma = (dot(y, y) / n).sqrt();
    if sigma < 1e-12 {
        bail!(Degenerate, "response is identically zero");
    }
    for it in 1..=opts.max_iter {
        engine.solve(2.0 * sigma * lambda0, &mut beta, &mut resid, &opts.cd)?;
        let next = sigma_of(&resid);
        if next < 1e-12 {
            bail!(Degenerate, "residual collapsed to zero: the fit interpolates");
        }
        let done = (next - sigma).abs() < opts.tol;
        sigma = next;
        if done {
            return Ok(ScaledFit {
                beta,
                sigma,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        last: beta,
    })
}

/// Scaled sparse regression: joint minimisation over `(β, σ)` of
/// `(1/(2nσ))‖Y − Xβ‖² + (1−a)σ/2 + λ₀‖β‖₁`, started at `σ = ‖Y‖/√n`.
pub fn ssr(x: &Matrix, y: &[f64], lambda0: f64, a: f64, opts: &ScaledOptions) -> Result<SelectionResult> {
    if !(lambda0 > 0.0) {
        bail!(InvalidConfig, "SSR needs lambda0 > 0, got {lambda0}");
    }
    if !(0.0..1.0).contains(&a) {
        bail!(InvalidConfig, "SSR needs 0 <= a < 1, got {a}");
    }
    let fit = scaled_lasso(x, y, lambda0, a, opts)?;
    Ok(scaled_result(x, MethodId::Ssr, fit))
}

fn scaled_result(x: &Matrix, method: MethodId, fit: ScaledFit) -> SelectionResult {
    let support = support_of(&fit.beta);
    SelectionResult {
        method,
        df: df_lasso(x, &support),
        support,
        beta: fit.beta,
        lambda: None,
        sigma2_used: Some(fit.sigma * fit.sigma),
        trace: None,
        diagnostics: Diagnostics {
            iterations: fit.iterations,
            converged: true,
            sigma_hat: Some(fit.sigma),
            flags: Vec::new(),
        },
    }
}

/// `c·√n·Φ⁻¹(1 − α/(2p))`.
pub fn sqrt_lambda_default(n: usize, p: usize, c: f64, alpha_level: f64) -> f64 {
    c * (n as f64).sqrt() * norm_quantile(1.0 - alpha_level / (2.0 * p as f64))
}

/// `‖Y − Xβ‖/√n + (λ_n/n)‖β‖₁`.
pub fn sqrt_lasso_objective(x: &Matrix, y: &[f64], beta: &[f64], lambda_n: f64) -> f64 {
    let n = x.nrows() as f64;
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    (train_error(x, y, beta) * n).sqrt() / n.sqrt() + lambda_n / n * l1
}

/// Square-root lasso, minimising `‖Y − Xβ‖/√n + (λ_n/n)‖β‖₁`.
///
/// Its stationarity conditions coincide with those of the lasso at
/// `λ = 2λ_n σ̂/n`, `σ̂ = ‖Y − Xβ‖/√n`, which is the scaled iteration with
/// `λ₀ = λ_n/n` and `a = 0`.
pub fn sqrt_lasso(x: &Matrix, y: &[f64], lambda_n: f64, opts: &ScaledOptions) -> Result<SelectionResult> {
    if !(lambda_n > 0.0) {
        bail!(InvalidConfig, "sqrt lasso needs lambda_n > 0, got {lambda_n}");
    }
    let fit = scaled_lasso(x, y, lambda_n / x.nrows() as f64, 0.0, opts)?;
    Ok(scaled_result(x, MethodId::Sqrt, fit))
}

/// √lasso selection followed by least squares on the selected columns.
pub fn sqrt_lasso_refit(x: &Matrix, y: &[f64], lambda_n: f64, opts: &ScaledOptions) -> Result<SelectionResult> {
    let base = sqrt_lasso(x, y, lambda_n, opts)?;
    let beta = ols_refit(x, &base.support, y);
    Ok(SelectionResult {
        method: MethodId::SqrtRefitted,
        beta,
        ..base
    })
}

/// Runs one of the risk-estimator selectors (`R-CV-2`, `R-RMLE-2`, `R-RCV-2`,
/// `R-CV-logn`) with its own variance estimate.
pub fn risk_selector(
    method: MethodId,
    path: &LassoPath,
    x: &Matrix,
    y: &[f64],
    var_opts: &VarianceOptions,
) -> Result<SelectionResult> {
    let (source, c_n) = match risk_method_spec(method, x.nrows()) {
        Some(s) => s,
        None => bail!(InvalidConfig, "{method} is not a risk-estimator method"),
    };
    let est = match source {
        VarianceSource::Cv => variance::sigma2_cv_rmle(x, y, var_opts)?.0,
        VarianceSource::Rmle => variance::sigma2_cv_rmle(x, y, var_opts)?.1,
        VarianceSource::Rcv => variance::sigma2_rcv(x, y, var_opts)?,
    };
    let mut res = select_risk_path(path, x, y, est.value, c_n, method)?;
    if est.fallback {
        res.diagnostics.flags.push("variance_fallback");
    }
    Ok(res)
}

/// Sub-seed for one selector, so methods sharing a replication seed still
/// draw independent fold partitions.
pub fn method_seed(seed: u64, method: MethodId) -> u64 {
    derive_seed(seed, 0x4d45_5448_0000 + method as u64)
}

/// Error message prefix helper for callers that want a string form.
pub fn describe(res: &SelectionResult) -> String {
    format!(
        "{}: |S| = {}, lambda = {:?}, sigma2 = {:?}",
        res.method,
        res.support.len(),
        res.lambda,
        res.sigma2_used
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::example1_dataset;

    #[test]
    fn method_ids_roundtrip() {
        for m in MethodId::STUDY {
            assert_eq!(m.as_str().parse::<MethodId>().unwrap(), m);
        }
        assert!("MCV".parse::<MethodId>().is_err());
    }

    #[test]
    fn risk_estimate_identities() {
        assert_eq!(risk_estimate(0.7, 0.0, 5.0, 0.0), 0.7);
        assert_eq!(risk_estimate(1.0, 1.0, 0.0, 2.0 / 50.0), 0.0);
    }

    #[test]
    fn trace_ties_go_to_largest_lambda() {
        let t = CriterionTrace::new(vec![3.0, 2.0, 1.0], vec![0.5, 0.5, 0.5]).unwrap();
        assert_eq!(t.min_lambda(), 3.0);
        let t = CriterionTrace::new(vec![1.0, 2.0, 3.0], vec![0.5, 0.2, 0.2]).unwrap();
        assert_eq!(t.min_lambda(), 3.0);
        assert!(CriterionTrace::new(vec![1.0], vec![f64::NAN]).is_none());
    }

    #[test]
    fn gic_at_zero_df_is_log_train() {
        for spec in [GicSpec::aic(30), GicSpec::bic(30), GicSpec::gcv()] {
            assert_eq!(gic(0.3, 0.0, &spec, 30), 0.3f64.ln());
        }
        assert_eq!(gic(0.0, 1.0, &GicSpec::aic(30), 30), f64::NEG_INFINITY);
    }

    #[test]
    fn gcv_excludes_saturated_knots() {
        assert_eq!(gcv_value(1.0, 10.0, 10), f64::INFINITY);
        let cands = [Candidate {
            lambda: 1.0,
            beta: vec![1.0],
            df: 2,
            train_err: 0.0,
        }];
        assert!(select_gcv(&cands, 2).is_err());
    }

    #[test]
    fn zero_variance_picks_min_train() {
        let d = example1_dataset(1.0);
        let path = lasso_path(&d.x, &d.y).unwrap();
        let res = select_risk_path(&path, &d.x, &d.y, 0.0, 2.0 / 2.0, MethodId::RiskKnown).unwrap();
        assert_eq!(res.lambda, path.knots.last().copied());
    }

    #[test]
    fn folds_are_balanced_and_seeded() {
        let f = fold_assignment(23, 10, 9).unwrap();
        let mut counts = [0usize; 10];
        for &l in &f {
            counts[l] += 1;
        }
        assert!(counts.iter().all(|&c| c == 2 || c == 3));
        assert_eq!(f, fold_assignment(23, 10, 9).unwrap());
        assert!(fold_assignment(5, 6, 0).is_err());
        assert!(fold_assignment(5, 1, 0).is_err());
    }

    #[test]
    fn sqrt_lambda_half_quantile_is_zero() {
        // α/(2p) = 0.5
        assert_eq!(sqrt_lambda_default(100, 1, 1.1, 1.0), 0.0);
        let d = example1_dataset(1.0);
        assert!(sqrt_lasso(&d.x, &d.y, 0.0, &ScaledOptions::default()).is_err());
    }
}
