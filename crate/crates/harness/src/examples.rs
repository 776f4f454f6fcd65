//! The two small worked examples: information criteria on a three-column,
//! two-observation problem, and tuning-parameter choice on `n = 30`, `p = 150`
//! draws with one active coefficient.

use std::io::Write;

use rayon::prelude::*;

use lassotune_core::datagen::{derive_seed, example1_dataset, example2_config, gen_dataset, stream_rng};
use lassotune_core::metrics::pred_risk_many;
use lassotune_core::selectors::{
    gcv_value, gic, grid_candidates, select_gic, select_risk, Candidate, CriterionTrace, GicSpec, MethodId,
};
use lassotune_core::solvers::{lasso_cd, ridge, ridge_df, train_error, CdOptions, GridOrigin, GridSpec, LambdaGrid};
use lassotune_core::variance::{sigma2_cv, sigma2_rcv};
use lassotune_core::{Result as CoreResult, SelectionResult};

use crate::error::Result;
use crate::methods::MethodSettings;
use crate::output::fmt_opt;

/// Noise levels both examples are run at.
pub const SIGMAS: [f64; 4] = [0.5, 1.0, 1.5, 5.0];

/// `m` log-spaced values from 1 down to `1e-5`.
pub fn example1_grid(m: usize) -> LambdaGrid {
    LambdaGrid::log_spaced(1.0, 1e-5, m, GridOrigin::UserSupplied).expect("valid grid")
}

/// Criterion traces of one model at one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTrace {
    pub model: &'static str,
    pub df: Vec<f64>,
    pub train: Vec<f64>,
    pub aic: CriterionTrace,
    pub bic: CriterionTrace,
    pub gcv: CriterionTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example1Result {
    pub sigma: f64,
    pub ridge: ModelTrace,
    pub lasso: ModelTrace,
}

fn model_trace(model: &'static str, lambdas: &[f64], df: Vec<f64>, train: Vec<f64>, n: usize) -> ModelTrace {
    let crit = |f: &dyn Fn(f64, f64) -> f64| {
        let vals = train.iter().zip(&df).map(|(&t, &d)| f(t, d)).collect();
        CriterionTrace::new(lambdas.to_vec(), vals).expect("finite criterion")
    };
    ModelTrace {
        model,
        aic: crit(&|t, d| gic(t, d, &GicSpec::aic(n), n)),
        bic: crit(&|t, d| gic(t, d, &GicSpec::bic(n), n)),
        gcv: crit(&|t, d| gcv_value(t, d, n)),
        df,
        train,
    }
}

/// AIC, BIC and GCV traces of ridge and lasso over `grid` at every noise level.
pub fn run_example1(grid: &LambdaGrid) -> CoreResult<Vec<Example1Result>> {
    let cd = CdOptions {
        tol: 1e-14,
        ..CdOptions::default()
    };
    SIGMAS
        .iter()
        .map(|&sigma| {
            let d = example1_dataset(sigma);
            let n = d.n();
            let lambdas = grid.values();
            let mut r_df = Vec::new();
            let mut r_train = Vec::new();
            let mut l_df = Vec::new();
            let mut l_train = Vec::new();
            for &lambda in lambdas {
                let b = ridge(&d.x, &d.y, lambda)?;
                r_df.push(ridge_df(&d.x, lambda));
                r_train.push(train_error(&d.x, &d.y, &b));
                let fit = lasso_cd(&d.x, &d.y, lambda, None, &cd)?;
                l_df.push(fit.df as f64);
                l_train.push(fit.train_err);
            }
            Ok(Example1Result {
                sigma,
                ridge: model_trace("ridge", lambdas, r_df, r_train, n),
                lasso: model_trace("lasso", lambdas, l_df, l_train, n),
            })
        })
        .collect()
}

pub fn write_example1<W: Write>(out: W, results: &[Example1Result]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "sigma",
        "model",
        "lambda",
        "df",
        "train",
        "aic",
        "bic",
        "gcv",
        "aic_argmin",
        "bic_argmin",
        "gcv_argmin",
    ])?;
    for r in results {
        for m in [&r.ridge, &r.lasso] {
            for (k, &lambda) in m.aic.lambdas.iter().enumerate() {
                w.write_record([
                    r.sigma.to_string(),
                    m.model.to_string(),
                    lambda.to_string(),
                    m.df[k].to_string(),
                    m.train[k].to_string(),
                    m.aic.values[k].to_string(),
                    m.bic.values[k].to_string(),
                    m.gcv.values[k].to_string(),
                    (k == m.aic.minimizer_index).to_string(),
                    (k == m.bic.minimizer_index).to_string(),
                    (k == m.gcv.minimizer_index).to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Selectors compared on the second example.
pub const EXAMPLE2_METHODS: [&str; 5] = ["R(sigma2=1)", "R(CV)", "R(RCV)", "AIC", "BIC"];

#[derive(Debug, Clone, PartialEq)]
pub struct Example2Record {
    pub sigma: f64,
    pub replication: u64,
    pub method: &'static str,
    pub lambda: Option<f64>,
    /// Whether the chosen `λ` is the smallest grid value.
    pub grid_min: Option<bool>,
    pub df: Option<usize>,
    pub pred_risk: Option<f64>,
    pub error_code: Option<&'static str>,
}

/// Grid reaching far enough down that the lasso nearly interpolates.
pub fn example2_grid() -> GridSpec {
    GridSpec::Default { m: 100, eps: 1e-4 }
}

fn example2_replication(sigma: f64, rep: u64, seed: u64, settings: &MethodSettings) -> Vec<Example2Record> {
    let cfg =
        example2_config(sigma, derive_seed(seed, sigma.to_bits())).with_seed(derive_seed(seed, sigma.to_bits()), rep);
    let fail = |code: &'static str| {
        EXAMPLE2_METHODS
            .iter()
            .map(|&method| Example2Record {
                sigma,
                replication: rep,
                method,
                lambda: None,
                grid_min: None,
                df: None,
                pred_risk: None,
                error_code: Some(code),
            })
            .collect()
    };
    let data = match gen_dataset(&cfg) {
        Ok(d) => d,
        Err(e) => return fail(e.code()),
    };
    let (x, y, n) = (&data.x, &data.y[..], data.n());
    let grid = match example2_grid().build(x, y) {
        Ok(g) => g,
        Err(e) => return fail(e.code()),
    };
    let cands: Vec<Candidate> = match grid_candidates(x, y, &grid, &settings.cd) {
        Ok(c) => c,
        Err(e) => return fail(e.code()),
    };
    let rep_seed = derive_seed(cfg.seed, rep);
    let var_opts = settings.variance_options(derive_seed(rep_seed, 1));
    let two_n = 2.0 / n as f64;
    let results: Vec<CoreResult<SelectionResult>> = vec![
        select_risk(&cands, 1.0, two_n, MethodId::RiskKnown),
        sigma2_cv(x, y, &var_opts).and_then(|v| select_risk(&cands, v.value, two_n, MethodId::RiskCv2)),
        sigma2_rcv(x, y, &var_opts).and_then(|v| select_risk(&cands, v.value, two_n, MethodId::RiskRcv2)),
        select_gic(&cands, &GicSpec::aic(n), n, MethodId::Aic),
        select_gic(&cands, &GicSpec::bic(n), n, MethodId::Bic),
    ];
    let betas: Vec<&[f64]> = results
        .iter()
        .filter_map(|r| r.as_ref().ok().map(|s| &s.beta[..]))
        .collect();
    let mut rng = stream_rng(derive_seed(rep_seed, 2), 0);
    let mut risks = pred_risk_many(&betas, &data, settings.n_test, &mut rng).into_iter();
    EXAMPLE2_METHODS
        .iter()
        .zip(results)
        .map(|(&method, r)| match r {
            Ok(sel) => Example2Record {
                sigma,
                replication: rep,
                method,
                lambda: sel.lambda,
                grid_min: sel.lambda.map(|l| l == grid.min()),
                df: Some(sel.df),
                pred_risk: risks.next(),
                error_code: None,
            },
            Err(e) => Example2Record {
                sigma,
                replication: rep,
                method,
                lambda: None,
                grid_min: None,
                df: None,
                pred_risk: None,
                error_code: Some(e.code()),
            },
        })
        .collect()
}

/// Runs every selector on `replications` draws at each noise level.
pub fn run_example2(
    replications: usize,
    seed: u64,
    workers: usize,
    settings: &MethodSettings,
) -> Result<Vec<Example2Record>> {
    let tasks: Vec<(f64, u64)> = SIGMAS
        .iter()
        .flat_map(|&s| (0..replications as u64).map(move |r| (s, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    Ok(pool.install(|| {
        tasks
            .par_iter()
            .flat_map_iter(|&(s, r)| example2_replication(s, r, seed, settings))
            .collect()
    }))
}

pub fn write_example2<W: Write>(out: W, records: &[Example2Record]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "sigma",
        "replication",
        "method",
        "lambda",
        "grid_min",
        "df",
        "pred_risk",
        "error_code",
    ])?;
    for r in records {
        w.write_record([
            r.sigma.to_string(),
            r.replication.to_string(),
            r.method.to_string(),
            fmt_opt(r.lambda),
            fmt_opt(r.grid_min),
            fmt_opt(r.df),
            fmt_opt(r.pred_risk),
            r.error_code.unwrap_or("").to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Median of the finite values, `None` if there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.into_iter().filter(|v| v.is_finite()).collect();
    crate::summary::stats(&v).map(|s| s.median)
}
