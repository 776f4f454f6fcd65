//! Runs the registered selectors on one dataset and scores them.

use std::time::Instant;

use lassotune_core::datagen::{derive_seed, stream_rng};
use lassotune_core::metrics::{pred_risk_many, EvalRecord, Scores, N_TEST};
use lassotune_core::selectors::{
    gcv_select, kfold_cv, method_seed, path_candidates, risk_method_spec, select_gic, select_risk_path,
    sqrt_lambda_default, sqrt_lasso, ssr, ssr_lambda0_default, two_stage, CvOptions, GicSpec, ScaledOptions,
    SelectionResult, TwoStageOptions, VarianceSource,
};
use lassotune_core::solvers::{lasso_path, ols_refit, CdOptions, GridSpec, LassoPath};
use lassotune_core::variance::{sigma2_cv_rmle, sigma2_rcv, RcvRefit, VarianceEstimate, VarianceOptions};
use lassotune_core::{MethodId, Result, SimulatedDataset};

/// Tunable constants shared by every method in a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSettings {
    pub folds: usize,
    pub grid: GridSpec,
    pub cd: CdOptions,
    pub rcv_refit: RcvRefit,
    pub scaled: ScaledOptions,
    /// `None` uses `√(2 log(p)/n)`.
    pub ssr_lambda0: Option<f64>,
    pub ssr_a: f64,
    pub sqrt_c: f64,
    pub sqrt_alpha: f64,
    pub n_test: usize,
    /// Record wall-clock time per method. Off by default so output is
    /// byte-reproducible.
    pub timing: bool,
}

impl Default for MethodSettings {
    fn default() -> Self {
        Self {
            folds: 10,
            grid: GridSpec::default(),
            cd: CdOptions::default(),
            rcv_refit: RcvRefit::Ols,
            scaled: ScaledOptions::default(),
            ssr_lambda0: None,
            ssr_a: 0.0,
            sqrt_c: 1.1,
            sqrt_alpha: 0.05,
            n_test: N_TEST,
            timing: false,
        }
    }
}

impl MethodSettings {
    pub fn variance_options(&self, seed: u64) -> VarianceOptions {
        VarianceOptions {
            folds: self.folds,
            seed,
            grid: self.grid.clone(),
            cd: self.cd,
            rcv_refit: self.rcv_refit,
        }
    }
}

const VARIANCE_TAG: u64 = 0x5641_5249; // "VARI"
const TEST_TAG: u64 = 0x5445_5354; // "TEST"

/// Lazily computed pieces several methods share: the lasso path and the
/// plug-in variance estimates (one `λ̂_CV` for both CV and RMLE).
struct Shared<'a> {
    data: &'a SimulatedDataset,
    settings: &'a MethodSettings,
    seed: u64,
    path: Option<Result<LassoPath>>,
    cv_rmle: Option<Result<(VarianceEstimate, VarianceEstimate)>>,
    rcv: Option<Result<VarianceEstimate>>,
    sqrt: Option<Result<SelectionResult>>,
}

impl<'a> Shared<'a> {
    fn path(&mut self) -> Result<&LassoPath> {
        let d = self.data;
        self.path
            .get_or_insert_with(|| lasso_path(&d.x, &d.y))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn variance(&mut self, source: VarianceSource) -> Result<VarianceEstimate> {
        let d = self.data;
        let opts = self.settings.variance_options(derive_seed(self.seed, VARIANCE_TAG));
        match source {
            VarianceSource::Cv | VarianceSource::Rmle => {
                let pair = self
                    .cv_rmle
                    .get_or_insert_with(|| sigma2_cv_rmle(&d.x, &d.y, &opts))
                    .clone()?;
                Ok(if source == VarianceSource::Cv { pair.0 } else { pair.1 })
            }
            VarianceSource::Rcv => self.rcv.get_or_insert_with(|| sigma2_rcv(&d.x, &d.y, &opts)).clone(),
        }
    }

    fn sqrt(&mut self) -> Result<SelectionResult> {
        let d = self.data;
        let s = self.settings;
        self.sqrt
            .get_or_insert_with(|| {
                let lambda_n = sqrt_lambda_default(d.n(), d.p(), s.sqrt_c, s.sqrt_alpha);
                sqrt_lasso(&d.x, &d.y, lambda_n, &s.scaled)
            })
            .clone()
    }

    fn run(&mut self, method: MethodId) -> Result<SelectionResult> {
        let d = self.data;
        let s = self.settings;
        let (x, y, n, p) = (&d.x, &d.y[..], d.n(), d.p());
        match method {
            MethodId::Cv10Fold => kfold_cv(
                x,
                y,
                &CvOptions {
                    folds: s.folds,
                    seed: method_seed(self.seed, method),
                    grid: s.grid.clone(),
                    cd: s.cd,
                },
            ),
            MethodId::RiskCv2 | MethodId::RiskRmle2 | MethodId::RiskRcv2 | MethodId::RiskCvLogn => {
                let (source, c_n) = risk_method_spec(method, n).expect("risk method");
                let est = self.variance(source)?;
                let path = self.path()?;
                let mut res = select_risk_path(path, x, y, est.value, c_n, method)?;
                if est.fallback {
                    res.diagnostics.flags.push("variance_fallback");
                }
                Ok(res)
            }
            MethodId::RiskKnown => {
                let path = self.path()?;
                select_risk_path(path, x, y, d.sigma2, 2.0 / n as f64, method)
            }
            MethodId::TwoStage => two_stage(
                x,
                y,
                &TwoStageOptions {
                    variance: s.variance_options(method_seed(self.seed, method)),
                },
            ),
            MethodId::Ssr => {
                let lambda0 = s.ssr_lambda0.unwrap_or_else(|| ssr_lambda0_default(n, p));
                ssr(x, y, lambda0, s.ssr_a, &s.scaled)
            }
            MethodId::Sqrt => self.sqrt(),
            MethodId::SqrtRefitted => {
                let base = self.sqrt()?;
                Ok(SelectionResult {
                    method,
                    beta: ols_refit(x, &base.support, y),
                    ..base
                })
            }
            MethodId::Gcv => gcv_select(self.path()?, x, y),
            MethodId::Aic | MethodId::Bic => {
                let spec = if method == MethodId::Aic {
                    GicSpec::aic(n)
                } else {
                    GicSpec::bic(n)
                };
                let cands = path_candidates(self.path()?, x, y);
                select_gic(&cands, &spec, n, method)
            }
        }
    }
}

/// Runs `methods` on `data` and returns one record per method, in order.
/// Fits share one test sample for the prediction risk.
pub fn run_methods(
    data: &SimulatedDataset,
    methods: &[MethodId],
    settings: &MethodSettings,
    seed: u64,
) -> Vec<EvalRecord> {
    let mut shared = Shared {
        data,
        settings,
        seed,
        path: None,
        cv_rmle: None,
        rcv: None,
        sqrt: None,
    };
    let outcomes: Vec<(Result<SelectionResult>, Option<f64>)> = methods
        .iter()
        .map(|&m| {
            let start = settings.timing.then(Instant::now);
            let res = shared.run(m);
            (res, start.map(|t| t.elapsed().as_secs_f64() * 1e3))
        })
        .collect();

    let betas: Vec<&[f64]> = outcomes
        .iter()
        .filter_map(|(r, _)| r.as_ref().ok().map(|s| &s.beta[..]))
        .collect();
    let mut rng = stream_rng(derive_seed(seed, TEST_TAG), 0);
    let mut risks = pred_risk_many(&betas, data, settings.n_test, &mut rng).into_iter();

    methods
        .iter()
        .zip(outcomes)
        .map(|(&method, (res, ms))| {
            let mut rec = EvalRecord {
                method,
                scenario: data.config.clone(),
                replication_id: data.config.replication_id,
                lambda: None,
                sigma2_used: None,
                df: None,
                scores: None,
                error_code: None,
                runtime_ms: ms,
            };
            match res {
                Ok(sel) => {
                    let risk = risks.next().expect("one risk per successful fit");
                    rec.lambda = sel.lambda;
                    rec.sigma2_used = sel.sigma2_used;
                    rec.df = Some(sel.df);
                    match Scores::new(&sel.beta, &sel.support, data, risk) {
                        Ok(s) => rec.scores = Some(s),
                        Err(e) => rec.error_code = Some(e.code()),
                    }
                }
                Err(e) => rec.error_code = Some(e.code()),
            }
            rec
        })
        .collect()
}
