//! Sweep specification and its flat `key = value` config format.
//!
//! ```text
//! # comments start with '#'
//! n = 100
//! p = 200, 1000
//! rho = 0.1, 0.8
//! alpha = 0.4, 0.7
//! snr = 0.1, 10
//! noise = gaussian
//! methods = CV-10-Fold, R-CV-2, SSR
//! replications = 100
//! seed = 7
//! workers = 4
//! ```
//!
//! Lists are comma-separated. Method tuning keys: `folds`, `grid_size`,
//! `grid_eps`, `cd_tol`, `cd_max_sweeps`, `rcv_refit` (`ols` or `plugin`),
//! `ssr_lambda0`, `ssr_a`, `sqrt_c`, `sqrt_alpha`, `scaled_tol`, `n_test`,
//! `timing`.

use std::str::FromStr;

use lassotune_core::datagen::{derive_seed, ScenarioConfig};
use lassotune_core::solvers::GridSpec;
use lassotune_core::variance::RcvRefit;
use lassotune_core::{MethodId, NoiseKind};

use crate::error::{HarnessError, Result};
use crate::methods::MethodSettings;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n: Vec<usize>,
    pub p: Vec<usize>,
    pub rho: Vec<f64>,
    pub alpha: Vec<f64>,
    pub snr: Vec<f64>,
    pub noise: Vec<NoiseKind>,
    pub methods: Vec<MethodId>,
    pub replications: usize,
    pub base_seed: u64,
    pub workers: usize,
    pub settings: MethodSettings,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            n: vec![100],
            p: vec![200, 500, 1000],
            rho: vec![0.1, 0.5, 0.8],
            alpha: vec![0.1, 0.4, 0.7],
            snr: vec![0.1, 1.0, 10.0],
            noise: vec![NoiseKind::Gaussian],
            methods: MethodId::STUDY.to_vec(),
            replications: 100,
            base_seed: 0,
            workers: 1,
            settings: MethodSettings::default(),
        }
    }
}

impl SweepSpec {
    /// The 16 scenarios of the risk-estimation table.
    pub fn risk_table() -> Self {
        Self {
            p: vec![200, 1000],
            rho: vec![0.1, 0.8],
            alpha: vec![0.4, 0.7],
            snr: vec![0.1, 10.0],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("n", self.n.is_empty()),
            ("p", self.p.is_empty()),
            ("rho", self.rho.is_empty()),
            ("alpha", self.alpha.is_empty()),
            ("snr", self.snr.is_empty()),
            ("noise", self.noise.is_empty()),
            ("methods", self.methods.is_empty()),
        ];
        if let Some((key, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(HarnessError::Config(format!("grid `{key}` is empty")));
        }
        if self.replications == 0 {
            return Err(HarnessError::Config("replications must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return Err(HarnessError::Config("methods are listed more than once".into()));
        }
        for s in self.scenarios() {
            s.validate()?;
        }
        Ok(())
    }

    /// Cartesian product of the grids, seeded per scenario. `replication_id`
    /// is left at 0.
    pub fn scenarios(&self) -> Vec<ScenarioConfig> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &p in &self.p {
                for &rho in &self.rho {
                    for &alpha in &self.alpha {
                        for &snr in &self.snr {
                            for &noise in &self.noise {
                                let cfg = ScenarioConfig::new(n, p, rho, alpha, snr).with_noise(noise);
                                let seed = scenario_seed(self.base_seed, &cfg.scenario_id());
                                out.push(cfg.with_seed(seed, 0));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx as u64 + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| HarnessError::Parse {
                line: line_no,
                msg: format!("expected `key = value`, got {line:?}"),
            })?;
            spec.set(key.trim(), value.trim())
                .map_err(|msg| HarnessError::Parse { line: line_no, msg })?;
        }
        Ok(spec)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let s = &mut self.settings;
        match key {
            "n" => self.n = list(value)?,
            "p" => self.p = list(value)?,
            "rho" => self.rho = list(value)?,
            "alpha" => self.alpha = list(value)?,
            "snr" => self.snr = list(value)?,
            "noise" => self.noise = list(value)?,
            "methods" => self.methods = list(value)?,
            "replications" => self.replications = one(value)?,
            "seed" | "base_seed" => self.base_seed = one(value)?,
            "workers" => self.workers = one(value)?,
            "folds" => s.folds = one(value)?,
            "grid_size" | "grid_eps" => {
                let (mut m, mut eps) = match s.grid {
                    GridSpec::Default { m, eps } => (m, eps),
                    GridSpec::Fixed(_) => (100, 1e-3),
                };
                if key == "grid_size" {
                    m = one(value)?;
                } else {
                    eps = one(value)?;
                }
                s.grid = GridSpec::Default { m, eps };
            }
            "cd_tol" => s.cd.tol = one(value)?,
            "cd_max_sweeps" => s.cd.max_sweeps = one(value)?,
            "rcv_refit" => {
                s.rcv_refit = match value.to_ascii_lowercase().as_str() {
                    "ols" => RcvRefit::Ols,
                    "plugin" | "plug-in" => RcvRefit::PlugIn,
                    other => return Err(format!("rcv_refit must be `ols` or `plugin`, got {other:?}")),
                }
            }
            "ssr_lambda0" => s.ssr_lambda0 = Some(one(value)?),
            "ssr_a" => s.ssr_a = one(value)?,
            "sqrt_c" => s.sqrt_c = one(value)?,
            "sqrt_alpha" => s.sqrt_alpha = one(value)?,
            "scaled_tol" => s.scaled.tol = one(value)?,
            "n_test" => s.n_test = one(value)?,
            "timing" => s.timing = one(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

fn one<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| format!("bad value {value:?}: {e}"))
}

fn list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    value.split(',').filter(|v| !v.trim().is_empty()).map(one).collect()
}

/// FNV-1a, used to turn a scenario id into a seed that does not depend on
/// the scenario's position in the sweep.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn scenario_seed(base_seed: u64, scenario_id: &str) -> u64 {
    derive_seed(base_seed, fnv1a(scenario_id.as_bytes()))
}
