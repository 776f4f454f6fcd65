//! Synthetic regression scenarios: equicorrelated Gaussian designs, sparse
//! Laplace coefficients calibrated to a target SNR, and Gaussian or scaled
//! `t(3)` noise. Also the two small analytic datasets used to show how
//! information criteria saturate.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal, StudentT};

use crate::error::{bail, Error, Result};
use crate::linalg::{dot, Matrix};

/// Law of the additive noise, before scaling by `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseKind {
    Gaussian,
    /// Student `t` with 3 degrees of freedom times `3^{-1/2}` (unit variance).
    ScaledT3,
}

impl NoiseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::ScaledT3 => "t3",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(NoiseKind::Gaussian),
            "t3" | "scaledt3" | "scaled_t3" => Ok(NoiseKind::ScaledT3),
            other => Err(Error::InvalidConfig(format!("unknown noise kind {other:?}"))),
        }
    }
}

/// One cell of the simulation grid plus the seed material for one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n: usize,
    pub p: usize,
    /// Equicorrelation of the design columns, in `[0, 1)`.
    pub rho: f64,
    /// `α`; the support size is `⌊n^α⌋`.
    pub sparsity_exponent: f64,
    /// Target `β*ᵀDβ*/σ²`. `None` keeps the raw Laplace draw.
    pub snr: Option<f64>,
    /// Noise variance `σ²`.
    pub sigma2: f64,
    pub noise_kind: NoiseKind,
    pub seed: u64,
    pub replication_id: u64,
}

impl ScenarioConfig {
    /// Gaussian noise with `σ² = 1`, seed and replication zero.
    pub fn new(n: usize, p: usize, rho: f64, sparsity_exponent: f64, snr: f64) -> Self {
        Self {
            n,
            p,
            rho,
            sparsity_exponent,
            snr: Some(snr),
            sigma2: 1.0,
            noise_kind: NoiseKind::Gaussian,
            seed: 0,
            replication_id: 0,
        }
    }

    pub fn with_noise(mut self, kind: NoiseKind) -> Self {
        self.noise_kind = kind;
        self
    }

    pub fn with_seed(mut self, seed: u64, replication_id: u64) -> Self {
        self.seed = seed;
        self.replication_id = replication_id;
        self
    }

    /// `s* = ⌊n^α⌋`.
    pub fn sparsity(&self) -> usize {
        support_size(self.n, self.sparsity_exponent)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            bail!(InvalidConfig, "n must be at least 2, got {}", self.n);
        }
        if self.p < 1 {
            bail!(InvalidConfig, "p must be at least 1");
        }
        check_rho(self.rho)?;
        if !(self.sparsity_exponent > 0.0 && self.sparsity_exponent < 1.0) {
            bail!(
                InvalidConfig,
                "sparsity exponent must lie in (0, 1), got {}",
                self.sparsity_exponent
            );
        }
        if let Some(snr) = self.snr {
            if !(snr > 0.0 && snr.is_finite()) {
                bail!(InvalidConfig, "snr must be positive, got {snr}");
            }
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            bail!(InvalidConfig, "noise variance must be positive, got {}", self.sigma2);
        }
        let s = self.sparsity();
        if s < 1 || s > self.n.min(self.p) {
            bail!(InvalidConfig, "support size {s} outside [1, min(n, p)]");
        }
        Ok(())
    }

    /// The generator stream for this `(seed, replication_id)` pair.
    pub fn rng(&self) -> ChaCha20Rng {
        stream_rng(self.seed, self.replication_id)
    }

    /// Stable human-readable identifier of the scenario cell (seed excluded).
    pub fn scenario_id(&self) -> String {
        let snr = match self.snr {
            Some(v) => format!("{v}"),
            None => String::from("raw"),
        };
        format!(
            "n{}_p{}_rho{}_a{}_snr{}_{}",
            self.n, self.p, self.rho, self.sparsity_exponent, snr, self.noise_kind
        )
    }
}

/// Independent ChaCha20 stream `stream` under key `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a sub-seed from `(seed, tag)` with the SplitMix64 mixer.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn support_size(n: usize, alpha: f64) -> usize {
    // The nudge keeps exact powers such as 100^0.5 from flooring to 9.
    ((n as f64).powf(alpha) + 1e-9).floor() as usize
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        bail!(InvalidConfig, "rho must lie in [0, 1), got {rho}");
    }
    Ok(())
}

/// Regression data together with the truth that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub beta_star: Vec<f64>,
    /// Sorted indices of the nonzero entries of `beta_star`.
    pub support_star: Vec<usize>,
    pub sigma2: f64,
    /// The noise realisation, so `y = x β* + noise` can be checked exactly.
    pub noise: Vec<f64>,
    pub config: ScenarioConfig,
}

impl SimulatedDataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

/// Coefficients `(a, b)` of `D^{1/2} = aI + b11ᵀ` for the `p × p`
/// equicorrelation matrix `D = (1−ρ)I + ρ11ᵀ`.
pub fn equicorrelation_sqrt(p: usize, rho: f64) -> (f64, f64) {
    let a = (1.0 - rho).sqrt();
    let b = ((1.0 - rho + p as f64 * rho).sqrt() - a) / p as f64;
    (a, b)
}

/// `vᵀ D v` for the equicorrelation matrix.
pub fn equicorrelation_quad_form(v: &[f64], rho: f64) -> f64 {
    let sum: f64 = v.iter().sum();
    (1.0 - rho) * dot(v, v) + rho * sum * sum
}

/// Applies `D^{1/2}` from the right to a row: `z ↦ a z + b (1ᵀz) 1`.
pub(crate) fn correlate_row(z: &mut [f64], a: f64, b: f64) {
    let shift = b * z.iter().sum::<f64>();
    for v in z.iter_mut() {
        *v = a * *v + shift;
    }
}

/// `n × p` design `Z D^{1/2}` with `Z` iid standard normal, drawn row by row.
pub fn gen_design<R: Rng + ?Sized>(n: usize, p: usize, rho: f64, rng: &mut R) -> Result<Matrix> {
    check_rho(rho)?;
    let (a, b) = equicorrelation_sqrt(p, rho);
    let mut x = Matrix::zeros(n, p);
    let mut row = vec![0.0; p];
    for i in 0..n {
        for v in row.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        if rho != 0.0 {
            correlate_row(&mut row, a, b);
        }
        for (j, &v) in row.iter().enumerate() {
            x.set(i, j, v);
        }
    }
    Ok(x)
}

/// Standard Laplace draw: an exponential with a random sign.
fn laplace<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let e: f64 = rng.sample(Exp1);
    if rng.random::<bool>() {
        e
    } else {
        -e
    }
}

/// Sparse coefficient vector: `⌊n^α⌋` positions chosen uniformly, Laplace(1)
/// values, then rescaled so `β*ᵀDβ* = snr·σ²` (skipped when `snr` is `None`).
pub fn gen_beta<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    alpha: f64,
    snr: Option<f64>,
    rho: f64,
    sigma2: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<usize>)> {
    check_rho(rho)?;
    if let Some(snr) = snr {
        if !(snr > 0.0) {
            bail!(InvalidConfig, "snr must be positive, got {snr}");
        }
    }
    let s = support_size(n, alpha);
    if s > p {
        bail!(InvalidConfig, "support size {s} exceeds p = {p}");
    }
    let mut support = index::sample(rng, p, s).into_vec();
    support.sort_unstable();
    let mut beta = vec![0.0; p];
    for &j in &support {
        beta[j] = laplace(rng);
    }
    if let Some(snr) = snr {
        let energy = equicorrelation_quad_form(&beta, rho);
        if !(energy > 0.0) {
            bail!(Degenerate, "drawn coefficients have zero signal energy");
        }
        let scale = (snr * sigma2 / energy).sqrt();
        for v in beta.iter_mut() {
            *v *= scale;
        }
    }
    Ok((beta, support))
}

/// `n` iid unit-variance noise draws.
pub fn gen_noise<R: Rng + ?Sized>(n: usize, kind: NoiseKind, rng: &mut R) -> Vec<f64> {
    match kind {
        NoiseKind::Gaussian => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
        NoiseKind::ScaledT3 => {
            let t = StudentT::new(3.0).expect("t(3) is a valid law");
            let scale = 1.0 / 3.0.sqrt();
            (0..n).map(|_| scale * rng.sample(t)).collect()
        }
    }
}

/// Draws the full dataset: design, then coefficients, then noise, all from the
/// stream of `(config.seed, config.replication_id)`.
pub fn gen_dataset(config: &ScenarioConfig) -> Result<SimulatedDataset> {
    config.validate()?;
    let mut rng = config.rng();
    let x = gen_design(config.n, config.p, config.rho, &mut rng)?;
    let (beta_star, support_star) = gen_beta(
        config.n,
        config.p,
        config.sparsity_exponent,
        config.snr,
        config.rho,
        config.sigma2,
        &mut rng,
    )?;
    let sigma = config.sigma2.sqrt();
    let mut noise = gen_noise(config.n, config.noise_kind, &mut rng);
    for e in noise.iter_mut() {
        *e *= sigma;
    }
    let mut y = x.mul_vec(&beta_star);
    for (yi, e) in y.iter_mut().zip(&noise) {
        *yi += e;
    }
    Ok(SimulatedDataset {
        x,
        y,
        beta_star,
        support_star,
        sigma2: config.sigma2,
        noise,
        config: config.clone(),
    })
}

/// Two observations, three perfectly collinear unit-norm columns, and a
/// response equal to `σ` times the first column (no noise realised).
pub fn example1_dataset(sigma: f64) -> SimulatedDataset {
    let h = 1.0 / 2.0.sqrt();
    let x = Matrix::from_rows(&[&[h, -h, h], &[-h, h, -h]]);
    let y = vec![sigma * h, -sigma * h];
    let mut config = ScenarioConfig::new(2, 3, 0.0, 0.5, 1.0);
    config.snr = None;
    config.sigma2 = sigma * sigma;
    SimulatedDataset {
        x,
        y,
        beta_star: vec![sigma, 0.0, 0.0],
        support_star: vec![0],
        sigma2: sigma * sigma,
        noise: vec![0.0, 0.0],
        config,
    }
}

/// `n = 30`, `p = 150`, independent columns, one raw Laplace(1) coefficient and
/// noise standard deviation `sigma`.
pub fn example2_config(sigma: f64, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        n: 30,
        p: 150,
        rho: 0.0,
        // ⌊30^0.1⌋ = 1
        sparsity_exponent: 0.1,
        snr: None,
        sigma2: sigma * sigma,
        noise_kind: NoiseKind::Gaussian,
        seed,
        replication_id: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_sizes_for_n100() {
        assert_eq!(support_size(100, 0.1), 1);
        assert_eq!(support_size(100, 0.4), 6);
        assert_eq!(support_size(100, 0.7), 25);
        assert_eq!(support_size(100, 0.5), 10);
        assert_eq!(support_size(30, 0.1), 1);
    }

    #[test]
    fn rho_zero_is_identity() {
        let mut r1 = stream_rng(7, 0);
        let mut r2 = stream_rng(7, 0);
        let x = gen_design(4, 3, 0.0, &mut r1).unwrap();
        for i in 0..4 {
            for j in 0..3 {
                let z: f64 = r2.sample(StandardNormal);
                assert_eq!(x.get(i, j), z);
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut rng = stream_rng(1, 1);
        assert!(gen_design(3, 3, 1.0, &mut rng).is_err());
        assert!(gen_design(3, 3, -0.1, &mut rng).is_err());
        assert!(gen_beta(100, 200, 0.4, Some(0.0), 0.1, 1.0, &mut rng).is_err());
        assert!(gen_beta(100, 3, 0.4, Some(1.0), 0.1, 1.0, &mut rng).is_err());
        assert!(ScenarioConfig::new(100, 200, 0.1, 0.4, 0.0).validate().is_err());
        assert!(ScenarioConfig::new(1, 200, 0.1, 0.4, 1.0).validate().is_err());
    }

    #[test]
    fn empty_noise() {
        let mut rng = stream_rng(1, 1);
        assert!(gen_noise(0, NoiseKind::ScaledT3, &mut rng).is_empty());
    }

    #[test]
    fn example1_shape() {
        let d = example1_dataset(1.5);
        for j in 0..3 {
            let c = d.x.col(j);
            assert!((dot(c, c) - 1.0).abs() < 1e-15);
            assert!((c[0] + c[1]).abs() < 1e-15);
        }
        assert!((dot(&d.y, &d.y) - 2.25).abs() < 1e-14);
        let fit = d.x.mul_vec(&d.beta_star);
        assert_eq!(fit, d.y);
    }

    #[test]
    fn example2_has_one_nonzero() {
        let cfg = example2_config(1.5, 3);
        let d = gen_dataset(&cfg).unwrap();
        assert_eq!(d.support_star.len(), 1);
        assert_eq!((d.n(), d.p()), (30, 150));
        assert_eq!(d, gen_dataset(&cfg).unwrap());
    }
}
