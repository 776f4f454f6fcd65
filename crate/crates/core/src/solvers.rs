//! Lasso, ridge and least-squares estimators.
//!
//! The lasso objective throughout is `(1/n)‖Y − Xβ‖² + λ‖β‖₁`. Under that
//! scaling `β = 0` is optimal exactly when `λ ≥ 2‖XᵀY‖_∞/n`, and the
//! coordinate-wise minimiser soft-thresholds at `λ/2`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{bail, Error, Result};
use crate::linalg::{axpy, cholesky, cholesky_solve, dot, lstsq_min_norm, norm_inf, norm_sq, rank, Matrix, Svd};

#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Indices of the nonzero coefficients.
pub fn support_of(beta: &[f64]) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, &b)| b != 0.0)
        .map(|(j, _)| j)
        .collect()
}

/// `(1/n)‖Y − Xβ‖²`.
pub fn train_error(x: &Matrix, y: &[f64], beta: &[f64]) -> f64 {
    let fit = x.mul_vec(beta);
    let rss: f64 = y.iter().zip(&fit).map(|(a, b)| (a - b) * (a - b)).sum();
    rss / y.len() as f64
}

/// Smallest `λ` at which the zero vector solves the lasso: `2‖XᵀY‖_∞/n`.
pub fn lambda_max(x: &Matrix, y: &[f64]) -> f64 {
    2.0 * norm_inf(&x.tr_mul_vec(y)) / x.nrows() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridOrigin {
    KktMax,
    UserSupplied,
}

/// Strictly decreasing, strictly positive sequence of penalty levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    values: Vec<f64>,
    origin: GridOrigin,
}

impl LambdaGrid {
    pub fn new(values: Vec<f64>, origin: GridOrigin) -> Result<Self> {
        if values.is_empty() {
            bail!(InvalidConfig, "lambda grid is empty");
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            bail!(InvalidConfig, "lambda grid values must be positive and finite");
        }
        if values.windows(2).any(|w| !(w[0] > w[1])) {
            bail!(InvalidConfig, "lambda grid must be strictly decreasing");
        }
        Ok(Self { values, origin })
    }

    /// `m` log-spaced values from `hi` down to `lo`.
    pub fn log_spaced(hi: f64, lo: f64, m: usize, origin: GridOrigin) -> Result<Self> {
        if m == 0 {
            bail!(InvalidConfig, "grid needs at least one value");
        }
        if m == 1 {
            return Self::new(vec![hi], origin);
        }
        let (lhi, llo) = (hi.ln(), lo.ln());
        let step = (llo - lhi) / (m - 1) as f64;
        let mut values: Vec<f64> = (0..m).map(|k| (lhi + step * k as f64).exp()).collect();
        values[0] = hi;
        values[m - 1] = lo;
        Self::new(values, origin)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin(&self) -> GridOrigin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("grid is nonempty")
    }
}

/// `m` log-spaced values from `λ_max` down to `eps·λ_max`.
pub fn default_grid(x: &Matrix, y: &[f64], m: usize, eps: f64) -> Result<LambdaGrid> {
    let hi = lambda_max(x, y);
    if !(hi > 0.0) {
        bail!(
            Degenerate,
            "lambda_max is zero: the response is orthogonal to every column"
        );
    }
    LambdaGrid::log_spaced(hi, eps * hi, m, GridOrigin::KktMax)
}

/// How a selector obtains its grid: a fixed sequence, or `m` log-spaced values
/// from `λ_max` of whatever data it is fitting down to `eps·λ_max`.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Default { m: usize, eps: f64 },
    Fixed(LambdaGrid),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Default { m: 100, eps: 1e-3 }
    }
}

impl GridSpec {
    pub fn build(&self, x: &Matrix, y: &[f64]) -> Result<LambdaGrid> {
        match self {
            GridSpec::Default { m, eps } => default_grid(x, y, *m, *eps),
            GridSpec::Fixed(g) => Ok(g.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdOptions {
    /// Convergence threshold on the largest coefficient change in a sweep.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Rescale columns to `‖X_j‖² = n` before solving (off for the simulated
    /// designs, which are unit variance by construction).
    pub standardize: bool,
}

impl Default for CdOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_sweeps: 100_000,
            standardize: false,
        }
    }
}

/// A single lasso fit and the quantities every selector needs from it.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub beta: Vec<f64>,
    pub lambda: f64,
    pub support: Vec<usize>,
    /// `rank(X_S)`.
    pub df: usize,
    /// `(1/n)‖Y − Xβ‖²`.
    pub train_err: f64,
    pub kkt_residual: f64,
    pub sweeps: usize,
}

impl FittedModel {
    pub fn from_beta(x: &Matrix, y: &[f64], beta: Vec<f64>, lambda: f64, sweeps: usize) -> Self {
        let support = support_of(&beta);
        let df = df_lasso(x, &support);
        let train_err = train_error(x, y, &beta);
        let kkt = kkt_residual(x, y, &beta, lambda);
        Self {
            beta,
            lambda,
            support,
            df,
            train_err,
            kkt_residual: kkt,
            sweeps,
        }
    }
}

/// Largest violation of the lasso optimality conditions at `β`:
/// `|(2/n)X_jᵀr| ≤ λ` off the support, `(2/n)X_jᵀr = λ·sign(β_j)` on it.
pub fn kkt_residual(x: &Matrix, y: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let n = x.nrows() as f64;
    let fit = x.mul_vec(beta);
    let r: Vec<f64> = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
    let mut worst: f64 = 0.0;
    for (j, &b) in beta.iter().enumerate() {
        let g = 2.0 * dot(x.col(j), &r) / n;
        let v = if b != 0.0 {
            (g - lambda * b.signum()).abs()
        } else {
            (g.abs() - lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

/// Cyclic coordinate descent with an active-set inner loop. Holds the column
/// scalings so a whole grid can be solved with warm starts.
pub(crate) struct CoordinateDescent<'a> {
    x: &'a Matrix,
    /// `‖X_j‖²/n`
    col_sq: Vec<f64>,
    inv_n: f64,
}

impl<'a> CoordinateDescent<'a> {
    pub(crate) fn new(x: &'a Matrix) -> Self {
        let inv_n = 1.0 / x.nrows() as f64;
        let col_sq = (0..x.ncols()).map(|j| norm_sq(x.col(j)) * inv_n).collect();
        Self { x, col_sq, inv_n }
    }

    /// Updates coordinate `j` in place and returns the absolute change.
    #[inline]
    fn update(&self, j: usize, half_lambda: f64, beta: &mut [f64], resid: &mut [f64]) -> f64 {
        let cs = self.col_sq[j];
        if cs == 0.0 {
            return 0.0;
        }
        let col = self.x.col(j);
        let old = beta[j];
        let z = dot(col, resid) * self.inv_n + cs * old;
        let new = soft_threshold(z, half_lambda) / cs;
        if new != old {
            axpy(old - new, col, resid);
            beta[j] = new;
        }
        (new - old).abs()
    }

    /// Step towards the exact minimiser over the active coordinates with
    /// their signs held fixed, `(X_AᵀX_A/n)β_A = X_Aᵀy/n − (λ/2)s_A`. The step
    /// is cut short where the first coefficient reaches zero, so the lasso
    /// objective never increases.
    fn face_step(&self, active: &[usize], half_lambda: f64, beta: &mut [f64], resid: &mut [f64]) {
        let k = active.len();
        if k > self.x.nrows() {
            self.null_step(&active[..=self.x.nrows()], beta, resid);
            return;
        }
        if k == 0 {
            return;
        }
        let mut g = Matrix::zeros(k, k);
        for (a, &i) in active.iter().enumerate() {
            for (b, &j) in active.iter().enumerate().take(a + 1) {
                let v = dot(self.x.col(i), self.x.col(j)) * self.inv_n;
                g.set(a, b, v);
                g.set(b, a, v);
            }
        }
        let max_diag = active.iter().map(|&j| self.col_sq[j]).fold(0.0, f64::max);
        let Some(l) = cholesky(&g, 1e-10 * max_diag) else {
            return;
        };
        let rhs: Vec<f64> = active
            .iter()
            .enumerate()
            .map(|(a, &j)| {
                let gb: f64 = active.iter().enumerate().map(|(b, &m)| g.get(a, b) * beta[m]).sum();
                dot(self.x.col(j), resid) * self.inv_n + gb - half_lambda * beta[j].signum()
            })
            .collect();
        let target = cholesky_solve(&l, &rhs);
        let mut t: f64 = 1.0;
        for (&j, &v) in active.iter().zip(&target) {
            if v.signum() != beta[j].signum() || v == 0.0 {
                t = t.min(beta[j] / (beta[j] - v));
            }
        }
        for (&j, &v) in active.iter().zip(&target) {
            let b = beta[j] + t * (v - beta[j]);
            let b = if b.signum() != beta[j].signum() || (t < 1.0 && (b / beta[j]).abs() < 1e-12) {
                0.0
            } else {
                b
            };
            axpy(beta[j] - b, self.x.col(j), resid);
            beta[j] = b;
        }
    }

    /// More active columns than rows: some combination `d` of them has
    /// `X_A d = 0`, so moving along `d` leaves the fit unchanged while the
    /// ℓ1 norm does not grow. Moves until the first coefficient reaches zero.
    fn null_step(&self, cols: &[usize], beta: &mut [f64], resid: &mut [f64]) {
        let (last, head) = cols.split_last().expect("nonempty");
        let xh = self.x.select_columns(head);
        let target = self.x.col(*last);
        let g = xh.gram();
        let max_diag = head.iter().map(|&j| self.col_sq[j]).fold(0.0, f64::max);
        let c = match cholesky(&g, 1e-10 * max_diag) {
            Some(l) => cholesky_solve(&l, &xh.tr_mul_vec(target)),
            None => lstsq_min_norm(&xh, target),
        };
        let mut d: Vec<f64> = c;
        d.push(-1.0);
        let mut gap = target.to_vec();
        for (&j, &dj) in head.iter().zip(&d) {
            axpy(-dj, self.x.col(j), &mut gap);
        }
        if norm_sq(&gap) > 1e-20 * self.col_sq[*last] * self.x.nrows() as f64 {
            return;
        }
        let slope: f64 = cols.iter().zip(&d).map(|(&j, &dj)| beta[j].signum() * dj).sum();
        if slope > 0.0 {
            d.iter_mut().for_each(|v| *v = -*v);
        }
        let Some((hit, t)) = cols
            .iter()
            .zip(&d)
            .filter(|(&j, &dj)| dj != 0.0 && dj.signum() != beta[j].signum())
            .map(|(&j, &dj)| (j, -beta[j] / dj))
            .min_by(|a, b| a.1.total_cmp(&b.1))
        else {
            return;
        };
        for (&j, &dj) in cols.iter().zip(&d) {
            let b = if j == hit { 0.0 } else { beta[j] + t * dj };
            axpy(beta[j] - b, self.x.col(j), resid);
            beta[j] = b;
        }
    }

    /// Solves at `lambda` starting from `beta`; `resid` must hold `Y − Xβ`.
    /// Returns the number of sweeps used.
    ///
    /// Each round is a full sweep followed by sweeps over the nonzero
    /// coordinates until they settle. When those stall, an exact solve on the
    /// current sign pattern is tried.
    pub(crate) fn solve(&self, lambda: f64, beta: &mut [f64], resid: &mut [f64], opts: &CdOptions) -> Result<usize> {
        const STALL: usize = 10;
        let half = 0.5 * lambda;
        let p = beta.len();
        let mut sweeps = 0;
        let mut active: Vec<usize> = Vec::new();
        let no_convergence = |sweeps: usize, beta: &[f64]| Error::NoConvergence {
            iterations: sweeps,
            last: beta.to_vec(),
        };
        loop {
            let mut max_change: f64 = 0.0;
            active.clear();
            for j in 0..p {
                max_change = max_change.max(self.update(j, half, beta, resid));
                if beta[j] != 0.0 {
                    active.push(j);
                }
            }
            sweeps += 1;
            if max_change < opts.tol {
                return Ok(sweeps);
            }
            let mut inner_sweeps = 0;
            loop {
                if sweeps >= opts.max_sweeps {
                    return Err(no_convergence(sweeps, beta));
                }
                let mut inner: f64 = 0.0;
                for &j in &active {
                    inner = inner.max(self.update(j, half, beta, resid));
                }
                sweeps += 1;
                inner_sweeps += 1;
                if inner < opts.tol {
                    break;
                }
                if inner_sweeps % STALL == 0 {
                    active.retain(|&j| beta[j] != 0.0);
                    self.face_step(&active, half, beta, resid);
                }
            }
            if sweeps >= opts.max_sweeps {
                return Err(no_convergence(sweeps, beta));
            }
        }
    }
}

fn residual(x: &Matrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    let fit = x.mul_vec(beta);
    y.iter().zip(&fit).map(|(a, b)| a - b).collect()
}

/// Column scales `s_j` with `‖X_j / s_j‖² = n`; zero columns keep scale 1.
fn column_scales(x: &Matrix) -> Vec<f64> {
    let n = x.nrows() as f64;
    (0..x.ncols())
        .map(|j| {
            let s = (norm_sq(x.col(j)) / n).sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect()
}

fn scale_columns(x: &Matrix, scales: &[f64]) -> Matrix {
    let mut out = x.clone();
    for (j, &s) in scales.iter().enumerate() {
        for v in out.col_mut(j) {
            *v /= s;
        }
    }
    out
}

/// Lasso at a single `λ` by coordinate descent, optionally warm-started.
pub fn lasso_cd(
    x: &Matrix,
    y: &[f64],
    lambda: f64,
    warm_start: Option<&[f64]>,
    opts: &CdOptions,
) -> Result<FittedModel> {
    if !(lambda > 0.0) {
        bail!(InvalidConfig, "lasso_cd needs lambda > 0, got {lambda}");
    }
    check_dims(x, y)?;
    let p = x.ncols();
    let mut beta = match warm_start {
        Some(w) if w.len() == p => w.to_vec(),
        Some(w) => bail!(Dimension, "warm start has length {} but p = {p}", w.len()),
        None => vec![0.0; p],
    };
    let sweeps = if opts.standardize {
        let scales = column_scales(x);
        let xs = scale_columns(x, &scales);
        for (b, s) in beta.iter_mut().zip(&scales) {
            *b *= s;
        }
        let mut resid = residual(&xs, y, &beta);
        let sweeps = CoordinateDescent::new(&xs).solve(lambda, &mut beta, &mut resid, opts)?;
        for (b, s) in beta.iter_mut().zip(&scales) {
            *b /= s;
        }
        sweeps
    } else {
        let mut resid = residual(x, y, &beta);
        CoordinateDescent::new(x).solve(lambda, &mut beta, &mut resid, opts)?
    };
    Ok(FittedModel::from_beta(x, y, beta, lambda, sweeps))
}

/// Coefficient vectors along `grid`, each warm-started from the previous one.
pub fn lasso_grid(x: &Matrix, y: &[f64], grid: &LambdaGrid, opts: &CdOptions) -> Result<Vec<Vec<f64>>> {
    check_dims(x, y)?;
    let cd = CoordinateDescent::new(x);
    let mut beta = vec![0.0; x.ncols()];
    let mut resid = y.to_vec();
    let mut out = Vec::with_capacity(grid.len());
    for &lambda in grid.values() {
        cd.solve(lambda, &mut beta, &mut resid, opts)?;
        out.push(beta.clone());
    }
    Ok(out)
}

fn check_dims(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.nrows() != y.len() {
        bail!(Dimension, "X has {} rows but Y has length {}", x.nrows(), y.len());
    }
    Ok(())
}

/// Piecewise-linear lasso solution path with knots where the support changes.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoPath {
    /// Decreasing; the first entry is `λ_max`.
    pub knots: Vec<f64>,
    pub betas: Vec<Vec<f64>>,
    /// Support of the coefficient vector at each knot.
    pub active_sets: Vec<Vec<usize>>,
    /// `rank(X_S)` at each knot.
    pub ranks: Vec<usize>,
}

impl LassoPath {
    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// Coefficients at an arbitrary `λ` by linear interpolation between knots.
    /// `None` below the last knot, where the path was not computed.
    pub fn coef_at(&self, lambda: f64) -> Option<Vec<f64>> {
        let first = *self.knots.first()?;
        if lambda >= first {
            return Some(vec![0.0; self.betas[0].len()]);
        }
        for k in 0..self.knots.len() - 1 {
            let (hi, lo) = (self.knots[k], self.knots[k + 1]);
            if lambda <= hi && lambda >= lo {
                if hi == lo {
                    return Some(self.betas[k + 1].clone());
                }
                let t = (hi - lambda) / (hi - lo);
                return Some(
                    self.betas[k]
                        .iter()
                        .zip(&self.betas[k + 1])
                        .map(|(a, b)| if a == b { *a } else { a + t * (b - a) })
                        .collect(),
                );
            }
        }
        None
    }
}

/// Relative threshold on the Cholesky pivot below which an entering column
/// counts as linearly dependent on the active ones.
const COLLINEAR_TOL: f64 = 1e-10;
/// Correlations within this relative distance of the maximum count as tied.
const TIE_TOL: f64 = 1e-12;

struct ActiveSet {
    cols: Vec<usize>,
    chol: Matrix,
}

impl ActiveSet {
    fn new() -> Self {
        Self {
            cols: Vec::new(),
            chol: Matrix::zeros(0, 0),
        }
    }

    /// Solves `L w = X_Aᵀx_j` and returns `w` with the squared distance of
    /// `x_j` from the span of the set, or `None` if `x_j` is (numerically)
    /// inside that span.
    fn pivot(&self, x: &Matrix, j: usize) -> Option<(Vec<f64>, f64)> {
        let xj = x.col(j);
        let xx = norm_sq(xj);
        if xx == 0.0 {
            return None;
        }
        let mut w: Vec<f64> = self.cols.iter().map(|&a| dot(x.col(a), xj)).collect();
        for i in 0..w.len() {
            let mut s = w[i];
            for m in 0..i {
                s -= self.chol.get(i, m) * w[m];
            }
            w[i] = s / self.chol.get(i, i);
        }
        let d2 = xx - norm_sq(&w);
        (d2 > COLLINEAR_TOL * xx).then_some((w, d2))
    }

    /// Appends column `j` if it is not (numerically) in the span of the
    /// current set. Returns whether it was added.
    fn try_add(&mut self, x: &Matrix, j: usize) -> bool {
        let k = self.cols.len();
        let Some((w, d2)) = self.pivot(x, j) else {
            return false;
        };
        let mut l = Matrix::zeros(k + 1, k + 1);
        for c in 0..k {
            for r in c..k {
                l.set(r, c, self.chol.get(r, c));
            }
        }
        for (m, &wm) in w.iter().enumerate() {
            l.set(k, m, wm);
        }
        l.set(k, k, d2.sqrt());
        self.chol = l;
        self.cols.push(j);
        true
    }

    fn remove(&mut self, x: &Matrix, j: usize) {
        self.cols.retain(|&c| c != j);
        let g = x.select_columns(&self.cols).gram();
        self.chol = cholesky(&g, 0.0).unwrap_or_else(|| Matrix::zeros(0, 0));
        if self.chol.nrows() != self.cols.len() {
            // Rebuild column by column, discarding anything now dependent.
            let cols = core::mem::take(&mut self.cols);
            self.chol = Matrix::zeros(0, 0);
            for c in cols {
                self.try_add(x, c);
            }
        }
    }
}

/// Lasso solution path by least angle regression with the lasso modification
/// (a coefficient that hits zero leaves the active set).
///
/// Ties in the entry correlation are resolved by column index. Columns that
/// are linearly dependent on the active set never enter. At most
/// `min(n − 1, p)` variables are active: the path ends at the first knot where
/// another one would have to enter, or at `λ = 0` once the residual is
/// uncorrelated with every column.
pub fn lasso_path(x: &Matrix, y: &[f64]) -> Result<LassoPath> {
    check_dims(x, y)?;
    let n = x.nrows();
    let p = x.ncols();
    if n == 0 {
        bail!(Dimension, "no observations");
    }
    if x.as_slice().iter().all(|&v| v == 0.0) {
        bail!(Degenerate, "design matrix is identically zero");
    }
    let nf = n as f64;
    let max_active = (n - 1).min(p);

    let mut beta = vec![0.0; p];
    let mut path = LassoPath {
        knots: Vec::new(),
        betas: Vec::new(),
        active_sets: Vec::new(),
        ranks: Vec::new(),
    };
    let record = |path: &mut LassoPath, lambda: f64, beta: &[f64]| {
        let support = support_of(beta);
        path.ranks.push(support.len());
        path.active_sets.push(support);
        path.knots.push(lambda.max(0.0));
        path.betas.push(beta.to_vec());
    };

    let mut c = x.tr_mul_vec(y);
    let c0 = norm_inf(&c);
    record(&mut path, 2.0 * c0 / nf, &beta);
    if c0 == 0.0 || max_active == 0 {
        return Ok(path);
    }

    let mut active = ActiveSet::new();
    let mut in_active = vec![false; p];
    let mut ignored = vec![false; p];
    let mut pending: Option<usize> = None;
    let mut just_dropped: Option<usize> = None;
    let scale = c0;
    let max_steps = 8 * n.min(p) + 8;

    for _ in 0..max_steps {
        let resid = residual(x, y, &beta);
        c = x.tr_mul_vec(&resid);
        let c_max = if active.cols.is_empty() {
            (0..p).filter(|&j| !ignored[j]).fold(0.0, |m: f64, j| m.max(c[j].abs()))
        } else {
            active.cols.iter().fold(0.0, |m: f64, &j| m.max(c[j].abs()))
        };

        // Entries: the variable that triggered the last knot plus exact ties,
        // in index order.
        let mut candidates: Vec<usize> = (0..p)
            .filter(|&j| {
                !in_active[j] && !ignored[j] && Some(j) != just_dropped && c[j].abs() >= c_max * (1.0 - TIE_TOL)
            })
            .collect();
        if let Some(j) = pending.take() {
            if !in_active[j] && !ignored[j] && !candidates.contains(&j) {
                candidates.push(j);
                candidates.sort_unstable();
            }
        }
        let mut full = false;
        for j in candidates {
            if active.cols.len() >= max_active {
                if active.pivot(x, j).is_some() {
                    full = true;
                    break;
                }
                ignored[j] = true;
                continue;
            }
            if active.try_add(x, j) {
                in_active[j] = true;
            } else {
                ignored[j] = true;
            }
        }
        if full || active.cols.is_empty() {
            break;
        }

        // Equiangular direction: X_Aᵀ X_A d = s_A.
        let signs: Vec<f64> = active
            .cols
            .iter()
            .map(|&j| {
                if beta[j] != 0.0 {
                    beta[j].signum()
                } else {
                    c[j].signum()
                }
            })
            .collect();
        let d = cholesky_solve(&active.chol, &signs);
        let mut u = vec![0.0; n];
        for (&j, &dj) in active.cols.iter().zip(&d) {
            axpy(dj, x.col(j), &mut u);
        }
        let a = x.tr_mul_vec(&u);

        let mut gamma = c_max;
        let mut event = Event::Zero;
        for j in 0..p {
            // A variable that just left may come back later in the step, but
            // not through the root that sits at the knot it left from.
            if in_active[j] || ignored[j] {
                continue;
            }
            for (num, den) in [(c_max - c[j], 1.0 - a[j]), (c_max + c[j], 1.0 + a[j])] {
                if Some(j) == just_dropped && num <= 1e-9 * c_max {
                    continue;
                }
                if den > 1e-12 {
                    let g = num / den;
                    if g > TIE_TOL * scale && g < gamma {
                        gamma = g;
                        event = Event::Enter(j);
                    }
                }
            }
        }
        for (&j, &dj) in active.cols.iter().zip(&d) {
            if beta[j] != 0.0 && dj != 0.0 {
                let g = -beta[j] / dj;
                if g > 0.0 && g < gamma {
                    gamma = g;
                    event = Event::Drop(j);
                }
            }
        }

        for (&j, &dj) in active.cols.iter().zip(&d) {
            beta[j] += gamma * dj;
        }
        just_dropped = None;
        match event {
            Event::Drop(j) => {
                beta[j] = 0.0;
                in_active[j] = false;
                active.remove(x, j);
                just_dropped = Some(j);
            }
            Event::Enter(j) => pending = Some(j),
            Event::Zero => {}
        }
        let lambda = 2.0 * (c_max - gamma) / nf;
        record(&mut path, lambda, &beta);
        if matches!(event, Event::Zero) {
            break;
        }
    }
    Ok(path)
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Enter(usize),
    Drop(usize),
    Zero,
}

/// Ridge estimate `(XᵀX + λI)⁻¹XᵀY` through the SVD of `X`.
pub fn ridge(x: &Matrix, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        bail!(InvalidConfig, "ridge needs lambda > 0, got {lambda}");
    }
    check_dims(x, y)?;
    let svd = Svd::new(x);
    let mut beta = vec![0.0; x.ncols()];
    for (k, &s) in svd.s.iter().enumerate() {
        if s > 0.0 {
            let coef = s * dot(svd.u.col(k), y) / (s * s + lambda);
            axpy(coef, svd.v.col(k), &mut beta);
        }
    }
    Ok(beta)
}

/// Trace of the ridge hat matrix, `Σ d_i²/(d_i² + λ)`. At `λ = 0` this is the
/// numerical rank of `X`.
pub fn ridge_df(x: &Matrix, lambda: f64) -> f64 {
    let svd = Svd::new(x);
    if lambda == 0.0 {
        return svd.rank() as f64;
    }
    svd.s.iter().map(|&d| d * d / (d * d + lambda)).sum()
}

/// `rank(X_S)`, the unbiased lasso degrees-of-freedom estimate.
pub fn df_lasso(x: &Matrix, support: &[usize]) -> usize {
    if support.is_empty() {
        return 0;
    }
    rank(&x.select_columns(support))
}

/// Least squares on the selected columns (minimum-norm when they are
/// dependent), embedded back into `p` coordinates.
pub fn ols_refit(x: &Matrix, support: &[usize], y: &[f64]) -> Vec<f64> {
    let mut beta = vec![0.0; x.ncols()];
    if support.is_empty() {
        return beta;
    }
    let coef = lstsq_min_norm(&x.select_columns(support), y);
    for (&j, c) in support.iter().zip(coef) {
        beta[j] = c;
    }
    beta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::example1_dataset;

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
    }

    #[test]
    fn lambda_max_orthogonal_response_is_zero() {
        let x = Matrix::from_rows(&[&[1.0, 1.0], &[1.0, -1.0], &[0.0, 0.0]]);
        assert_eq!(lambda_max(&x, &[0.0, 0.0, 1.0]), 0.0);
        assert!(default_grid(&x, &[0.0, 0.0, 1.0], 10, 1e-3).is_err());
    }

    #[test]
    fn lambda_max_single_column() {
        // ‖x‖² = n = 4, Y = c x  ->  2|c|
        let x = Matrix::from_rows(&[&[1.0], &[-1.0], &[1.0], &[-1.0]]);
        let y = [-0.75, 0.75, -0.75, 0.75];
        assert!((lambda_max(&x, &y) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn grid_endpoints_and_ratios() {
        let g = LambdaGrid::log_spaced(2.0, 0.002, 2, GridOrigin::KktMax).unwrap();
        assert_eq!(g.values(), &[2.0, 0.002]);
        let g = LambdaGrid::log_spaced(1.0, 1e-3, 50, GridOrigin::KktMax).unwrap();
        let r0 = g.values()[1] / g.values()[0];
        for w in g.values().windows(2) {
            assert!((w[1] / w[0] - r0).abs() < 1e-12);
        }
        assert!(LambdaGrid::log_spaced(1.0, 1.0, 5, GridOrigin::KktMax).is_err());
        assert!(LambdaGrid::new(vec![1.0, 0.0], GridOrigin::UserSupplied).is_err());
    }

    #[test]
    fn zero_at_lambda_max() {
        let d = example1_dataset(1.0);
        let lm = lambda_max(&d.x, &d.y);
        let fit = lasso_cd(&d.x, &d.y, lm, None, &CdOptions::default()).unwrap();
        assert!(fit.beta.iter().all(|&b| b == 0.0));
        assert!(lasso_cd(&d.x, &d.y, 0.0, None, &CdOptions::default()).is_err());
    }

    #[test]
    fn example1_train_error_vanishes() {
        let d = example1_dataset(1.0);
        let mut prev = f64::INFINITY;
        for lambda in [1e-1, 1e-2, 1e-3, 1e-4] {
            let fit = lasso_cd(&d.x, &d.y, lambda, None, &CdOptions::default()).unwrap();
            assert!(fit.train_err < prev);
            prev = fit.train_err;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn example1_path_has_one_variable() {
        let d = example1_dataset(1.0);
        let path = lasso_path(&d.x, &d.y).unwrap();
        assert!((path.knots[0] - lambda_max(&d.x, &d.y)).abs() < 1e-14);
        for s in &path.active_sets {
            assert!(s.len() <= 1);
        }
        assert!(path.active_sets.iter().any(|s| s.len() == 1));
    }

    #[test]
    fn ridge_example1_fitted_values() {
        let d = example1_dataset(1.0);
        for lambda in [1e-3, 0.1, 1.0, 7.0] {
            let b = ridge(&d.x, &d.y, lambda).unwrap();
            let fit = d.x.mul_vec(&b);
            for (f, y) in fit.iter().zip(&d.y) {
                assert!((f - 3.0 / (3.0 + lambda) * y).abs() < 1e-12);
            }
            assert!((ridge_df(&d.x, lambda) - 3.0 / (lambda + 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn ridge_df_limits() {
        let x = Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 2.0], &[1.0, 1.0]]);
        assert_eq!(ridge_df(&x, 0.0), 2.0);
        assert!(ridge_df(&x, 1e12) < 1e-10);
    }

    #[test]
    fn df_lasso_cases() {
        let d = example1_dataset(1.0);
        assert_eq!(df_lasso(&d.x, &[]), 0);
        assert_eq!(df_lasso(&d.x, &[0, 1, 2]), 1);
    }

    #[test]
    fn ols_refit_duplicate_column() {
        let x = Matrix::from_rows(&[&[1.0, 1.0, 0.0], &[2.0, 2.0, 1.0], &[3.0, 3.0, 0.0]]);
        let y = [1.0, 2.5, 2.0];
        let both = ols_refit(&x, &[0, 1], &y);
        let one = ols_refit(&x, &[0], &y);
        assert!((both[0] - both[1]).abs() < 1e-12);
        let (fb, fo) = (x.mul_vec(&both), x.mul_vec(&one));
        for (a, b) in fb.iter().zip(&fo) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(ols_refit(&x, &[], &y), vec![0.0; 3]);
    }
}
