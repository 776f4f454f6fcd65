//! Small dense linear algebra: a column-major matrix, a one-sided Jacobi SVD,
//! and the least-squares / projection helpers built on top of it.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from column-major storage.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "column-major buffer has wrong length");
        Self { rows, cols, data }
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(n, p);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), p, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for (i, &v) in self.col(j).iter().enumerate() {
                t.set(j, i, v);
            }
        }
        t
    }

    /// Copies the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for &j in cols {
            data.extend_from_slice(self.col(j));
        }
        Matrix::from_col_major(self.rows, cols.len(), data)
    }

    /// Copies the listed rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for j in 0..self.cols {
            let c = self.col(j);
            data.extend(rows.iter().map(|&i| c[i]));
        }
        Matrix::from_col_major(rows.len(), self.cols, data)
    }

    /// `X β`, skipping zero coefficients.
    pub fn mul_vec(&self, beta: &[f64]) -> Vec<f64> {
        assert_eq!(beta.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                axpy(b, self.col(j), &mut out);
            }
        }
        out
    }

    /// `Xᵀ v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), v)).collect()
    }

    /// `XᵀX`.
    pub fn gram(&self) -> Matrix {
        let p = self.cols;
        let mut g = Matrix::zeros(p, p);
        for a in 0..p {
            for b in a..p {
                let v = dot(self.col(a), self.col(b));
                g.set(a, b, v);
                g.set(b, a, v);
            }
        }
        g
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = out.col_mut(j);
            for (k, &w) in other.col(j).iter().enumerate() {
                if w != 0.0 {
                    axpy(w, &self.data[k * self.rows..(k + 1) * self.rows], dst);
                }
            }
        }
        out
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Thin singular value decomposition `A = U diag(s) Vᵀ`.
///
/// `u` is `n × k`, `v` is `p × k` with `k = min(n, p)`; singular values are
/// sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

const JACOBI_MAX_SWEEPS: usize = 60;

impl Svd {
    pub fn new(a: &Matrix) -> Svd {
        if a.nrows() >= a.ncols() {
            one_sided_jacobi(a)
        } else {
            let t = one_sided_jacobi(&a.transpose());
            Svd { u: t.v, s: t.s, v: t.u }
        }
    }

    /// Threshold below which a singular value counts as zero:
    /// `max(n, p) · ε · s_max`.
    pub fn rank_tolerance(&self) -> f64 {
        let dim = self.u.nrows().max(self.v.nrows()) as f64;
        let smax = self.s.first().copied().unwrap_or(0.0);
        dim * f64::EPSILON * smax
    }

    pub fn rank(&self) -> usize {
        let tol = self.rank_tolerance();
        self.s.iter().filter(|&&s| s > tol).count()
    }
}

/// Hestenes one-sided Jacobi on a tall matrix (`n ≥ p`).
fn one_sided_jacobi(a: &Matrix) -> Svd {
    let n = a.nrows();
    let p = a.ncols();
    let mut w = a.clone();
    let mut v = Matrix::zeros(p, p);
    for j in 0..p {
        v.set(j, j, 1.0);
    }
    let eps = f64::EPSILON;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in (i + 1)..p {
                let (alpha, beta, gamma) = {
                    let ci = w.col(i);
                    let cj = w.col(j);
                    (norm_sq(ci), norm_sq(cj), dot(ci, cj))
                };
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut w, i, j, c, s);
                rotate_columns(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..p).collect();
    let norms: Vec<f64> = (0..p).map(|j| norm_sq(w.col(j)).sqrt()).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let mut u = Matrix::zeros(n, p);
    let mut vs = Matrix::zeros(p, p);
    let mut s = Vec::with_capacity(p);
    for (k, &j) in order.iter().enumerate() {
        let sj = norms[j];
        s.push(sj);
        if sj > 0.0 {
            for (dst, src) in u.col_mut(k).iter_mut().zip(w.col(j)) {
                *dst = src / sj;
            }
        }
        vs.col_mut(k).copy_from_slice(v.col(j));
    }
    Svd { u, s, v: vs }
}

fn rotate_columns(m: &mut Matrix, i: usize, j: usize, c: f64, s: f64) {
    let rows = m.nrows();
    let (lo, hi) = m.data.split_at_mut(j * rows);
    let ci = &mut lo[i * rows..(i + 1) * rows];
    let cj = &mut hi[..rows];
    for (a, b) in ci.iter_mut().zip(cj.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Minimum-norm least-squares solution of `A x ≈ b`.
pub fn lstsq_min_norm(a: &Matrix, b: &[f64]) -> Vec<f64> {
    if a.ncols() == 0 {
        return Vec::new();
    }
    let svd = Svd::new(a);
    let tol = svd.rank_tolerance();
    let mut x = vec![0.0; a.ncols()];
    for (k, &s) in svd.s.iter().enumerate() {
        if s > tol {
            let coef = dot(svd.u.col(k), b) / s;
            axpy(coef, svd.v.col(k), &mut x);
        }
    }
    x
}

/// Householder QR with column pivoting, stopped once the remaining columns
/// are numerically zero. Used for rank and projections where an SVD would
/// cost far more.
struct PivotedQr {
    /// Householder vectors, one per accepted column, each of length `n − k`.
    reflectors: Vec<Vec<f64>>,
}

impl PivotedQr {
    fn new(a: &Matrix) -> Self {
        let (n, p) = (a.nrows(), a.ncols());
        let mut w = a.clone();
        let mut norms: Vec<f64> = (0..p).map(|j| norm_sq(w.col(j))).collect();
        let mut reflectors = Vec::new();
        let mut tol = 0.0;
        for k in 0..n.min(p) {
            let best = norms[k..]
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i + k)
                .expect("columns remain");
            norms.swap(k, best);
            swap_cols(&mut w, k, best);
            let col = &w.col(k)[k..];
            let alpha = norm_sq(col).sqrt();
            if k == 0 {
                tol = n.max(p) as f64 * f64::EPSILON * alpha;
            }
            if !(alpha > tol) || alpha == 0.0 {
                break;
            }
            let mut v = col.to_vec();
            v[0] += if v[0] >= 0.0 { alpha } else { -alpha };
            let vv = norm_sq(&v);
            for j in k + 1..p {
                let c = &mut w.col_mut(j)[k..];
                let f = 2.0 * dot(&v, c) / vv;
                axpy(-f, &v, c);
                norms[j] = norm_sq(&c[1..]);
            }
            reflectors.push(v);
        }
        Self { reflectors }
    }

    fn rank(&self) -> usize {
        self.reflectors.len()
    }

    fn reflect(v: &[f64], b: &mut [f64]) {
        let f = 2.0 * dot(v, b) / norm_sq(v);
        axpy(-f, v, b);
    }

    /// Component of `b` orthogonal to the column space.
    fn residual(&self, b: &[f64]) -> Vec<f64> {
        let mut r = b.to_vec();
        for (k, v) in self.reflectors.iter().enumerate() {
            Self::reflect(v, &mut r[k..]);
        }
        r[..self.rank()].iter_mut().for_each(|x| *x = 0.0);
        for (k, v) in self.reflectors.iter().enumerate().rev() {
            Self::reflect(v, &mut r[k..]);
        }
        r
    }
}

fn swap_cols(m: &mut Matrix, a: usize, b: usize) {
    if a != b {
        let n = m.nrows();
        let (lo, hi) = (a.min(b), a.max(b));
        let (left, right) = m.data.split_at_mut(hi * n);
        left[lo * n..(lo + 1) * n].swap_with_slice(&mut right[..n]);
    }
}

/// Numerical rank, by pivoted QR.
pub fn rank(a: &Matrix) -> usize {
    PivotedQr::new(a).rank()
}

/// Residual of `b` after orthogonal projection onto the column space of `a`,
/// together with the rank of `a`.
pub fn project_out(a: &Matrix, b: &[f64]) -> (Vec<f64>, usize) {
    if a.ncols() == 0 {
        return (b.to_vec(), 0);
    }
    let qr = PivotedQr::new(a);
    (qr.residual(b), qr.rank())
}

/// Lower Cholesky factor of an SPD matrix; `None` when a pivot falls below
/// `min_pivot`.
pub(crate) fn cholesky(g: &Matrix, min_pivot: f64) -> Option<Matrix> {
    let k = g.nrows();
    let mut l = Matrix::zeros(k, k);
    for j in 0..k {
        let mut d = g.get(j, j);
        for m in 0..j {
            d -= l.get(j, m) * l.get(j, m);
        }
        if !(d > min_pivot) {
            return None;
        }
        let d = d.sqrt();
        l.set(j, j, d);
        for i in (j + 1)..k {
            let mut s = g.get(i, j);
            for m in 0..j {
                s -= l.get(i, m) * l.get(j, m);
            }
            l.set(i, j, s / d);
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` given the Cholesky factor.
pub(crate) fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let k = l.nrows();
    let mut y = b.to_vec();
    for i in 0..k {
        let mut s = y[i];
        for m in 0..i {
            s -= l.get(i, m) * y[m];
        }
        y[i] = s / l.get(i, i);
    }
    for i in (0..k).rev() {
        let mut s = y[i];
        for m in (i + 1)..k {
            s -= l.get(m, i) * y[m];
        }
        y[i] = s / l.get(i, i);
    }
    y
}
