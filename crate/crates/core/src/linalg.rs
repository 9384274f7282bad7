//! Dense real-matrix primitives.
//!
//! [`Matrix`] stores its entries in row-major order. Everything here is a pure
//! function of its inputs; the only randomness (the starting block of the
//! subspace iteration) comes from an RNG stream the caller hands in.

use std::fmt;
use std::ops::{Index, IndexMut};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `max |BᵀB - I|` accepted by [`OrthonormalBasis::new`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Relative threshold on `|R_jj|` below which a column counts as dependent.
pub const RANK_TOL: f64 = 1e-12;

/// Extra columns carried by the subspace iteration beyond the requested rank.
pub const SVD_OVERSAMPLE: usize = 10;

/// Default subspace-iteration count when the condition number is unknown.
pub const DEFAULT_SVD_ITERS: usize = 100;

const GAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("rank-deficient input: column {column} is numerically dependent on earlier columns")]
    RankDeficient { column: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not orthonormal (max |BᵀB - I| = {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense real matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting NaN and infinities.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::InvalidParameter(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(LinalgError::InvalidParameter(format!(
                "ragged rows: expected {cols} columns, found {}",
                bad.len()
            )));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(LinalgError::InvalidParameter("ragged columns".into()));
        }
        let m = Self::from_fn(rows, columns.len(), |i, j| columns[j][i]);
        Self::from_vec(m.rows, m.cols, m.data)
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// i.i.d. standard normal entries, drawn in row-major order.
    pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, values: &[f64]) {
        assert_eq!(values.len(), self.rows);
        for (i, v) in values.iter().enumerate() {
            self[(i, j)] = *v;
        }
    }

    /// The leading `k` columns.
    pub fn leading_cols(&self, k: usize) -> Matrix {
        assert!(k <= self.cols);
        Self::from_fn(self.rows, k, |i, j| self[(i, j)])
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_range(&self, start: usize, end: usize) -> Matrix {
        assert!(start <= end && end <= self.rows);
        Self {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let o_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in o_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other` without forming the transpose.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "t_matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Matrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = other.row(k);
            for (i, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let o_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in o_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.cols != x.len() {
            return Err(LinalgError::DimensionMismatch {
                op: "matvec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `selfᵀ · x`.
    pub fn t_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.rows != x.len() {
            return Err(LinalgError::DimensionMismatch {
                op: "t_matvec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    fn zip_with(&self, other: &Matrix, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Matrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op: "axpy",
                left: self.shape(),
                right: other.shape(),
            });
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn frobenius_norm(a: &Matrix) -> f64 {
    a.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest singular value by power iteration on `AᵀA`.
///
/// Stops once the estimate changes by less than `1e-12` relative, or after
/// `iters` iterations.
pub fn spectral_norm(a: &Matrix, iters: usize) -> f64 {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return 0.0;
    }
    // Fixed dense positive start; any vector with a component along the top
    // right singular vector works.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut sigma = 0.0;
    for _ in 0..iters.max(1) {
        let u = a.matvec(&v).expect("shape checked");
        let s = norm2(&u);
        if s == 0.0 {
            return 0.0;
        }
        let w = a.t_matvec(&u).expect("shape checked");
        let nw = norm2(&w);
        if nw == 0.0 {
            return s;
        }
        v = w.into_iter().map(|x| x / nw).collect();
        let done = (s - sigma).abs() <= 1e-12 * s;
        sigma = s;
        if done {
            break;
        }
    }
    sigma
}

/// Matrix with orthonormal columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Matrix", into = "Matrix")]
pub struct OrthonormalBasis(Matrix);

impl OrthonormalBasis {
    /// Validates `BᵀB = I` within [`ORTHONORMAL_TOL`].
    pub fn new(m: Matrix) -> Result<Self> {
        if m.cols() > m.rows() {
            return Err(LinalgError::InvalidParameter(format!(
                "basis has more columns ({}) than rows ({})",
                m.cols(),
                m.rows()
            )));
        }
        let deviation = orthonormality_defect(&m);
        if deviation > ORTHONORMAL_TOL {
            return Err(LinalgError::NotOrthonormal { deviation });
        }
        Ok(Self(m))
    }

    /// First `r` standard basis vectors of `R^d`.
    pub fn canonical(d: usize, r: usize) -> Self {
        assert!(r <= d);
        Self(Matrix::from_fn(d, r, |i, j| if i == j { 1.0 } else { 0.0 }))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn rank(&self) -> usize {
        self.0.cols()
    }
}

impl TryFrom<Matrix> for OrthonormalBasis {
    type Error = LinalgError;

    fn try_from(m: Matrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<OrthonormalBasis> for Matrix {
    fn from(b: OrthonormalBasis) -> Matrix {
        b.0
    }
}

/// `max |BᵀB - I|`.
pub fn orthonormality_defect(b: &Matrix) -> f64 {
    let g = b.t_matmul(b).expect("same rows");
    let mut worst: f64 = 0.0;
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// Thin Householder QR with the sign of each column fixed so `diag(R) >= 0`.
///
/// Never fails: a zero pivot column is skipped, and `Q` keeps orthonormal
/// columns even when `A` is rank-deficient.
fn householder_qr(a: &Matrix) -> (Matrix, Matrix) {
    let (m, n) = a.shape();
    assert!(m >= n, "householder_qr needs rows >= cols");
    // Work column-major: cols of A are contiguous.
    let mut work: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    let mut reflectors: Vec<Option<Vec<f64>>> = Vec::with_capacity(n);

    for k in 0..n {
        let x = &work[k][k..];
        let xnorm = norm2(x);
        if xnorm == 0.0 {
            reflectors.push(None);
            continue;
        }
        let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm = norm2(&v);
        if vnorm == 0.0 {
            reflectors.push(None);
            continue;
        }
        v.iter_mut().for_each(|e| *e /= vnorm);
        for col in work.iter_mut().skip(k) {
            let tail = &mut col[k..];
            let s = 2.0 * dot(&v, tail);
            for (t, vi) in tail.iter_mut().zip(&v) {
                *t -= s * vi;
            }
        }
        reflectors.push(Some(v));
    }

    let mut r = Matrix::zeros(n, n);
    for (j, col) in work.iter().enumerate() {
        for i in 0..=j {
            r[(i, j)] = col[i];
        }
    }

    // Q = H_0 ... H_{n-1} [I_n; 0], built column by column.
    let mut q_cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            e
        })
        .collect();
    for (k, v) in reflectors.iter().enumerate().rev() {
        let Some(v) = v else { continue };
        for col in q_cols.iter_mut() {
            let tail = &mut col[k..];
            let s = 2.0 * dot(v, tail);
            if s != 0.0 {
                for (t, vi) in tail.iter_mut().zip(v) {
                    *t -= s * vi;
                }
            }
        }
    }

    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for c in j..n {
                r[(j, c)] = -r[(j, c)];
            }
            q_cols[j].iter_mut().for_each(|e| *e = -*e);
        }
    }
    let q = Matrix::from_fn(m, n, |i, j| q_cols[j][i]);
    (q, r)
}

/// Orthonormal basis for the column span of `a` (Householder `Q`). Never fails.
pub fn orthonormalize(a: &Matrix) -> OrthonormalBasis {
    OrthonormalBasis(householder_qr(a).0)
}

/// Thin QR factorization `A = QR` with `diag(R) >= 0`.
pub fn qr_decompose(a: &Matrix) -> Result<(OrthonormalBasis, Matrix)> {
    if a.rows() < a.cols() {
        return Err(LinalgError::InvalidParameter(format!(
            "qr_decompose needs rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        let k = a.as_slice().iter().position(|v| !v.is_finite()).unwrap();
        return Err(LinalgError::NonFinite {
            row: k / a.cols(),
            col: k % a.cols(),
        });
    }
    let (q, r) = householder_qr(a);
    let scale = (0..a.cols())
        .map(|j| norm2(&a.col(j)))
        .fold(0.0_f64, f64::max);
    for j in 0..a.cols() {
        if r[(j, j)] <= RANK_TOL * scale || scale == 0.0 {
            return Err(LinalgError::RankDeficient { column: j });
        }
    }
    Ok((OrthonormalBasis(q), r))
}

/// Solves upper-triangular `R x = b`.
fn back_substitute(r: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = r.cols();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    x
}

/// `argmin_x ‖Ax - b‖₂` through the thin QR of `A`.
pub fn least_squares(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.rows() != b.len() {
        return Err(LinalgError::DimensionMismatch {
            op: "least_squares",
            left: a.shape(),
            right: (b.len(), 1),
        });
    }
    let (q, r) = qr_decompose(a)?;
    let qtb = q.matrix().t_matvec(b)?;
    Ok(back_substitute(&r, &qtb))
}

/// `‖(I - B1 B1ᵀ) B2‖_F`.
pub fn subspace_error(b1: &OrthonormalBasis, b2: &OrthonormalBasis) -> Result<f64> {
    if b1.matrix().shape() != b2.matrix().shape() {
        return Err(LinalgError::DimensionMismatch {
            op: "subspace_error",
            left: b1.matrix().shape(),
            right: b2.matrix().shape(),
        });
    }
    // Residual form; `sqrt(r - ‖B1ᵀB2‖²)` loses half the digits near zero.
    let cross = b1.matrix().t_matmul(b2.matrix())?;
    let residual = b2.matrix().sub(&b1.matrix().matmul(&cross)?)?;
    Ok(residual.frobenius_norm())
}

/// Result of [`top_r_left_singular_vectors`].
#[derive(Clone, Debug)]
pub struct TopSingular {
    pub basis: OrthonormalBasis,
    /// Ritz estimates of the leading singular values, descending. Holds up to
    /// `r + 1` values when the matrix is large enough to expose `σ_{r+1}`.
    pub singular_values: Vec<f64>,
    /// Set when `σ_r / σ_{r+1} < 1 + 1e-8`, i.e. the subspace is ill-defined.
    pub gap_warning: bool,
}

/// Dominant `r`-dimensional left singular subspace of `a`.
///
/// Block subspace iteration on `AAᵀ` with a Householder re-orthonormalization
/// per step, started from a Gaussian block drawn from `rng`. The block carries
/// [`SVD_OVERSAMPLE`] extra columns (capped by the matrix size) and finishes
/// with a Rayleigh–Ritz rotation so the returned columns are ordered.
pub fn top_r_left_singular_vectors<R: Rng + ?Sized>(
    a: &Matrix,
    r: usize,
    iters: usize,
    rng: &mut R,
) -> Result<TopSingular> {
    let min_dim = a.rows().min(a.cols());
    if r == 0 || r > min_dim {
        return Err(LinalgError::InvalidParameter(format!(
            "rank {r} outside 1..={min_dim} for a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if iters == 0 {
        return Err(LinalgError::InvalidParameter("iters must be >= 1".into()));
    }
    let p = (r + SVD_OVERSAMPLE).min(min_dim);
    let mut q = orthonormalize(&Matrix::random_gaussian(a.rows(), p, rng)).into_matrix();
    for _ in 0..iters {
        let z = a.t_matmul(&q)?;
        let y = a.matmul(&z)?;
        q = orthonormalize(&y).into_matrix();
    }

    // Rayleigh–Ritz on the converged block.
    let z = a.t_matmul(&q)?;
    let gram = z.t_matmul(&z)?;
    let (eigvals, eigvecs) = symmetric_eigen(&gram);
    let q = q.matmul(&eigvecs)?;
    let singular_values: Vec<f64> = eigvals
        .iter()
        .take(r + 1)
        .map(|l| l.max(0.0).sqrt())
        .collect();

    let sigma_r = singular_values[r - 1];
    let sigma_next = singular_values.get(r).copied().unwrap_or(0.0);
    let gap_warning = sigma_r == 0.0 || (sigma_next > 0.0 && sigma_r / sigma_next < 1.0 + GAP_TOL);

    let b = q.leading_cols(r);
    Ok(TopSingular {
        basis: OrthonormalBasis(b),
        singular_values,
        gap_warning,
    })
}

/// Cyclic Jacobi eigen-decomposition of a small symmetric matrix.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// columns.
pub fn symmetric_eigen(s: &Matrix) -> (Vec<f64>, Matrix) {
    let n = s.rows();
    let mut a = s.clone();
    let mut v = Matrix::identity(n);
    let scale = frobenius_norm(s).max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    (values, vectors)
}
