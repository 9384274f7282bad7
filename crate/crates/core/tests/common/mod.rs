//! Brute-force reference implementations used as test oracles. They share no
//! code with the library.

#![allow(dead_code)]

use lrrl::environment::GroundTruth;
use lrrl::estimators::TaskBatch;
use lrrl::linalg::Matrix;
use lrrl::rng::Stream;
use rand::Rng;
use rand_distr::StandardNormal;

pub type Dense = Vec<Vec<f64>>;

pub fn to_dense(m: &Matrix) -> Dense {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn col(a: &Dense, j: usize) -> Vec<f64> {
    a.iter().map(|r| r[j]).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn naive_matmul(a: &Dense, b: &Dense) -> Dense {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..n).map(|j| row.iter().enumerate().map(|(k, v)| v * b[k][j]).sum()).collect())
        .collect()
}

pub fn transpose(a: &Dense) -> Dense {
    let n = a.first().map_or(0, Vec::len);
    (0..n).map(|j| col(a, j)).collect()
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn fro(a: &Dense) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Modified Gram–Schmidt with re-orthogonalization; returns `(Q, R)` with
/// `Q` m×n and `R` n×n upper triangular with non-negative diagonal.
pub fn gram_schmidt(a: &Dense) -> (Dense, Dense) {
    let m = a.len();
    let n = a[0].len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut r = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut v = col(a, j);
        for _pass in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let c = dot(qi, &v);
                r[i][j] += c;
                for k in 0..m {
                    v[k] -= c * qi[k];
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        r[j][j] = norm;
        q.push(v.iter().map(|x| x / norm).collect());
    }
    (transpose(&q), r)
}

/// One-sided Jacobi SVD. Returns singular values (descending) and the
/// matching left singular vectors as columns of an m×k matrix, k = min(m, n).
pub fn jacobi_svd(a: &Dense) -> (Vec<f64>, Dense) {
    if a.len() < a[0].len() {
        // Right singular vectors of Aᵀ are the left singular vectors of A.
        return jacobi_right(&transpose(a));
    }
    jacobi_left(a)
}

/// Rotates columns of `a` (m ≥ n) until orthogonal; columns then equal
/// `u_i s_i`.
fn jacobi_left(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a[0].len();
    let mut u = a.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                let cp = col(&u, p);
                let cq = col(&u, q);
                let alpha = dot(&cp, &cp);
                let beta = dot(&cq, &cq);
                let gamma = dot(&cp, &cq);
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                off = f64::max(off, gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for row in u.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            let c = col(&u, j);
            let s = dot(&c, &c).sqrt();
            let v = if s > 0.0 { c.iter().map(|x| x / s).collect() } else { c };
            (s, v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let s = pairs.iter().map(|p| p.0).collect();
    let cols: Vec<Vec<f64>> = pairs.into_iter().map(|p| p.1).collect();
    (s, transpose(&cols))
}

/// Right singular vectors of `a` (m ≥ n) via Jacobi on the columns while
/// accumulating the rotations.
fn jacobi_right(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a[0].len();
    let mut u = a.clone();
    let mut v: Dense = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                let cp = col(&u, p);
                let cq = col(&u, q);
                let alpha = dot(&cp, &cp);
                let beta = dot(&cq, &cq);
                let gamma = dot(&cp, &cq);
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                off = f64::max(off, gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for row in u.iter_mut().chain(v.iter_mut()) {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut idx: Vec<(f64, usize)> = (0..n).map(|j| (dot(&col(&u, j), &col(&u, j)).sqrt(), j)).collect();
    idx.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let s = idx.iter().map(|p| p.0).collect();
    let vs: Dense = v.iter().map(|row| idx.iter().map(|&(_, j)| row[j]).collect()).collect();
    (s, vs)
}

/// Solves `(AᵀA) x = Aᵀb` by Gaussian elimination with partial pivoting.
pub fn normal_equations(a: &Dense, b: &[f64]) -> Vec<f64> {
    let at = transpose(a);
    let mut g = naive_matmul(&at, a);
    let mut rhs: Vec<f64> = at.iter().map(|row| dot(row, b)).collect();
    let n = g.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| g[i][k].abs().partial_cmp(&g[j][k].abs()).unwrap()).unwrap();
        g.swap(k, p);
        rhs.swap(k, p);
        for i in k + 1..n {
            let f = g[i][k] / g[k][k];
            for j in k..n {
                g[i][j] -= f * g[k][j];
            }
            rhs[i] -= f * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| g[i][j] * x[j]).sum();
        x[i] = (rhs[i] - s) / g[i][i];
    }
    x
}

/// `‖(I − P₁) Q₂‖_F` for two dense orthonormal bases.
pub fn dense_subspace_error(q1: &Dense, q2: &Dense) -> f64 {
    let cross = naive_matmul(&transpose(q1), q2);
    let proj = naive_matmul(q1, &cross);
    let diff: Dense = q2.iter().zip(&proj).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
    fro(&diff)
}

/// Gaussian features and `y = Φ θ*_t + noise · z` for every task.
pub fn planted_batches(truth: &GroundTruth, rows: usize, noise_std: f64, rng: &mut Stream) -> Vec<TaskBatch> {
    (0..truth.tasks())
        .map(|t| {
            let phi = Matrix::random_gaussian(rows, truth.dim(), rng);
            let clean = phi.matvec(&truth.theta(t)).unwrap();
            let y = clean
                .into_iter()
                .map(|v| v + noise_std * rng.sample::<f64, _>(StandardNormal))
                .collect();
            TaskBatch::new(t, phi, y).unwrap()
        })
        .collect()
}

/// Plain per-sample evaluation of `Σ_t Σ_n (y − φᵀ B w_t)²`.
pub fn naive_cost(b: &Matrix, w: &Matrix, batches: &[TaskBatch]) -> f64 {
    let mut total = 0.0;
    for (t, batch) in batches.iter().enumerate() {
        for n in 0..batch.rows() {
            let phi = batch.phi.row(n);
            let mut pred = 0.0;
            for i in 0..b.rows() {
                for k in 0..b.cols() {
                    pred += phi[i] * b[(i, k)] * w[(k, t)];
                }
            }
            total += (batch.y[n] - pred).powi(2);
        }
    }
    total
}
