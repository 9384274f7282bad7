//! Parameter recovery for the shared low-rank model `Θ = B W`.
//!
//! * truncated spectral initialization of `B`,
//! * the AltGDMin epoch update (exact least squares over `W`, one projected
//!   gradient step on `B`) with optional sample splitting,
//! * the method-of-moments and alternating-GD baselines.
//!
//! Gradient convention: [`grad_b`] and [`grad_w`] return
//! `Σ_t Φ_tᵀ(Φ_t B w_t − y_t) w_tᵀ` and `Bᵀ Φ_tᵀ(Φ_t B w_t − y_t)`, which is
//! half the derivative of [`cost`]. Step sizes are expressed against that
//! convention.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::GroundTruth;
use crate::linalg::{self, LinalgError, Matrix, OrthonormalBasis, TopSingular};
use crate::rng::Stream;

#[derive(Debug, Error)]
pub enum EstimError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("task {task} has {rows} rows, need at least {required}")]
    TooFewRows { task: usize, rows: usize, required: usize },
    #[error("task {task}: least-squares system is rank-deficient ({source})")]
    RankDeficientTask {
        task: usize,
        #[source]
        source: LinalgError,
    },
    #[error("non-finite gradient at iteration {iteration}")]
    Divergence { iteration: usize },
    #[error("QR projection failed at iteration {iteration}: {source}")]
    ProjectionFailed {
        iteration: usize,
        #[source]
        source: LinalgError,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, EstimError>;

/// Stacked features and rewards of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskBatch {
    pub task_id: usize,
    /// n×d, one sample per row.
    pub phi: Matrix,
    pub y: Vec<f64>,
}

impl TaskBatch {
    pub fn new(task_id: usize, phi: Matrix, y: Vec<f64>) -> Result<Self> {
        if phi.rows() != y.len() {
            return Err(EstimError::InvalidParameter(format!(
                "task {task_id}: {} feature rows but {} rewards",
                phi.rows(),
                y.len()
            )));
        }
        if y.is_empty() {
            return Err(EstimError::TooFewRows {
                task: task_id,
                rows: 0,
                required: 1,
            });
        }
        Ok(Self { task_id, phi, y })
    }

    pub fn rows(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.phi.cols()
    }

    fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            task_id: self.task_id,
            phi: self.phi.row_range(start, end),
            y: self.y[start..end].to_vec(),
        }
    }
}

/// Disjoint row-range partition of one epoch's batches.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitBatches {
    pub init_part: Option<Vec<TaskBatch>>,
    pub gd_parts: Vec<Vec<TaskBatch>>,
}

impl SplitBatches {
    /// No splitting: every iteration reuses the full batch.
    pub fn reuse(batches: Vec<TaskBatch>) -> Self {
        Self {
            init_part: None,
            gd_parts: vec![batches],
        }
    }
}

/// Current estimate `Θ̂ = B̂ Ŵ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorEstimate {
    pub b: OrthonormalBasis,
    pub w: Matrix,
}

impl FactorEstimate {
    pub fn theta(&self) -> Matrix {
        self.b.matrix().matmul(&self.w).expect("B is d×r and W is r×T")
    }

    pub fn theta_col(&self, task: usize) -> Vec<f64> {
        self.b.matrix().matvec(&self.w.col(task)).expect("B is d×r and W is r×T")
    }
}

fn default_iterations() -> usize {
    100
}
fn default_c_gamma() -> f64 {
    0.4
}
fn default_trunc() -> f64 {
    9.0
}
fn default_true() -> bool {
    true
}
fn default_svd_iters() -> usize {
    linalg::DEFAULT_SVD_ITERS
}

/// AltGDMin settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GdConfig {
    /// GD iterations per epoch (`L`).
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Step factor: `γ = c_γ / σ̂_max²`.
    #[serde(default = "default_c_gamma")]
    pub c_gamma: f64,
    /// Truncation multiplier `C̃` for the spectral initialization threshold.
    #[serde(default = "default_trunc")]
    pub trunc_multiplier: f64,
    /// Use disjoint sample parts for the threshold, each W-update and each
    /// gradient. When off, every iteration reuses the whole epoch.
    #[serde(default = "default_true")]
    pub sample_split: bool,
    /// Known `σ*_max`; estimated from the data when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_max: Option<f64>,
    /// Subspace-iteration count for the top-r SVDs.
    #[serde(default = "default_svd_iters")]
    pub svd_iters: usize,
}

impl Default for GdConfig {
    fn default() -> Self {
        Self {
            iterations: default_iterations(),
            c_gamma: default_c_gamma(),
            trunc_multiplier: default_trunc(),
            sample_split: true,
            sigma_max: None,
            svd_iters: default_svd_iters(),
        }
    }
}

impl GdConfig {
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.iterations == 0 {
            return Err(("iterations", "must be >= 1".into()));
        }
        if !(self.c_gamma > 0.0 && self.c_gamma <= 0.5) {
            return Err(("c_gamma", format!("must lie in (0, 0.5], got {}", self.c_gamma)));
        }
        if !(self.trunc_multiplier > 0.0 && self.trunc_multiplier.is_finite()) {
            return Err(("trunc_multiplier", "must be positive and finite".into()));
        }
        if let Some(s) = self.sigma_max {
            if !(s > 0.0 && s.is_finite()) {
                return Err(("sigma_max", "must be positive and finite".into()));
            }
        }
        if self.svd_iters == 0 {
            return Err(("svd_iters", "must be >= 1".into()));
        }
        Ok(())
    }

    /// `C̃ = 9 κ² μ²` for a known spectrum.
    pub fn trunc_from_spectrum(kappa: f64, mu: f64) -> f64 {
        9.0 * kappa * kappa * mu * mu
    }
}

/// Diagnostics for one GD iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterDiag {
    /// 1-based iteration index.
    pub iteration: usize,
    /// Cost on the part used for the W-update.
    pub cost: f64,
    /// `SE(B_ℓ, B*)`, when a reference is supplied.
    pub se: Option<f64>,
    /// `‖B W_ℓ − Θ*‖_F / ‖Θ*‖_F`, when a reference is supplied.
    pub err_theta: Option<f64>,
}

/// Splits every batch into `parts` contiguous row ranges whose sizes differ
/// by at most one (earlier parts take the remainder). With `include_init`
/// the first part becomes `init_part` and the rest are `gd_parts`.
pub fn sample_split(batches: &[TaskBatch], parts: usize, include_init: bool) -> Result<SplitBatches> {
    if parts == 0 {
        return Err(EstimError::InvalidParameter("parts must be >= 1".into()));
    }
    let mut by_part: Vec<Vec<TaskBatch>> = vec![Vec::with_capacity(batches.len()); parts];
    for b in batches {
        let n = b.rows();
        if n < parts {
            return Err(EstimError::TooFewRows {
                task: b.task_id,
                rows: n,
                required: parts,
            });
        }
        let (base, rem) = (n / parts, n % parts);
        let mut start = 0;
        for (p, part) in by_part.iter_mut().enumerate() {
            let len = base + usize::from(p < rem);
            part.push(b.slice(start, start + len));
            start += len;
        }
    }
    let init_part = if include_init { Some(by_part.remove(0)) } else { None };
    Ok(SplitBatches {
        init_part,
        gd_parts: by_part,
    })
}

/// `α = C̃ · mean(y²)` over every task and sample.
pub fn truncation_threshold(batches: &[TaskBatch], trunc_multiplier: f64) -> Result<f64> {
    let count: usize = batches.iter().map(TaskBatch::rows).sum();
    if count == 0 {
        return Err(EstimError::InvalidParameter("truncation threshold needs at least one sample".into()));
    }
    let sum_sq: f64 = batches.iter().flat_map(|b| b.y.iter()).map(|y| y * y).sum();
    Ok(trunc_multiplier * sum_sq / count as f64)
}

/// Zeroes every reward with `|y| > √α`; the boundary is kept.
pub fn truncate_rewards(y: &[f64], alpha: f64) -> Vec<f64> {
    let cut = alpha.sqrt();
    y.iter().map(|&v| if v.abs() <= cut { v } else { 0.0 }).collect()
}

/// Output of [`spectral_init`].
#[derive(Debug, Clone)]
pub struct SpectralInit {
    pub basis: OrthonormalBasis,
    /// `Θ̂₀`, d×T.
    pub theta0: Matrix,
    pub svd: TopSingular,
}

/// Top-r left singular vectors of `Θ̂₀`, whose column t is
/// `(1/n_t) Φ_tᵀ y_t,trunc`.
pub fn spectral_init(batches: &[TaskBatch], alpha: f64, r: usize, svd_iters: usize, rng: &mut Stream) -> Result<SpectralInit> {
    if batches.is_empty() {
        return Err(EstimError::InvalidParameter("spectral_init needs at least one task".into()));
    }
    if !(alpha > 0.0) {
        return Err(EstimError::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
    }
    let d = batches[0].dim();
    let t = batches.len();
    if r == 0 || r > d.min(t) {
        return Err(EstimError::InvalidParameter(format!(
            "rank {r} outside 1..={} (d = {d}, T = {t})",
            d.min(t)
        )));
    }
    let mut theta0 = Matrix::zeros(d, t);
    for (j, b) in batches.iter().enumerate() {
        let y = truncate_rewards(&b.y, alpha);
        let col: Vec<f64> = b.phi.t_matvec(&y)?.into_iter().map(|v| v / b.rows() as f64).collect();
        theta0.set_col(j, &col);
    }
    let svd = linalg::top_r_left_singular_vectors(&theta0, r, svd_iters, rng)?;
    if svd.gap_warning {
        log::warn!("spectral init: singular-value gap at rank {r} is degenerate");
    }
    Ok(SpectralInit {
        basis: svd.basis.clone(),
        theta0,
        svd,
    })
}

fn check_shapes(est_b: &OrthonormalBasis, w: &Matrix, batches: &[TaskBatch]) -> Result<()> {
    if w.rows() != est_b.rank() || w.cols() != batches.len() {
        return Err(EstimError::InvalidParameter(format!(
            "W is {}x{}, expected {}x{}",
            w.rows(),
            w.cols(),
            est_b.rank(),
            batches.len()
        )));
    }
    if let Some(b) = batches.iter().find(|b| b.dim() != est_b.dim()) {
        return Err(EstimError::InvalidParameter(format!(
            "task {} has dimension {}, basis has {}",
            b.task_id,
            b.dim(),
            est_b.dim()
        )));
    }
    Ok(())
}

/// Residual `Φ_t B w_t − y_t` for every task, in task order.
fn residuals(b: &Matrix, w: &Matrix, batches: &[TaskBatch]) -> Result<Vec<Vec<f64>>> {
    batches
        .iter()
        .enumerate()
        .map(|(t, batch)| {
            let theta = b.matvec(&w.col(t))?;
            let mut r = batch.phi.matvec(&theta)?;
            for (ri, yi) in r.iter_mut().zip(&batch.y) {
                *ri -= yi;
            }
            Ok(r)
        })
        .collect()
}

/// `Σ_t Σ_n (y_{n,t} − φ_{n,t}ᵀ B w_t)²`.
pub fn cost(est: &FactorEstimate, batches: &[TaskBatch]) -> Result<f64> {
    check_shapes(&est.b, &est.w, batches)?;
    Ok(residuals(est.b.matrix(), &est.w, batches)?
        .iter()
        .map(|r| linalg::dot(r, r))
        .sum())
}

/// `Σ_t Φ_tᵀ(Φ_t B w_t − y_t) w_tᵀ` (d×r), half the B-derivative of [`cost`].
pub fn grad_b(est: &FactorEstimate, batches: &[TaskBatch]) -> Result<Matrix> {
    check_shapes(&est.b, &est.w, batches)?;
    let b = est.b.matrix();
    let mut grad = Matrix::zeros(b.rows(), b.cols());
    for (t, res) in residuals(b, &est.w, batches)?.iter().enumerate() {
        let g = batches[t].phi.t_matvec(res)?;
        let w_t = est.w.col(t);
        for (i, gi) in g.iter().enumerate() {
            for (out, wj) in grad.row_mut(i).iter_mut().zip(&w_t) {
                *out += gi * wj;
            }
        }
    }
    Ok(grad)
}

/// Column t is `Bᵀ Φ_tᵀ(Φ_t B w_t − y_t)` (r×T), half the W-derivative of [`cost`].
pub fn grad_w(est: &FactorEstimate, batches: &[TaskBatch]) -> Result<Matrix> {
    check_shapes(&est.b, &est.w, batches)?;
    let b = est.b.matrix();
    let mut grad = Matrix::zeros(b.cols(), batches.len());
    for (t, res) in residuals(b, &est.w, batches)?.iter().enumerate() {
        let g = batches[t].phi.t_matvec(res)?;
        grad.set_col(t, &b.t_matvec(&g)?);
    }
    Ok(grad)
}

/// Per-task least squares: column t is `argmin_w ‖Φ_t B w − y_t‖`.
pub fn min_w(b: &OrthonormalBasis, batches: &[TaskBatch]) -> Result<Matrix> {
    let mut w = Matrix::zeros(b.rank(), batches.len());
    for (t, batch) in batches.iter().enumerate() {
        let design = batch.phi.matmul(b.matrix())?;
        let col = linalg::least_squares(&design, &batch.y).map_err(|source| EstimError::RankDeficientTask {
            task: batch.task_id,
            source,
        })?;
        w.set_col(t, &col);
    }
    Ok(w)
}

fn mean_rows(batches: &[TaskBatch]) -> f64 {
    batches.iter().map(TaskBatch::rows).sum::<usize>() as f64 / batches.len().max(1) as f64
}

fn diagnostics(iteration: usize, cost: f64, b: &OrthonormalBasis, theta: Option<&Matrix>, reference: Option<&GroundTruth>) -> Result<IterDiag> {
    let (se, err_theta) = match reference {
        Some(truth) => (
            Some(linalg::subspace_error(&truth.b_star, b)?),
            theta.map(|th| truth.relative_error(th)).transpose()?,
        ),
        None => (None, None),
    };
    Ok(IterDiag {
        iteration,
        cost,
        se,
        err_theta,
    })
}

/// One epoch of AltGDMin starting from `b_in`.
///
/// Iteration ℓ solves `W_ℓ = min_w(B, part ℓ)`, takes the gradient on part
/// `L + ℓ`, steps `B̂⁺ = B − (γ / n_part) ∇_B` with `γ = c_γ / σ̂_max²`, and
/// re-orthonormalizes by QR. With `gd.sample_split` off, `split.gd_parts`
/// must hold a single part that every iteration reuses.
pub fn altgdmin_epoch(
    b_in: &OrthonormalBasis,
    split: &SplitBatches,
    gd: &GdConfig,
    sigma_max_hat: f64,
    reference: Option<&GroundTruth>,
) -> Result<(FactorEstimate, Vec<IterDiag>)> {
    let l = gd.iterations;
    if l == 0 {
        return Err(EstimError::InvalidParameter("iterations must be >= 1".into()));
    }
    if !(gd.c_gamma >= 0.0 && gd.c_gamma.is_finite()) {
        return Err(EstimError::InvalidParameter(format!("c_gamma must be >= 0, got {}", gd.c_gamma)));
    }
    let expected_parts = if gd.sample_split { 2 * l } else { 1 };
    if split.gd_parts.len() != expected_parts {
        return Err(EstimError::InvalidParameter(format!(
            "expected {expected_parts} GD parts, got {}",
            split.gd_parts.len()
        )));
    }
    let sigma = gd.sigma_max.unwrap_or(sigma_max_hat);
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(EstimError::InvalidParameter(format!("sigma_max estimate must be > 0, got {sigma}")));
    }
    let gamma = gd.c_gamma / (sigma * sigma);

    let mut b = b_in.clone();
    let mut w = Matrix::zeros(b.rank(), split.gd_parts[0].len());
    let mut trace = Vec::with_capacity(l);
    for iter in 1..=l {
        let (w_part, g_part) = if gd.sample_split {
            (&split.gd_parts[iter - 1], &split.gd_parts[l + iter - 1])
        } else {
            (&split.gd_parts[0], &split.gd_parts[0])
        };
        w = min_w(&b, w_part)?;
        let est = FactorEstimate { b, w };
        let train_cost = cost(&est, w_part)?;
        let grad = grad_b(&est, g_part)?;
        if !grad.is_finite() {
            return Err(EstimError::Divergence { iteration: iter });
        }
        let theta = reference.map(|_| est.theta());
        let FactorEstimate { b: b_prev, w: w_cur } = est;
        w = w_cur;
        let mut stepped = b_prev.matrix().clone();
        stepped.axpy(-gamma / mean_rows(g_part), &grad)?;
        b = linalg::qr_decompose(&stepped)
            .map_err(|source| EstimError::ProjectionFailed { iteration: iter, source })?
            .0;
        trace.push(diagnostics(iter, train_cost, &b, theta.as_ref(), reference)?);
    }
    Ok((FactorEstimate { b, w }, trace))
}

/// Method of moments: `B̂` spans the top-r eigenvectors of
/// `(1/(NT)) Σ y² φ φᵀ`, then `Ŵ = min_w(B̂)`.
#[derive(Debug, Clone)]
pub struct MomEstimate {
    pub estimate: FactorEstimate,
    pub moment: Matrix,
    pub gap_warning: bool,
}

pub fn mom_estimate(batches: &[TaskBatch], r: usize, svd_iters: usize, rng: &mut Stream) -> Result<MomEstimate> {
    let count: usize = batches.iter().map(TaskBatch::rows).sum();
    if count == 0 {
        return Err(EstimError::InvalidParameter("method of moments needs samples".into()));
    }
    let d = batches[0].dim();
    let mut m = Matrix::zeros(d, d);
    for batch in batches {
        for (n, y) in batch.y.iter().enumerate() {
            let phi = batch.phi.row(n);
            let w = y * y;
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                let wi = w * phi[i];
                for j in i..d {
                    m[(i, j)] += wi * phi[j];
                }
            }
        }
    }
    let scale = 1.0 / count as f64;
    for i in 0..d {
        for j in i..d {
            let v = m[(i, j)] * scale;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let svd = linalg::top_r_left_singular_vectors(&m, r, svd_iters, rng)?;
    if svd.gap_warning {
        log::warn!("method of moments: degenerate eigen-gap at rank {r}");
    }
    let w = min_w(&svd.basis, batches)?;
    Ok(MomEstimate {
        estimate: FactorEstimate { b: svd.basis, w },
        moment: m,
        gap_warning: svd.gap_warning,
    })
}

/// Step sizes for [`altgd_baseline`], applied to the per-sample-normalized
/// gradients: `B ← QR(B − (b_step/n) ∇_B)`, `W ← W − (w_step/n) ∇_W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltGdStep {
    pub b_step: f64,
    pub w_step: f64,
}

/// Alternating gradient descent on both factors of the cost, with the same
/// QR projection of `B` as AltGDMin. Each iteration updates `B` first and
/// then `W` against the new `B`.
pub fn altgd_baseline(
    b_in: &OrthonormalBasis,
    w_in: &Matrix,
    batches: &[TaskBatch],
    step: AltGdStep,
    iters: usize,
    reference: Option<&GroundTruth>,
) -> Result<(FactorEstimate, Vec<IterDiag>)> {
    check_shapes(b_in, w_in, batches)?;
    let n = mean_rows(batches);
    let mut est = FactorEstimate {
        b: b_in.clone(),
        w: w_in.clone(),
    };
    let mut trace = Vec::with_capacity(iters);
    for iter in 1..=iters {
        let gb = grad_b(&est, batches)?;
        if !gb.is_finite() {
            return Err(EstimError::Divergence { iteration: iter });
        }
        let mut stepped = est.b.matrix().clone();
        stepped.axpy(-step.b_step / n, &gb)?;
        est.b = linalg::qr_decompose(&stepped)
            .map_err(|source| EstimError::ProjectionFailed { iteration: iter, source })?
            .0;
        let gw = grad_w(&est, batches)?;
        if !gw.is_finite() {
            return Err(EstimError::Divergence { iteration: iter });
        }
        est.w.axpy(-step.w_step / n, &gw)?;
        if !est.w.is_finite() {
            return Err(EstimError::Divergence { iteration: iter });
        }
        let c = cost(&est, batches)?;
        let theta = reference.map(|_| est.theta());
        trace.push(diagnostics(iter, c, &est.b, theta.as_ref(), reference)?);
    }
    Ok((est, trace))
}

/// Everything produced while estimating from one epoch of data.
#[derive(Debug, Clone)]
pub struct EpochFit {
    /// Estimate right after initialization (first epoch only).
    pub init: Option<FactorEstimate>,
    pub estimate: FactorEstimate,
    pub trace: Vec<IterDiag>,
    /// `σ̂_max` that set the step size.
    pub sigma_max_hat: f64,
}

/// Spectral initialization followed by one AltGDMin epoch.
///
/// With sample splitting, the epoch is cut into `2L + 1` parts; the
/// initialization part is halved again so the truncation threshold and
/// `Θ̂₀` use disjoint samples.
pub fn altgdmin_first_epoch(
    batches: &[TaskBatch],
    r: usize,
    gd: &GdConfig,
    rng: &mut Stream,
    reference: Option<&GroundTruth>,
) -> Result<EpochFit> {
    let (alpha_src, init_src, split) = if gd.sample_split {
        let mut split = sample_split(batches, 2 * gd.iterations + 1, true)?;
        let init = split.init_part.take().expect("include_init");
        let halves = sample_split(&init, 2, false)?;
        let [a, b]: [Vec<TaskBatch>; 2] = halves.gd_parts.try_into().expect("two halves");
        (a, b, split)
    } else {
        (batches.to_vec(), batches.to_vec(), SplitBatches::reuse(batches.to_vec()))
    };
    let alpha = truncation_threshold(&alpha_src, gd.trunc_multiplier)?;
    if alpha <= 0.0 {
        return Err(EstimError::InvalidParameter("all initialization rewards are zero".into()));
    }
    let init = spectral_init(&init_src, alpha, r, gd.svd_iters, rng)?;
    let init_w = min_w(&init.basis, &init_src)?;
    let sigma_hat = linalg::spectral_norm(&init.theta0, 10_000);
    let (estimate, trace) = altgdmin_epoch(&init.basis, &split, gd, sigma_hat, reference)?;
    Ok(EpochFit {
        init: Some(FactorEstimate {
            b: init.basis,
            w: init_w,
        }),
        estimate,
        trace,
        sigma_max_hat: gd.sigma_max.unwrap_or(sigma_hat),
    })
}

/// AltGDMin epoch warm-started from the previous estimate, on this epoch's
/// data only.
pub fn altgdmin_warm_epoch(
    previous: &FactorEstimate,
    batches: &[TaskBatch],
    gd: &GdConfig,
    reference: Option<&GroundTruth>,
) -> Result<EpochFit> {
    let split = if gd.sample_split {
        sample_split(batches, 2 * gd.iterations, false)?
    } else {
        SplitBatches::reuse(batches.to_vec())
    };
    let sigma_hat = linalg::spectral_norm(&previous.theta(), 10_000);
    let (estimate, trace) = altgdmin_epoch(&previous.b, &split, gd, sigma_hat, reference)?;
    Ok(EpochFit {
        init: None,
        estimate,
        trace,
        sigma_max_hat: gd.sigma_max.unwrap_or(sigma_hat),
    })
}

/// Spectral initialization (no splitting) followed by AltGD.
/// `W` starts at `B̂⁰ᵀ Θ̂₀`.
pub fn altgd_first_epoch(
    batches: &[TaskBatch],
    r: usize,
    gd: &GdConfig,
    w_step: f64,
    rng: &mut Stream,
    reference: Option<&GroundTruth>,
) -> Result<EpochFit> {
    let alpha = truncation_threshold(batches, gd.trunc_multiplier)?;
    if alpha <= 0.0 {
        return Err(EstimError::InvalidParameter("all initialization rewards are zero".into()));
    }
    let init = spectral_init(batches, alpha, r, gd.svd_iters, rng)?;
    let w0 = init.basis.matrix().t_matmul(&init.theta0)?;
    let sigma_hat = gd.sigma_max.unwrap_or_else(|| linalg::spectral_norm(&init.theta0, 10_000));
    let step = AltGdStep {
        b_step: gd.c_gamma / (sigma_hat * sigma_hat),
        w_step,
    };
    let (estimate, trace) = altgd_baseline(&init.basis, &w0, batches, step, gd.iterations, reference)?;
    Ok(EpochFit {
        init: Some(FactorEstimate { b: init.basis, w: w0 }),
        estimate,
        trace,
        sigma_max_hat: sigma_hat,
    })
}

pub fn altgd_warm_epoch(
    previous: &FactorEstimate,
    batches: &[TaskBatch],
    gd: &GdConfig,
    w_step: f64,
    reference: Option<&GroundTruth>,
) -> Result<EpochFit> {
    let sigma_hat = gd.sigma_max.unwrap_or_else(|| linalg::spectral_norm(&previous.theta(), 10_000));
    let step = AltGdStep {
        b_step: gd.c_gamma / (sigma_hat * sigma_hat),
        w_step,
    };
    let (estimate, trace) = altgd_baseline(&previous.b, &previous.w, batches, step, gd.iterations, reference)?;
    Ok(EpochFit {
        init: None,
        estimate,
        trace,
        sigma_max_hat: sigma_hat,
    })
}
