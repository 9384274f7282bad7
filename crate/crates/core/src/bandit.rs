//! The online loop: epoch schedule, greedy play against the current
//! estimate, per-epoch re-estimation and pseudo-regret accounting.
//!
//! All learners share one simulation loop ([`simulate`]) and differ only in
//! the [`Agent`] they plug in. Arm sets, reward noise and exploration draw
//! from per-(trial, task) streams, so different agents run in the same trial
//! face identical contexts and noise.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{ArmSet, BanditEnv, EnvError, GroundTruth};
use crate::estimators::{self, EpochFit, EstimError, FactorEstimate, GdConfig, IterDiag, TaskBatch};
use crate::linalg::{self, Matrix};
use crate::rng::{Purpose, Stream, TrialSeed};

#[derive(Debug, Error)]
pub enum BanditError {
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Estim(#[from] EstimError),
}

pub type Result<T> = std::result::Result<T, BanditError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleMode {
    /// `G_m = N^{1 - 2^{-m}}`, `M = ⌈log₂ log₂ N⌉`.
    Doubling,
    /// Equal-length epochs; the remainder goes to the last one.
    Uniform,
}

impl std::str::FromStr for ScheduleMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "doubling" => Ok(Self::Doubling),
            "uniform" => Ok(Self::Uniform),
            other => Err(format!("unknown schedule mode '{other}' (expected doubling or uniform)")),
        }
    }
}

/// Grid `0 = G_0 < G_1 < … < G_M = N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochSchedule {
    pub grid: Vec<usize>,
    pub mode: ScheduleMode,
}

impl EpochSchedule {
    pub fn epochs(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn horizon(&self) -> usize {
        *self.grid.last().unwrap()
    }

    /// Round range `G_{m-1}..G_m` of epoch `m` (1-based).
    pub fn window(&self, m: usize) -> std::ops::Range<usize> {
        self.grid[m - 1]..self.grid[m]
    }

    pub fn min_epoch_len(&self) -> usize {
        self.grid.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(0)
    }
}

/// Smallest `M` with `N <= 2^(2^M)`, i.e. `⌈log₂ log₂ N⌉`, without floating
/// point round-off.
fn doubling_epochs(n: usize) -> usize {
    let n = n as u128;
    (0..7u32)
        .find(|&m| {
            let bits = 1u32 << m;
            bits >= 128 || n <= 1u128 << bits
        })
        .unwrap_or(7) as usize
}

pub fn epoch_schedule(n: usize, mode: ScheduleMode, uniform_epochs: Option<usize>) -> Result<EpochSchedule> {
    let grid = match mode {
        ScheduleMode::Doubling => {
            if n < 4 {
                return Err(BanditError::Schedule(format!("doubling schedule needs N >= 4, got {n}")));
            }
            let m = doubling_epochs(n);
            let mut grid = vec![0];
            for k in 1..m {
                let g = (n as f64).powf(1.0 - 0.5f64.powi(k as i32)).round() as usize;
                if g > *grid.last().unwrap() && g < n {
                    grid.push(g);
                }
            }
            grid.push(n);
            grid
        }
        ScheduleMode::Uniform => {
            let e = uniform_epochs.unwrap_or(4);
            if e == 0 || e > n {
                return Err(BanditError::Schedule(format!(
                    "uniform schedule needs 1 <= epochs <= N, got {e} epochs for N = {n}"
                )));
            }
            let len = n / e;
            let mut grid: Vec<usize> = (0..e).map(|k| k * len).collect();
            grid.push(n);
            grid
        }
    };
    Ok(EpochSchedule { grid, mode })
}

/// `argmax_k φ_kᵀ θ̂`, lowest index on ties.
pub fn greedy_action(arms: &ArmSet, theta_hat: &[f64]) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for k in 0..arms.len() {
        let s = linalg::dot(arms.arm(k), theta_hat);
        if s > best_score {
            best = k;
            best_score = s;
        }
    }
    best
}

/// One pull of one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub task: usize,
    pub features: Vec<f64>,
    pub observed: f64,
    pub best_expected: f64,
    pub chosen_expected: f64,
}

impl RoundLog {
    pub fn gap(&self) -> f64 {
        self.best_expected - self.chosen_expected
    }
}

/// Per-trial time series.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExperimentTrace {
    pub algorithm: String,
    pub tasks: usize,
    /// Cumulative pseudo-regret summed over tasks, one entry per round.
    pub cumulative_regret: Vec<f64>,
    /// `‖Θ̂ − Θ*‖_F / ‖Θ*‖_F` per epoch; index 0 is the initialization.
    pub err_theta: Vec<Option<f64>>,
    /// `SE(B̂, B*)` per epoch; index 0 is the initialization.
    pub se: Vec<Option<f64>>,
    /// GD diagnostics of epoch `m` at index `m - 1`.
    pub gd_trace: Vec<Vec<IterDiag>>,
    /// Estimation failures that were absorbed by carrying the previous
    /// estimate forward.
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub rounds: Vec<RoundLog>,
    /// Wall-clock seconds per epoch. Not serialized, so serialized traces are
    /// reproducible byte-for-byte.
    #[serde(skip)]
    pub epoch_seconds: Vec<f64>,
}

/// Equality ignores wall-clock timings.
impl PartialEq for ExperimentTrace {
    fn eq(&self, other: &Self) -> bool {
        self.algorithm == other.algorithm
            && self.tasks == other.tasks
            && self.cumulative_regret == other.cumulative_regret
            && self.err_theta == other.err_theta
            && self.se == other.se
            && self.gd_trace == other.gd_trace
            && self.failures == other.failures
            && self.rounds == other.rounds
    }
}

pub fn regret_of(trace: &ExperimentTrace) -> f64 {
    trace.cumulative_regret.last().copied().unwrap_or(0.0)
}

pub fn per_task_regret(trace: &ExperimentTrace, tasks: usize) -> f64 {
    regret_of(trace) / tasks as f64
}

/// Sum of gaps over logged rounds.
pub fn regret_from_logs(logs: &[RoundLog]) -> f64 {
    logs.iter().map(RoundLog::gap).sum()
}

/// What an agent hands back after re-estimating at the end of an epoch.
#[derive(Debug, Clone, Default)]
pub struct EpochReport {
    /// Estimate right after initialization, if the agent has one.
    pub init: Option<FactorEstimate>,
    pub gd_trace: Vec<IterDiag>,
    pub failure: Option<String>,
}

/// A learner plugged into [`simulate`].
pub trait Agent {
    fn name(&self) -> &'static str;

    /// Arm to pull for `task` in epoch `epoch` (1-based).
    fn choose(&mut self, epoch: usize, task: usize, arms: &ArmSet, explore: &mut Stream) -> Result<usize>;

    /// Per-round feedback.
    fn observe(&mut self, _task: usize, _features: &[f64], _reward: f64) -> Result<()> {
        Ok(())
    }

    /// Called with all of epoch `epoch`'s data once its rounds are done.
    fn end_epoch(&mut self, epoch: usize, batches: &[TaskBatch], reference: Option<&GroundTruth>) -> EpochReport;

    /// Current `Θ̂` (d×T); `None` means the zero matrix.
    fn theta_hat(&self) -> Option<Matrix>;

    /// Current shared basis, when the agent keeps one.
    fn basis(&self) -> Option<&linalg::OrthonormalBasis> {
        None
    }
}

/// Uniform exploration while `θ̂ = 0`, greedy afterwards.
fn greedy_or_explore(estimate: Option<&FactorEstimate>, task: usize, arms: &ArmSet, explore: &mut Stream) -> usize {
    match estimate {
        Some(est) => greedy_action(arms, &est.theta_col(task)),
        None => explore.random_range(0..arms.len()),
    }
}

fn carry_forward(agent: &str, epoch: usize, err: &EstimError) -> EpochReport {
    let msg = format!("{agent}: epoch {epoch} estimation failed ({err}); keeping previous estimate");
    log::warn!("{msg}");
    EpochReport {
        failure: Some(msg),
        ..EpochReport::default()
    }
}

/// The multi-task greedy learner with AltGDMin re-estimation.
#[derive(Debug, Clone)]
pub struct AltGdMinAgent {
    rank: usize,
    gd: GdConfig,
    svd_rng: Stream,
    estimate: Option<FactorEstimate>,
}

impl AltGdMinAgent {
    pub fn new(rank: usize, gd: GdConfig, seed: TrialSeed) -> Self {
        Self {
            rank,
            gd,
            svd_rng: seed.global(Purpose::Svd),
            estimate: None,
        }
    }
}

impl Agent for AltGdMinAgent {
    fn name(&self) -> &'static str {
        "lrrl-altgdmin"
    }

    fn choose(&mut self, _epoch: usize, task: usize, arms: &ArmSet, explore: &mut Stream) -> Result<usize> {
        Ok(greedy_or_explore(self.estimate.as_ref(), task, arms, explore))
    }

    fn end_epoch(&mut self, epoch: usize, batches: &[TaskBatch], reference: Option<&GroundTruth>) -> EpochReport {
        let fit: std::result::Result<EpochFit, EstimError> = match &self.estimate {
            None => estimators::altgdmin_first_epoch(batches, self.rank, &self.gd, &mut self.svd_rng, reference),
            Some(prev) => estimators::altgdmin_warm_epoch(prev, batches, &self.gd, reference),
        };
        match fit {
            Ok(fit) => {
                self.estimate = Some(fit.estimate);
                EpochReport {
                    init: fit.init,
                    gd_trace: fit.trace,
                    failure: None,
                }
            }
            Err(e) => carry_forward(self.name(), epoch, &e),
        }
    }

    fn theta_hat(&self) -> Option<Matrix> {
        self.estimate.as_ref().map(FactorEstimate::theta)
    }

    fn basis(&self) -> Option<&linalg::OrthonormalBasis> {
        self.estimate.as_ref().map(|e| &e.b)
    }
}

/// Same loop, with alternating gradient descent on both factors.
#[derive(Debug, Clone)]
pub struct AltGdAgent {
    rank: usize,
    gd: GdConfig,
    w_step: f64,
    svd_rng: Stream,
    estimate: Option<FactorEstimate>,
}

impl AltGdAgent {
    pub fn new(rank: usize, gd: GdConfig, w_step: f64, seed: TrialSeed) -> Self {
        Self {
            rank,
            gd,
            w_step,
            svd_rng: seed.global(Purpose::Svd),
            estimate: None,
        }
    }
}

impl Agent for AltGdAgent {
    fn name(&self) -> &'static str {
        "lrrl-altgd"
    }

    fn choose(&mut self, _epoch: usize, task: usize, arms: &ArmSet, explore: &mut Stream) -> Result<usize> {
        Ok(greedy_or_explore(self.estimate.as_ref(), task, arms, explore))
    }

    fn end_epoch(&mut self, epoch: usize, batches: &[TaskBatch], reference: Option<&GroundTruth>) -> EpochReport {
        let fit = match &self.estimate {
            None => estimators::altgd_first_epoch(batches, self.rank, &self.gd, self.w_step, &mut self.svd_rng, reference),
            Some(prev) => estimators::altgd_warm_epoch(prev, batches, &self.gd, self.w_step, reference),
        };
        match fit {
            Ok(fit) => {
                self.estimate = Some(fit.estimate);
                EpochReport {
                    init: fit.init,
                    gd_trace: fit.trace,
                    failure: None,
                }
            }
            Err(e) => carry_forward(self.name(), epoch, &e),
        }
    }

    fn theta_hat(&self) -> Option<Matrix> {
        self.estimate.as_ref().map(FactorEstimate::theta)
    }

    fn basis(&self) -> Option<&linalg::OrthonormalBasis> {
        self.estimate.as_ref().map(|e| &e.b)
    }
}

/// Method of moments, estimated once from the first epoch and then frozen.
#[derive(Debug, Clone)]
pub struct MomAgent {
    rank: usize,
    svd_iters: usize,
    svd_rng: Stream,
    estimate: Option<FactorEstimate>,
}

impl MomAgent {
    pub fn new(rank: usize, svd_iters: usize, seed: TrialSeed) -> Self {
        Self {
            rank,
            svd_iters,
            svd_rng: seed.global(Purpose::Svd),
            estimate: None,
        }
    }
}

impl Agent for MomAgent {
    fn name(&self) -> &'static str {
        "mom"
    }

    fn choose(&mut self, _epoch: usize, task: usize, arms: &ArmSet, explore: &mut Stream) -> Result<usize> {
        Ok(greedy_or_explore(self.estimate.as_ref(), task, arms, explore))
    }

    fn end_epoch(&mut self, epoch: usize, batches: &[TaskBatch], _reference: Option<&GroundTruth>) -> EpochReport {
        if self.estimate.is_some() {
            return EpochReport::default();
        }
        match estimators::mom_estimate(batches, self.rank, self.svd_iters, &mut self.svd_rng) {
            Ok(mom) => {
                self.estimate = Some(mom.estimate);
                EpochReport::default()
            }
            Err(e) => carry_forward(self.name(), epoch, &e),
        }
    }

    fn theta_hat(&self) -> Option<Matrix> {
        self.estimate.as_ref().map(FactorEstimate::theta)
    }

    fn basis(&self) -> Option<&linalg::OrthonormalBasis> {
        self.estimate.as_ref().map(|e| &e.b)
    }
}

/// Explores uniformly in epoch 1, then plays greedily against a fixed `Θ`.
#[derive(Debug, Clone)]
pub struct FixedThetaAgent {
    theta: Matrix,
}

impl FixedThetaAgent {
    pub fn new(theta: Matrix) -> Self {
        Self { theta }
    }
}

impl Agent for FixedThetaAgent {
    fn name(&self) -> &'static str {
        "fixed-theta"
    }

    fn choose(&mut self, epoch: usize, task: usize, arms: &ArmSet, explore: &mut Stream) -> Result<usize> {
        if epoch == 1 {
            Ok(explore.random_range(0..arms.len()))
        } else {
            Ok(greedy_action(arms, &self.theta.col(task)))
        }
    }

    fn end_epoch(&mut self, _epoch: usize, _batches: &[TaskBatch], _reference: Option<&GroundTruth>) -> EpochReport {
        EpochReport::default()
    }

    fn theta_hat(&self) -> Option<Matrix> {
        Some(self.theta.clone())
    }
}

fn default_prior_variance() -> f64 {
    1.0
}
fn default_ridge() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThompsonConfig {
    /// Scale applied to the posterior covariance when sampling.
    #[serde(default = "default_prior_variance")]
    pub prior_variance: f64,
    /// Ridge `λ`.
    #[serde(default = "default_ridge")]
    pub ridge: f64,
}

impl Default for ThompsonConfig {
    fn default() -> Self {
        Self {
            prior_variance: default_prior_variance(),
            ridge: default_ridge(),
        }
    }
}

/// Gaussian posterior of one task's linear model.
///
/// Keeps the Cholesky factor `L` of the precision `A = λI + ΦᵀΦ` and
/// `b = Φᵀy`; the mean is `A⁻¹b` and samples are `mean + √v · L⁻ᵀ z`.
#[derive(Debug, Clone)]
pub struct LinearPosterior {
    chol: Matrix,
    b: Vec<f64>,
}

impl LinearPosterior {
    pub fn new(dim: usize, ridge: f64) -> Self {
        Self {
            chol: Matrix::identity(dim).scale(ridge.sqrt()),
            b: vec![0.0; dim],
        }
    }

    /// Adds one observation with a rank-1 Cholesky update.
    pub fn update(&mut self, phi: &[f64], y: f64) -> Result<()> {
        let n = self.b.len();
        let mut x = phi.to_vec();
        let l = &mut self.chol;
        for k in 0..n {
            let lkk = l[(k, k)];
            let r = lkk.hypot(x[k]);
            if !(r > 0.0 && r.is_finite()) {
                return Err(BanditError::Numerical(format!(
                    "posterior precision lost positive-definiteness at pivot {k}"
                )));
            }
            let c = r / lkk;
            let s = x[k] / lkk;
            l[(k, k)] = r;
            for i in k + 1..n {
                let lik = (l[(i, k)] + s * x[i]) / c;
                x[i] = c * x[i] - s * lik;
                l[(i, k)] = lik;
            }
        }
        for (bi, pi) in self.b.iter_mut().zip(phi) {
            *bi += y * pi;
        }
        Ok(())
    }

    fn solve_lower(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut x = vec![0.0; n];
        for i in 0..n {
            let row = self.chol.row(i);
            let s: f64 = rhs[i] - linalg::dot(&row[..i], &x[..i]);
            x[i] = s / row[i];
        }
        x
    }

    fn solve_upper_t(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for j in i + 1..n {
                s -= self.chol[(j, i)] * x[j];
            }
            x[i] = s / self.chol[(i, i)];
        }
        x
    }

    /// `(λI + ΦᵀΦ)⁻¹ Φᵀy`.
    pub fn mean(&self) -> Vec<f64> {
        self.solve_upper_t(&self.solve_lower(&self.b))
    }

    /// Draw from `N(mean, v · A⁻¹)`.
    pub fn sample(&self, prior_variance: f64, rng: &mut Stream) -> Vec<f64> {
        let z: Vec<f64> = (0..self.b.len()).map(|_| rng.sample(StandardNormal)).collect();
        let dev = self.solve_upper_t(&z);
        let scale = prior_variance.sqrt();
        self.mean().iter().zip(dev).map(|(m, e)| m + scale * e).collect()
    }
}

/// Independent per-task linear Thompson sampling.
#[derive(Debug, Clone)]
pub struct ThompsonAgent {
    cfg: ThompsonConfig,
    posteriors: Vec<LinearPosterior>,
    samplers: Vec<Stream>,
}

impl ThompsonAgent {
    pub fn new(dim: usize, tasks: usize, cfg: ThompsonConfig, seed: TrialSeed) -> Result<Self> {
        if !(cfg.prior_variance > 0.0 && cfg.ridge > 0.0) {
            return Err(BanditError::InvalidParameter(format!(
                "prior_variance and ridge must be > 0, got {} and {}",
                cfg.prior_variance, cfg.ridge
            )));
        }
        Ok(Self {
            cfg,
            posteriors: (0..tasks).map(|_| LinearPosterior::new(dim, cfg.ridge)).collect(),
            samplers: (0..tasks).map(|t| seed.task(t, Purpose::Posterior)).collect(),
        })
    }

    pub fn posterior(&self, task: usize) -> &LinearPosterior {
        &self.posteriors[task]
    }
}

impl Agent for ThompsonAgent {
    fn name(&self) -> &'static str {
        "thompson"
    }

    fn choose(&mut self, _epoch: usize, task: usize, arms: &ArmSet, _explore: &mut Stream) -> Result<usize> {
        let theta = self.posteriors[task].sample(self.cfg.prior_variance, &mut self.samplers[task]);
        Ok(greedy_action(arms, &theta))
    }

    fn observe(&mut self, task: usize, features: &[f64], reward: f64) -> Result<()> {
        self.posteriors[task].update(features, reward)
    }

    fn end_epoch(&mut self, _epoch: usize, _batches: &[TaskBatch], _reference: Option<&GroundTruth>) -> EpochReport {
        EpochReport::default()
    }

    fn theta_hat(&self) -> Option<Matrix> {
        let cols: Vec<Vec<f64>> = self.posteriors.iter().map(LinearPosterior::mean).collect();
        Matrix::from_columns(&cols).ok()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SimOptions {
    /// Keep a [`RoundLog`] for every pull.
    pub record_rounds: bool,
}

fn relative_error(truth: Option<&GroundTruth>, theta: Option<Matrix>) -> Option<f64> {
    let truth = truth?;
    let theta = theta.unwrap_or_else(|| Matrix::zeros(truth.dim(), truth.tasks()));
    truth.relative_error(&theta).ok()
}

fn subspace_error(truth: Option<&GroundTruth>, basis: Option<&linalg::OrthonormalBasis>) -> Option<f64> {
    linalg::subspace_error(&truth?.b_star, basis?).ok()
}

/// Runs one trial of `agent` against `env`.
pub fn simulate(
    env: &dyn BanditEnv,
    schedule: &EpochSchedule,
    agent: &mut dyn Agent,
    seed: TrialSeed,
    opts: SimOptions,
) -> Result<ExperimentTrace> {
    let tasks = env.tasks();
    let d = env.dim();
    let truth = env.ground_truth();
    let mut arms_rng: Vec<Stream> = (0..tasks).map(|t| seed.task(t, Purpose::Arms)).collect();
    let mut noise_rng: Vec<Stream> = (0..tasks).map(|t| seed.task(t, Purpose::Noise)).collect();
    let mut explore_rng: Vec<Stream> = (0..tasks).map(|t| seed.task(t, Purpose::Exploration)).collect();

    let mut trace = ExperimentTrace {
        algorithm: agent.name().to_string(),
        tasks,
        err_theta: vec![relative_error(truth, agent.theta_hat())],
        se: vec![subspace_error(truth, agent.basis())],
        ..ExperimentTrace::default()
    };
    let mut total = 0.0;

    for m in 1..=schedule.epochs() {
        let window = schedule.window(m);
        let len = window.len();
        let mut phis: Vec<Vec<f64>> = (0..tasks).map(|_| Vec::with_capacity(len * d)).collect();
        let mut ys: Vec<Vec<f64>> = (0..tasks).map(|_| Vec::with_capacity(len)).collect();
        for n in window {
            for t in 0..tasks {
                let round = env.draw_round(t, &mut arms_rng[t])?;
                let k = agent.choose(m, t, &round.arms, &mut explore_rng[t])?;
                if k >= round.arms.len() {
                    return Err(BanditError::InvalidParameter(format!(
                        "{} chose arm {k} of {}",
                        agent.name(),
                        round.arms.len()
                    )));
                }
                let y = env.observe(t, &round, k, &mut noise_rng[t]);
                let features = round.arms.arm(k);
                agent.observe(t, features, y)?;
                let (_, best) = round.best();
                let gap = best - round.expected[k];
                total += gap;
                phis[t].extend_from_slice(features);
                ys[t].push(y);
                if opts.record_rounds {
                    trace.rounds.push(RoundLog {
                        round: n,
                        task: t,
                        features: features.to_vec(),
                        observed: y,
                        best_expected: best,
                        chosen_expected: round.expected[k],
                    });
                }
            }
            trace.cumulative_regret.push(total);
        }

        let batches: Vec<TaskBatch> = phis
            .into_iter()
            .zip(ys)
            .enumerate()
            .map(|(t, (phi, y))| {
                let rows = y.len();
                TaskBatch::new(t, Matrix::from_vec(rows, d, phi).map_err(EstimError::from)?, y)
            })
            .collect::<std::result::Result<_, _>>()?;

        let started = Instant::now();
        let report = agent.end_epoch(m, &batches, truth);
        trace.epoch_seconds.push(started.elapsed().as_secs_f64());

        if let Some(init) = &report.init {
            if m == 1 {
                trace.err_theta[0] = relative_error(truth, Some(init.theta()));
                trace.se[0] = subspace_error(truth, Some(&init.b));
            }
        }
        trace.gd_trace.push(report.gd_trace);
        if let Some(f) = report.failure {
            trace.failures.push(f);
        }
        trace.err_theta.push(relative_error(truth, agent.theta_hat()));
        trace.se.push(subspace_error(truth, agent.basis()));
    }
    Ok(trace)
}

/// The multi-task learner with AltGDMin re-estimation.
pub fn run_lrrl(
    env: &dyn BanditEnv,
    rank: usize,
    gd: &GdConfig,
    schedule: &EpochSchedule,
    seed: TrialSeed,
    opts: SimOptions,
) -> Result<ExperimentTrace> {
    let mut agent = AltGdMinAgent::new(rank, gd.clone(), seed);
    simulate(env, schedule, &mut agent, seed, opts)
}

/// Independent per-task Thompson sampling.
pub fn run_thompson(
    env: &dyn BanditEnv,
    schedule: &EpochSchedule,
    cfg: ThompsonConfig,
    seed: TrialSeed,
    opts: SimOptions,
) -> Result<ExperimentTrace> {
    let mut agent = ThompsonAgent::new(env.dim(), env.tasks(), cfg, seed)?;
    simulate(env, schedule, &mut agent, seed, opts)
}
