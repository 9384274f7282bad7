//! Bandit environments: the planted low-rank Gaussian world and the MNIST
//! pairwise-digit world.

mod idx;
mod mnist;

pub use idx::{parse_idx_images, parse_idx_labels, write_idx_images, write_idx_labels, IdxError, IdxImages};
pub use mnist::{load_mnist_idx, mnist_round, MnistEnv, MnistRound, MnistTaskWorld, MNIST_PIXELS};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, LinalgError, Matrix, OrthonormalBasis};
use crate::rng::Stream;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid problem config: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("digit pool {digit} is empty")]
    EmptyPool { digit: u8 },
    #[error("task index {task} out of range (have {tasks} tasks)")]
    TaskOutOfRange { task: usize, tasks: usize },
    #[error(transparent)]
    Idx(#[from] IdxError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn default_noise_variance() -> f64 {
    1e-6
}

/// Dimensions and noise level of a multi-task bandit problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Feature dimension.
    pub d: usize,
    /// Number of tasks.
    pub tasks: usize,
    /// Rank of the shared representation.
    pub rank: usize,
    /// Arms offered per task per round.
    pub arms: usize,
    /// Rounds per task.
    pub horizon: usize,
    /// Reward-noise variance.
    #[serde(default = "default_noise_variance")]
    pub noise_variance: f64,
    #[serde(default)]
    pub seed: u64,
    /// Mean of the arm feature distribution; zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm_mean: Option<Vec<f64>>,
}

impl ProblemConfig {
    pub fn new(d: usize, tasks: usize, rank: usize, arms: usize, horizon: usize) -> Self {
        Self {
            d,
            tasks,
            rank,
            arms,
            horizon,
            noise_variance: default_noise_variance(),
            seed: 0,
            arm_mean: None,
        }
    }

    pub fn with_noise_variance(mut self, v: f64) -> Self {
        self.noise_variance = v;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_variance.sqrt()
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |field, reason: String| Err(EnvError::InvalidConfig { field, reason });
        if self.d == 0 {
            return bad("d", "must be >= 1".into());
        }
        if self.tasks == 0 {
            return bad("tasks", "must be >= 1".into());
        }
        if self.rank == 0 || self.rank > self.d.min(self.tasks) {
            return bad(
                "rank",
                format!("must satisfy 1 <= r <= min(d, T) = {}, got {}", self.d.min(self.tasks), self.rank),
            );
        }
        if self.arms == 0 {
            return bad("arms", "must be >= 1".into());
        }
        if self.horizon == 0 {
            return bad("horizon", "must be >= 1".into());
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return bad("noise_variance", format!("must be finite and >= 0, got {}", self.noise_variance));
        }
        if let Some(mean) = &self.arm_mean {
            if mean.len() != self.d {
                return bad("arm_mean", format!("length {} != d = {}", mean.len(), self.d));
            }
            if mean.iter().any(|v| !v.is_finite()) {
                return bad("arm_mean", "entries must be finite".into());
            }
        }
        Ok(())
    }
}

/// Planted parameter matrix `Θ* = B* W*` and its spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub b_star: OrthonormalBasis,
    pub w_star: Matrix,
    pub theta_star: Matrix,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub kappa: f64,
    pub mu: f64,
}

impl GroundTruth {
    /// Builds `Θ* = B* W*` and measures `σ_max`, `σ_min`, `κ`, `μ`.
    ///
    /// Since `B*` has orthonormal columns the singular values of `Θ*` are those
    /// of `W*`, obtained here from the eigenvalues of `W* W*ᵀ` (r×r).
    pub fn from_factors(b_star: OrthonormalBasis, w_star: Matrix) -> Result<Self, EnvError> {
        let theta_star = b_star.matrix().matmul(&w_star)?;
        let r = w_star.rows();
        let t = w_star.cols();
        let gram = w_star.matmul(&w_star.transpose())?;
        let (eig, _) = linalg::symmetric_eigen(&gram);
        let sigma_max = eig[0].max(0.0).sqrt();
        let sigma_min = eig[r - 1].max(0.0).sqrt();
        if sigma_min <= 0.0 {
            return Err(EnvError::InvalidConfig {
                field: "w_star",
                reason: "planted coefficients are rank-deficient".into(),
            });
        }
        let max_col = (0..t)
            .map(|j| linalg::norm2(&w_star.col(j)))
            .fold(0.0_f64, f64::max);
        let mu = max_col * (t as f64 / r as f64).sqrt() / sigma_max;
        Ok(Self {
            b_star,
            w_star,
            theta_star,
            sigma_max,
            sigma_min,
            kappa: sigma_max / sigma_min,
            mu,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_star.rows()
    }

    pub fn tasks(&self) -> usize {
        self.theta_star.cols()
    }

    pub fn rank(&self) -> usize {
        self.w_star.rows()
    }

    pub fn theta(&self, task: usize) -> Vec<f64> {
        self.theta_star.col(task)
    }

    /// `σ_η² / min_t ‖θ*_t‖²`.
    pub fn nsr(&self, noise_variance: f64) -> f64 {
        let min_sq = (0..self.tasks())
            .map(|t| {
                let c = self.theta_star.col(t);
                linalg::dot(&c, &c)
            })
            .fold(f64::INFINITY, f64::min);
        noise_variance / min_sq
    }

    /// `‖Θ - Θ*‖_F / ‖Θ*‖_F`.
    pub fn relative_error(&self, theta: &Matrix) -> Result<f64, LinalgError> {
        Ok(theta.sub(&self.theta_star)?.frobenius_norm() / self.theta_star.frobenius_norm())
    }
}

/// `B*` from a QR-orthonormalized d×r Gaussian matrix and `W*` with i.i.d.
/// standard normal entries, both drawn from `rng` in that order.
pub fn generate_ground_truth(cfg: &ProblemConfig, rng: &mut Stream) -> Result<GroundTruth, EnvError> {
    cfg.validate()?;
    let b_star = linalg::qr_decompose(&Matrix::random_gaussian(cfg.d, cfg.rank, rng))?.0;
    let w_star = Matrix::random_gaussian(cfg.rank, cfg.tasks, rng);
    GroundTruth::from_factors(b_star, w_star)
}

/// Spectrum-controlled variant: `W* = diag(σ) Vᵀ` with `V` a random T×r
/// orthonormal basis, so `Θ*` has exactly the requested singular values.
pub fn generate_ground_truth_with_spectrum(
    cfg: &ProblemConfig,
    singular_values: &[f64],
    rng: &mut Stream,
) -> Result<GroundTruth, EnvError> {
    cfg.validate()?;
    if singular_values.len() != cfg.rank || singular_values.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(EnvError::InvalidConfig {
            field: "singular_values",
            reason: format!("need {} positive finite values", cfg.rank),
        });
    }
    let b_star = linalg::qr_decompose(&Matrix::random_gaussian(cfg.d, cfg.rank, rng))?.0;
    let v = linalg::qr_decompose(&Matrix::random_gaussian(cfg.tasks, cfg.rank, rng))?.0;
    let w_star = Matrix::diag(singular_values).matmul(&v.matrix().transpose())?;
    GroundTruth::from_factors(b_star, w_star)
}

/// The K candidate feature vectors offered to one task in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSet {
    /// K×d, one arm per row.
    features: Matrix,
}

impl ArmSet {
    pub fn new(features: Matrix) -> Result<Self, EnvError> {
        if features.rows() == 0 {
            return Err(EnvError::InvalidConfig {
                field: "arms",
                reason: "arm set must contain at least one arm".into(),
            });
        }
        Ok(Self {
            features: Matrix::from_vec(features.rows(), features.cols(), features.into_vec())?,
        })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn arm(&self, k: usize) -> &[f64] {
        self.features.row(k)
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }
}

/// K i.i.d. `N(μ, I_d)` feature vectors (μ = 0 unless `cfg.arm_mean` is set).
pub fn sample_arm_set(cfg: &ProblemConfig, rng: &mut Stream) -> ArmSet {
    let mut features = Matrix::random_gaussian(cfg.arms, cfg.d, rng);
    if let Some(mean) = &cfg.arm_mean {
        for k in 0..cfg.arms {
            for (x, m) in features.row_mut(k).iter_mut().zip(mean) {
                *x += m;
            }
        }
    }
    ArmSet { features }
}

/// `⟨φ, θ⟩ + η`, `η ~ N(0, noise_std²)`. One normal draw is consumed even when
/// `noise_std == 0` so streams stay aligned across noise levels.
pub fn reward(phi: &[f64], theta: &[f64], noise_std: f64, rng: &mut Stream) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    linalg::dot(phi, theta) + noise_std * z
}

/// One round of one task: the offered arms and their expected rewards.
#[derive(Debug, Clone)]
pub struct Round {
    pub arms: ArmSet,
    pub expected: Vec<f64>,
}

impl Round {
    /// Index of the best arm (lowest index on ties) and its expected reward.
    pub fn best(&self) -> (usize, f64) {
        self.expected
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
    }
}

/// A multi-task bandit world as seen by the simulation loop.
pub trait BanditEnv: Sync {
    fn dim(&self) -> usize;
    fn tasks(&self) -> usize;
    fn noise_std(&self) -> f64;

    /// Draws the arm set offered to `task` this round.
    fn draw_round(&self, task: usize, rng: &mut Stream) -> Result<Round, EnvError>;

    /// Noisy reward for pulling `arm` of `round`.
    fn observe(&self, task: usize, round: &Round, arm: usize, rng: &mut Stream) -> f64 {
        let _ = task;
        let z: f64 = rng.sample(StandardNormal);
        round.expected[arm] + self.noise_std() * z
    }

    /// Planted parameters, when the world has any.
    fn ground_truth(&self) -> Option<&GroundTruth> {
        None
    }
}

/// Linear-Gaussian world with a planted low-rank `Θ*`.
#[derive(Debug, Clone)]
pub struct SyntheticEnv {
    cfg: ProblemConfig,
    truth: GroundTruth,
    thetas: Vec<Vec<f64>>,
}

impl SyntheticEnv {
    pub fn new(cfg: ProblemConfig, truth: GroundTruth) -> Result<Self, EnvError> {
        cfg.validate()?;
        if truth.dim() != cfg.d || truth.tasks() != cfg.tasks || truth.rank() != cfg.rank {
            return Err(EnvError::InvalidConfig {
                field: "ground_truth",
                reason: format!(
                    "truth is {}x{} rank {}, config wants {}x{} rank {}",
                    truth.dim(),
                    truth.tasks(),
                    truth.rank(),
                    cfg.d,
                    cfg.tasks,
                    cfg.rank
                ),
            });
        }
        let thetas = (0..cfg.tasks).map(|t| truth.theta(t)).collect();
        Ok(Self { cfg, truth, thetas })
    }

    pub fn generate(cfg: ProblemConfig, rng: &mut Stream) -> Result<Self, EnvError> {
        let truth = generate_ground_truth(&cfg, rng)?;
        Self::new(cfg, truth)
    }

    pub fn config(&self) -> &ProblemConfig {
        &self.cfg
    }

    pub fn truth(&self) -> &GroundTruth {
        &self.truth
    }
}

impl BanditEnv for SyntheticEnv {
    fn dim(&self) -> usize {
        self.cfg.d
    }

    fn tasks(&self) -> usize {
        self.cfg.tasks
    }

    fn noise_std(&self) -> f64 {
        self.cfg.noise_std()
    }

    fn draw_round(&self, task: usize, rng: &mut Stream) -> Result<Round, EnvError> {
        let theta = self.thetas.get(task).ok_or(EnvError::TaskOutOfRange {
            task,
            tasks: self.cfg.tasks,
        })?;
        let arms = sample_arm_set(&self.cfg, rng);
        let expected = arms.features().matvec(theta)?;
        Ok(Round { arms, expected })
    }

    fn observe(&self, task: usize, round: &Round, arm: usize, rng: &mut Stream) -> f64 {
        reward(round.arms.arm(arm), &self.thetas[task], self.noise_std(), rng)
    }

    fn ground_truth(&self) -> Option<&GroundTruth> {
        Some(&self.truth)
    }
}
