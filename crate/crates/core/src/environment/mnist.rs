//! Pairwise-digit tasks built from MNIST.
//!
//! Each task is a digit pair `(i, j)` with `i < j`. A round offers one random
//! image of each digit; the image of the larger digit pays 1, the other 0.
//! Features are the 784 raw pixels scaled to `[0, 1]`, with no whitening.

use std::path::Path;
use std::sync::Arc;

use rand::Rng;

use super::idx::{self, IdxError, IdxImages};
use super::{ArmSet, BanditEnv, EnvError, Round};
use crate::linalg::Matrix;
use crate::rng::Stream;

pub const MNIST_PIXELS: usize = 784;

/// Images bucketed by label, plus the 45 ordered digit pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct MnistTaskWorld {
    pools: Vec<Vec<Vec<u8>>>,
    task_pairs: Vec<(u8, u8)>,
}

impl MnistTaskWorld {
    pub fn from_idx(images: &IdxImages, labels: &[u8]) -> Result<Self, IdxError> {
        if images.count() != labels.len() {
            return Err(IdxError::CountMismatch {
                // Item count field of the label file.
                offset: 4,
                images: images.count(),
                labels: labels.len(),
            });
        }
        let mut pools = vec![Vec::new(); 10];
        for (i, &label) in labels.iter().enumerate() {
            pools[label as usize].push(images.image(i).to_vec());
        }
        let task_pairs = (0..10u8).flat_map(|i| (i + 1..10).map(move |j| (i, j))).collect();
        Ok(Self { pools, task_pairs })
    }

    pub fn task_pairs(&self) -> &[(u8, u8)] {
        &self.task_pairs
    }

    pub fn pool_size(&self, digit: u8) -> usize {
        self.pools[digit as usize].len()
    }

    pub fn total_images(&self) -> usize {
        self.pools.iter().map(Vec::len).sum()
    }

    /// Raw bytes of image `k` of `digit`.
    pub fn image(&self, digit: u8, k: usize) -> &[u8] {
        &self.pools[digit as usize][k]
    }

    /// Pixel vector of image `k` of `digit`, scaled to `[0, 1]`.
    pub fn features(&self, digit: u8, k: usize) -> Vec<f64> {
        self.image(digit, k).iter().map(|&p| f64::from(p) / 255.0).collect()
    }

    fn random_image(&self, digit: u8, rng: &mut Stream) -> Result<Vec<f64>, EnvError> {
        let n = self.pool_size(digit);
        if n == 0 {
            return Err(EnvError::EmptyPool { digit });
        }
        Ok(self.features(digit, rng.random_range(0..n)))
    }
}

pub fn load_mnist_idx(images_path: &Path, labels_path: &Path) -> Result<MnistTaskWorld, IdxError> {
    let images = idx::parse_idx_images(&idx::read_file(images_path)?)?;
    let labels = idx::parse_idx_labels(&idx::read_file(labels_path)?)?;
    MnistTaskWorld::from_idx(&images, &labels)
}

/// One MNIST round for one task.
#[derive(Debug, Clone)]
pub struct MnistRound {
    pub arms: ArmSet,
    /// Index of the larger-digit image.
    pub best: usize,
    /// Noise-free rewards per arm: 1 for the larger digit, 0 otherwise.
    pub expected: [f64; 2],
}

/// Draws one image from each pool of `pair` and places them in random order.
pub fn mnist_round(world: &MnistTaskWorld, pair: (u8, u8), rng: &mut Stream) -> Result<MnistRound, EnvError> {
    let (lo, hi) = if pair.0 < pair.1 { pair } else { (pair.1, pair.0) };
    let small = world.random_image(lo, rng)?;
    let large = world.random_image(hi, rng)?;
    let large_first: bool = rng.random();
    let (rows, best) = if large_first {
        (vec![large, small], 0)
    } else {
        (vec![small, large], 1)
    };
    let mut expected = [0.0; 2];
    expected[best] = 1.0;
    Ok(MnistRound {
        arms: ArmSet::new(Matrix::from_rows(&rows)?)?,
        best,
        expected,
    })
}

/// MNIST bandit over the first `tasks` digit pairs (lexicographic order).
#[derive(Debug, Clone)]
pub struct MnistEnv {
    world: Arc<MnistTaskWorld>,
    tasks: usize,
    noise_std: f64,
}

impl MnistEnv {
    pub fn new(world: Arc<MnistTaskWorld>, tasks: usize, noise_variance: f64) -> Result<Self, EnvError> {
        if tasks == 0 || tasks > world.task_pairs.len() {
            return Err(EnvError::InvalidConfig {
                field: "tasks",
                reason: format!("MNIST supports 1..={} tasks, got {tasks}", world.task_pairs.len()),
            });
        }
        for &(i, j) in &world.task_pairs[..tasks] {
            for digit in [i, j] {
                if world.pool_size(digit) == 0 {
                    return Err(EnvError::EmptyPool { digit });
                }
            }
        }
        Ok(Self {
            world,
            tasks,
            noise_std: noise_variance.sqrt(),
        })
    }
}

impl BanditEnv for MnistEnv {
    fn dim(&self) -> usize {
        MNIST_PIXELS
    }

    fn tasks(&self) -> usize {
        self.tasks
    }

    fn noise_std(&self) -> f64 {
        self.noise_std
    }

    fn draw_round(&self, task: usize, rng: &mut Stream) -> Result<Round, EnvError> {
        let pair = *self.world.task_pairs.get(task).filter(|_| task < self.tasks).ok_or(
            EnvError::TaskOutOfRange {
                task,
                tasks: self.tasks,
            },
        )?;
        let round = mnist_round(&self.world, pair, rng)?;
        Ok(Round {
            arms: round.arms,
            expected: round.expected.to_vec(),
        })
    }
}
