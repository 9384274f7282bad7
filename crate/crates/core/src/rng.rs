//! Deterministic random streams.
//!
//! Every stream is a ChaCha20 generator (`rand_chacha::ChaCha20Rng`) whose
//! 256-bit key is derived from a master seed and a path of integers
//! (trial, task, purpose, ...). Key derivation folds each path component into
//! a SplitMix64 state and then emits four SplitMix64 words, little-endian.
//! Streams for different paths are independent, so tasks and trials can be
//! simulated in any order or in parallel and still reproduce bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Stream = ChaCha20Rng;

/// What a stream is used for. The discriminant is part of the key path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    GroundTruth = 1,
    Arms = 2,
    Noise = 3,
    Exploration = 4,
    Svd = 5,
    Posterior = 6,
    Estimation = 7,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the 32-byte ChaCha key for `master` and `path`.
pub fn derive_key(master: u64, path: &[u64]) -> [u8; 32] {
    let mut state = master;
    let _ = splitmix64(&mut state);
    for &p in path {
        state ^= p.wrapping_mul(GOLDEN).rotate_left(17);
        let _ = splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

pub fn stream(master: u64, path: &[u64]) -> Stream {
    ChaCha20Rng::from_seed(derive_key(master, path))
}

/// Seed tree rooted at one trial of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeed {
    pub master: u64,
    pub trial: u64,
}

impl TrialSeed {
    pub fn new(master: u64, trial: u64) -> Self {
        Self { master, trial }
    }

    /// Trial-wide stream (ground truth, SVD starts, ...).
    pub fn global(&self, purpose: Purpose) -> Stream {
        stream(self.master, &[self.trial, u64::MAX, purpose as u64])
    }

    /// Per-task stream.
    pub fn task(&self, task: usize, purpose: Purpose) -> Stream {
        stream(self.master, &[self.trial, task as u64, purpose as u64])
    }

    /// Per-task stream with an extra discriminator (e.g. epoch index).
    pub fn task_sub(&self, task: usize, purpose: Purpose, sub: u64) -> Stream {
        stream(self.master, &[self.trial, task as u64, purpose as u64, sub])
    }
}
