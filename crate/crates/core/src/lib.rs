//! Multi-task linear bandits with a shared low-rank parameter matrix.
//!
//! `Θ* = B* W*` with `B*` a `d×r` orthonormal basis shared by `T` tasks. The
//! learner plays greedily against its current estimate and re-fits `Θ̂` at
//! the end of every epoch with alternating GD and minimization.

pub mod bandit;
pub mod environment;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod rng;
