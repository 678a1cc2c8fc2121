//! Fixtures shared by the benchmarks.

use povm_gap::generators::{random_povm, RandomKind};
use povm_gap::geometry::cloud_from_povm;
use povm_gap::{DiscretePovm, StateCloud};

/// Seeded random pure POVM with `outcomes` effects on `C^dim`.
pub fn pure_povm(dim: usize, outcomes: usize, seed: u64) -> DiscretePovm {
    random_povm(dim, outcomes, seed, RandomKind::Pure).expect("valid random POVM")
}

/// State cloud of a random pure POVM; weights are the outcome weights.
pub fn cloud(dim: usize, points: usize, seed: u64) -> StateCloud {
    cloud_from_povm(&pure_povm(dim, points, seed))
}
