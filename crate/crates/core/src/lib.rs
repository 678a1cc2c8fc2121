//! Spectral gap toolkit for positive operator valued measures on `C^n`.
//!
//! A POVM on a finite outcome set is stored in density form,
//! `W_s = n alpha_s F_s` with probability weights `alpha_s` and states `F_s`
//! ([`DiscretePovm`]). From it the crate builds the quantum channel `E` and
//! the Markov operator `B`, whose shared spectrum defines the gap
//! `gamma = 1 - lambda_2`, and evaluates the quantities tied to the gap:
//! minimal noise, the bottleneck constant, convergence of repeated
//! measurement, the geometry of the state cloud, and the coherent-state
//! POVM on the sphere.

pub mod basis;
pub mod berezin;
pub mod error;
pub mod generators;
pub mod geometry;
pub mod io;
pub mod measurement;
pub mod operator;
pub mod povm;
pub mod rng;

pub use basis::HermitianBasis;
pub use error::{Error, Result};
pub use geometry::{BestFitResult, CloudPoint, DiffusionSpectrum, StateCloud, TransportPlan};
pub use measurement::{ConvergenceReport, SimConfig, Trajectory};
pub use operator::{DensityOperator, EigenDecomposition, HermitianOperator, PureProjector};
pub use povm::{DiscretePovm, GapReport, MarkovMatrix, Outcome, SuperoperatorMatrix};
