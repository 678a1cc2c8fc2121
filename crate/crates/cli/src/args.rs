use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "povm-gap", version, about = "Spectral gap toolkit for POVMs")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Normalization tolerance applied when reading POVM files.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Emit a built-in POVM as JSON.
    Generate(GenerateArgs),
    /// Check that a POVM file is valid.
    Validate(PovmFile),
    /// Spectral gap with the geometric cross-check.
    Gap(PovmFile),
    /// Minimal noise of unbiased approximate measurements.
    Noise(PovmFile),
    /// Bottleneck constant and the two-sided gap bound.
    Bottleneck(BottleneckArgs),
    /// Repeated Lüders measurement and convergence to the maximally mixed state.
    Simulate(SimulateArgs),
    /// State-cloud geometry.
    #[command(subcommand)]
    Geometry(GeometryCommand),
    /// Wasserstein distance between two POVMs and the gap robustness bound.
    Wasserstein(WassersteinArgs),
    /// Coherent-state POVM on the sphere.
    #[command(subcommand)]
    Berezin(BerezinCommand),
}

#[derive(Debug, Args, Serialize)]
pub struct PovmFile {
    /// POVM JSON file.
    pub input: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    Projective,
    SicQubit,
    Random,
    Berezin,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: GeneratorKind,
    /// Hilbert space dimension (projective, random).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Number of outcomes (random).
    #[arg(long, default_value_t = 4)]
    pub outcomes: usize,
    /// Mix each random effect with the identity.
    #[arg(long)]
    pub mixed: bool,
    /// Quantization level (berezin).
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Polar nodes (berezin); defaults to k + 1.
    #[arg(long)]
    pub ntheta: Option<usize>,
    /// Azimuthal nodes (berezin); defaults to 2k + 1.
    #[arg(long)]
    pub nphi: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct BottleneckArgs {
    /// POVM JSON file.
    pub input: PathBuf,
    /// Seeded local search instead of exhaustive enumeration.
    #[arg(long)]
    pub heuristic: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// POVM JSON file.
    pub input: PathBuf,
    /// Initial state: `mixed`, `outcome:<s>`, `basis:<j>`, `bloch:<x>,<y>,<z>` or a matrix JSON file.
    #[arg(long, default_value = "outcome:0")]
    pub rho0: String,
    /// Measurements per trajectory.
    #[arg(long, default_value_t = 15)]
    pub steps: usize,
    /// Independent trajectories in the ensemble.
    #[arg(long, default_value_t = 10_000)]
    pub trajectories: usize,
    /// Also write the per-step CSV to this file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum GeometryCommand {
    /// Center, spread and best-fitting line of the state cloud.
    Bestfit(PovmFile),
    /// Pairwise diffusion distances at time tau.
    Diffusion(DiffusionArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DiffusionArgs {
    /// POVM JSON file.
    pub input: PathBuf,
    /// Diffusion time.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Eigenvalues at or below this are dropped.
    #[arg(long, default_value_t = 1e-9)]
    pub threshold: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct WassersteinArgs {
    /// First POVM JSON file.
    pub first: PathBuf,
    /// Second POVM JSON file, same dimension.
    pub second: PathBuf,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum BerezinCommand {
    /// Gap at one level.
    Gap(BerezinGapArgs),
    /// Gaps for k = 1..=kmax.
    Sweep(SweepArgs),
    /// Berezin transform on a zonal harmonic.
    Expansion(ExpansionArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BerezinGapArgs {
    /// Quantization level.
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub ntheta: Option<usize>,
    #[arg(long)]
    pub nphi: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Sweep levels 1..=kmax.
    #[arg(long, default_value_t = 16)]
    pub kmax: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ExpansionArgs {
    /// Quantization level.
    #[arg(long)]
    pub k: usize,
    /// Harmonic degree.
    #[arg(long)]
    pub l: usize,
    /// Extrapolate k (1 - beta_l) from levels k - order ..= k.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
}
