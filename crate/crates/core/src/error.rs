use thiserror::Error;

/// Errors produced by the library.
///
/// Variants split into two families: input/validation problems (bad shapes,
/// normalization failures, out-of-range arguments) and numerical failures
/// (eigensolver non-convergence, transport solver breakdown). The CLI maps
/// the first family to exit code 2 and the second to exit code 1.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |A - A*| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace must be 1, found {trace}")]
    TraceNotOne { trace: f64 },

    #[error("vector norm {norm:.3e} too small to normalize")]
    ZeroVector { norm: f64 },

    #[error("effect {index} has vanishing trace {trace:.3e}")]
    VanishingEffect { index: usize, trace: f64 },

    #[error("normalization failed: {what} defect {defect:.3e}")]
    Normalization { what: &'static str, defect: f64 },

    #[error("outcome weight {index} must be positive, found {alpha}")]
    NonPositiveWeight { index: usize, alpha: f64 },

    #[error("POVM has no outcomes")]
    NoOutcomes,

    #[error("eigensolver did not converge (residual {residual:.3e})")]
    EigenNonConvergence { residual: f64 },

    #[error("minimal noise needs at least two outcomes")]
    SingleOutcome,

    #[error("operator spectrum outside [0, 1] (range [{min:.3e}, {max:.3e}])")]
    SpectrumOutOfRange { min: f64, max: f64 },

    #[error("exact bottleneck enumeration supports at most {max} outcomes, found {found}")]
    TooManyOutcomes { found: usize, max: usize },

    #[error("outcome probability {value:.3e} for outcome {index} is negative")]
    NegativeProbability { index: usize, value: f64 },

    #[error("outcome probabilities sum to {total}, deficit too large")]
    ProbabilityDeficit { total: f64 },

    #[error("vanishing probability for outcome {index}")]
    VanishingProbability { index: usize },

    #[error("spectral gap is zero; the chain does not converge")]
    NoSpectralGap,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("cloud is degenerate (top covariance eigenvalue {k:.3e})")]
    DegenerateCloud { k: f64 },

    #[error("index {index} out of range for {len} outcomes")]
    InvalidIndex { index: usize, len: usize },

    #[error("transport solver failed: {0}")]
    Transport(String),

    #[error("quadrature does not resolve the identity (defect {defect:.3e})")]
    QuadratureDefect { defect: f64 },

    #[error("coincident quadrature nodes {first} and {second}")]
    CoincidentNodes { first: usize, second: usize },

    #[error("harmonic degree {l} exceeds quantization level {k}")]
    HarmonicDegree { l: usize, k: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True when the error comes from malformed or invalid input rather than
    /// a numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::EigenNonConvergence { .. } | Error::Transport(_) | Error::NoSpectralGap
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
