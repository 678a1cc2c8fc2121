//! Berezin-Toeplitz POVM on the sphere `CP^1` from SU(2) coherent states.
//!
//! Points are handled through the half angles of `z = tan(theta/2) e^{i phi}`,
//! so neither `(1 + |z|^2)^k` nor `z^k` is ever formed and the poles need
//! no special chart.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::gap_from_geometry;
use crate::operator::{DensityOperator, HermitianOperator, PureProjector};
use crate::povm::{markov_matrix, spectral_gap, DiscretePovm, Outcome};

/// Largest supported level.
pub const MAX_LEVEL: usize = 63;
/// Default top of a level sweep.
pub const DEFAULT_MAX_LEVEL: usize = 16;
const DEFECT_TOL: f64 = 1e-8;
const COINCIDENCE_TOL: f64 = 1e-12;

/// Quantization level `k = 1/hbar`, acting on `C^{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuantizationLevel {
    k: usize,
}

impl QuantizationLevel {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k > MAX_LEVEL {
            return Err(Error::InvalidConfig(format!("level must be in 1..={MAX_LEVEL}, got {k}")));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Hilbert space dimension `k + 1`.
    pub fn dim(&self) -> usize {
        self.k + 1
    }

    pub fn hbar(&self) -> f64 {
        1.0 / self.k as f64
    }
}

/// A point of `CP^1` in the stereographic chart, or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cp1Point {
    Finite(Complex64),
    Pole,
}

/// `cos(theta/2)`, `sin(theta/2)` and `phi` of a point.
#[derive(Debug, Clone, Copy, PartialEq)]
struct HalfAngles {
    c: f64,
    s: f64,
    phi: f64,
}

impl HalfAngles {
    fn from_point(p: Cp1Point) -> Self {
        match p {
            Cp1Point::Pole => Self { c: 0.0, s: 1.0, phi: 0.0 },
            Cp1Point::Finite(z) => {
                let r = z.norm();
                let phi = z.arg();
                if r <= 1.0 {
                    let h = (1.0 + r * r).sqrt();
                    Self { c: 1.0 / h, s: r / h, phi }
                } else {
                    let w = 1.0 / r;
                    let h = (1.0 + w * w).sqrt();
                    Self { c: w / h, s: 1.0 / h, phi }
                }
            }
        }
    }

    fn from_cos_theta(x: f64, phi: f64) -> Self {
        Self {
            c: ((1.0 + x) / 2.0).max(0.0).sqrt(),
            s: ((1.0 - x) / 2.0).max(0.0).sqrt(),
            phi,
        }
    }

    #[cfg(test)]
    fn cos_theta(&self) -> f64 {
        self.c * self.c - self.s * self.s
    }
}

fn binomial(k: usize, m: usize) -> f64 {
    let m = m.min(k - m);
    (0..m).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

/// Unit coherent vector with components `sqrt(C(k,m)) cos^{k-m} sin^m e^{i m phi}`.
fn coherent_vector(level: QuantizationLevel, a: HalfAngles) -> DVector<Complex64> {
    let k = level.k;
    DVector::from_fn(k + 1, |m, _| {
        let amp = binomial(k, m).sqrt() * a.c.powi((k - m) as i32) * a.s.powi(m as i32);
        Complex64::from_polar(amp, m as f64 * a.phi)
    })
}

fn projector(level: QuantizationLevel, a: HalfAngles) -> HermitianOperator {
    HermitianOperator::outer(&coherent_vector(level, a))
}

/// Projector onto the coherent state at `point`.
pub fn coherent_projector(level: QuantizationLevel, point: Cp1Point) -> PureProjector {
    let v = coherent_vector(level, HalfAngles::from_point(point));
    crate::operator::pure_from_vector(&v).expect("coherent vectors have unit norm")
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes increasing.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Legendre polynomial `P_l(x)`.
pub fn legendre(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for j in 2..=l {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let p = legendre(n, x);
    let q = legendre(n - 1, x);
    (p, n as f64 * (x * p - q) / (x * x - 1.0))
}

/// A node of the product grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereNode {
    pub cos_theta: f64,
    pub phi: f64,
}

impl SphereNode {
    pub fn point(&self) -> Cp1Point {
        let a = HalfAngles::from_cos_theta(self.cos_theta, self.phi);
        if a.c == 0.0 {
            Cp1Point::Pole
        } else {
            Cp1Point::Finite(Complex64::from_polar(a.s / a.c, self.phi))
        }
    }
}

/// Product Gauss-Legendre x uniform azimuthal rule with normalized weights.
#[derive(Debug, Clone, Serialize)]
pub struct SphereQuadrature {
    pub level: QuantizationLevel,
    pub ntheta: usize,
    pub nphi: usize,
    pub nodes: Vec<SphereNode>,
    pub weights: Vec<f64>,
    /// `||sum_j n w_j F(z_j) - Id||_HS`.
    pub defect: f64,
}

/// Builds the grid and certifies the resolution of the identity.
pub fn build_quadrature(level: QuantizationLevel, ntheta: usize, nphi: usize) -> Result<SphereQuadrature> {
    if ntheta == 0 || nphi == 0 {
        return Err(Error::InvalidConfig("quadrature needs at least one node per direction".into()));
    }
    let (xs, ws) = gauss_legendre(ntheta);
    let mut nodes = Vec::with_capacity(ntheta * nphi);
    let mut weights = Vec::with_capacity(ntheta * nphi);
    for (x, w) in xs.iter().zip(&ws) {
        for j in 0..nphi {
            nodes.push(SphereNode {
                cos_theta: *x,
                phi: 2.0 * PI * j as f64 / nphi as f64,
            });
            weights.push(w / 2.0 / nphi as f64);
        }
    }
    let n = level.dim() as f64;
    let mut total = HermitianOperator::zeros(level.dim());
    for (node, w) in nodes.iter().zip(&weights) {
        total.axpy(n * w, &projector(level, HalfAngles::from_cos_theta(node.cos_theta, node.phi)));
    }
    let defect = total.hs_distance(&HermitianOperator::identity(level.dim()))?;
    if defect > DEFECT_TOL {
        return Err(Error::QuadratureDefect { defect });
    }
    Ok(SphereQuadrature {
        level,
        ntheta,
        nphi,
        nodes,
        weights,
        defect,
    })
}

/// The smallest exact grid, `(k + 1) x (2k + 1)`.
pub fn default_quadrature(level: QuantizationLevel) -> Result<SphereQuadrature> {
    build_quadrature(level, level.k + 1, 2 * level.k + 1)
}

/// Discretized coherent-state POVM with weights from the quadrature.
pub fn build_berezin_povm(quad: &SphereQuadrature) -> Result<DiscretePovm> {
    let level = quad.level;
    let vectors: Vec<DVector<Complex64>> = quad
        .nodes
        .iter()
        .map(|n| coherent_vector(level, HalfAngles::from_cos_theta(n.cos_theta, n.phi)))
        .collect();
    for i in 0..vectors.len() {
        for j in 0..i {
            if vectors[i].dotc(&vectors[j]).norm_sqr() > 1.0 - COINCIDENCE_TOL {
                return Err(Error::CoincidentNodes { first: j, second: i });
            }
        }
    }
    let outcomes = vectors
        .iter()
        .zip(&quad.weights)
        .enumerate()
        .map(|(i, (v, w))| {
            let state = DensityOperator::new(HermitianOperator::outer(v))?;
            Ok(Outcome::new(format!("{}:{}", i / quad.nphi, i % quad.nphi), *w, state))
        })
        .collect::<Result<Vec<_>>>()?;
    DiscretePovm::new(level.dim(), outcomes)
}

/// `2 / (k + 2)`.
pub fn closed_form_gap(k: usize) -> f64 {
    2.0 / (k as f64 + 2.0)
}

/// Eigenvalue of the Berezin transform on degree-`l` harmonics,
/// `k! (k+1)! / ((k-l)! (k+l+1)!)`.
pub fn closed_form_eigenvalue(k: usize, l: usize) -> f64 {
    (0..l).fold(1.0, |acc, j| acc * (k - j) as f64 / (k + 2 + j) as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct BerezinGapReport {
    pub k: usize,
    pub gap: f64,
    pub gap_times_k: f64,
    pub closed_form: f64,
    pub defect: f64,
    /// `1 - n (I - J)` of the state cloud.
    pub geometric_gap: f64,
}

impl BerezinGapReport {
    pub fn closed_form_error(&self) -> f64 {
        (self.gap - self.closed_form).abs()
    }
}

pub fn berezin_gap(quad: &SphereQuadrature) -> Result<BerezinGapReport> {
    let povm = build_berezin_povm(quad)?;
    let gap = spectral_gap(&povm)?.gamma;
    let k = quad.level.k;
    Ok(BerezinGapReport {
        k,
        gap,
        gap_times_k: gap * k as f64,
        closed_form: closed_form_gap(k),
        defect: quad.defect,
        geometric_gap: gap_from_geometry(&povm)?,
    })
}

/// Gap reports for `k = 1..=kmax` on the default grids.
pub fn berezin_sweep(kmax: usize) -> Result<Vec<BerezinGapReport>> {
    QuantizationLevel::new(kmax)?;
    (1..=kmax)
        .map(|k| berezin_gap(&default_quadrature(QuantizationLevel::new(k)?)?))
        .collect()
}

/// Action of the Berezin transform on the zonal harmonic `P_l(cos theta)`.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    pub k: usize,
    pub l: usize,
    /// Rayleigh quotient of the sampled harmonic.
    pub beta: f64,
    /// `||B Y - beta Y|| / ||Y||` in `L^2(alpha)`.
    pub residual: f64,
    pub closed_form: f64,
    /// `k (1 - beta)`.
    pub scaled: f64,
    /// Laplace eigenvalue `l (l + 1)`.
    pub target: f64,
}

pub fn expansion_check(quad: &SphereQuadrature, l: usize) -> Result<ExpansionReport> {
    let k = quad.level.k;
    if l > k {
        return Err(Error::HarmonicDegree { l, k });
    }
    let povm = build_berezin_povm(quad)?;
    let b = markov_matrix(&povm);
    let y: Vec<f64> = quad.nodes.iter().map(|n| legendre(l, n.cos_theta)).collect();
    let by = b.apply(&y);
    let norm2 = b.inner(&y, &y);
    let beta = b.inner(&y, &by) / norm2;
    let diff: Vec<f64> = by.iter().zip(&y).map(|(a, x)| a - beta * x).collect();
    let residual = (b.inner(&diff, &diff) / norm2).sqrt();
    Ok(ExpansionReport {
        k,
        l,
        beta,
        residual,
        closed_form: closed_form_eigenvalue(k, l),
        scaled: k as f64 * (1.0 - beta),
        target: (l * (l + 1)) as f64,
    })
}

/// Limit of `k (1 - beta_l)` as `k -> infinity`.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionLimit {
    pub l: usize,
    pub levels: Vec<usize>,
    pub scaled: Vec<f64>,
    /// Polynomial extrapolation in `1/k` to `1/k = 0`.
    pub extrapolated: f64,
    pub target: f64,
    pub relative_error: f64,
}

/// Richardson extrapolation of `k (1 - beta_l)` from the levels `kmax - order ..= kmax`.
pub fn expansion_limit(l: usize, kmax: usize, order: usize) -> Result<ExpansionLimit> {
    if kmax < order + l.max(1) {
        return Err(Error::InvalidConfig(format!("need kmax >= {} for order {order}", order + l.max(1))));
    }
    let levels: Vec<usize> = (kmax - order..=kmax).collect();
    let scaled = levels
        .iter()
        .map(|&k| Ok(expansion_check(&default_quadrature(QuantizationLevel::new(k)?)?, l)?.scaled))
        .collect::<Result<Vec<f64>>>()?;
    let hs: Vec<f64> = levels.iter().map(|&k| 1.0 / k as f64).collect();
    let extrapolated = neville_at_zero(&hs, &scaled);
    let target = (l * (l + 1)) as f64;
    Ok(ExpansionLimit {
        l,
        levels,
        scaled,
        extrapolated,
        target,
        relative_error: if target > 0.0 {
            (extrapolated - target).abs() / target
        } else {
            extrapolated.abs()
        },
    })
}

/// Value at 0 of the interpolating polynomial through `(x_i, y_i)`.
fn neville_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    for m in 1..x.len() {
        for i in 0..x.len() - m {
            p[i] = (x[i + m] * p[i] - x[i] * p[i + 1]) / (x[i + m] - x[i]);
        }
    }
    p[0]
}
