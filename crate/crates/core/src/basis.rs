//! Orthonormal real coordinates on the space of Hermitian operators.
//!
//! The basis is the generalized Gell-Mann basis with respect to the
//! Hilbert-Schmidt inner product `((A, B)) = tr(AB)`, in a fixed order:
//!
//! 1. `Id/sqrt(n)`;
//! 2. diagonal elements `D_l = (E_00 + ... + E_{l-1,l-1} - l E_ll) / sqrt(l(l+1))`
//!    for `l = 1..n`;
//! 3. for each pair `j < k` in lexicographic order, the symmetric element
//!    `(E_jk + E_kj)/sqrt(2)` followed by the antisymmetric element
//!    `(-i E_jk + i E_kj)/sqrt(2)`.
//!
//! Every element after the first is traceless, so coordinates `1..n^2` span
//! the tangent space of the trace-one affine subspace.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::operator::HermitianOperator;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// The generalized Gell-Mann basis of the Hermitian operators on `C^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermitianBasis {
    dim: usize,
}

impl HermitianBasis {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis elements, `n^2`.
    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    /// Real coordinates `((B_a, H))` of `H` in this basis.
    pub fn coords(&self, h: &HermitianOperator) -> Vec<f64> {
        let n = self.dim;
        debug_assert_eq!(h.dim(), n);
        let m = h.matrix();
        let mut out = Vec::with_capacity(n * n);
        out.push(h.trace() / (n as f64).sqrt());
        let mut prefix = 0.0;
        for l in 1..n {
            prefix += m[(l - 1, l - 1)].re;
            let lf = l as f64;
            out.push((prefix - lf * m[(l, l)].re) / (lf * (lf + 1.0)).sqrt());
        }
        for j in 0..n {
            for k in (j + 1)..n {
                let z = m[(j, k)];
                out.push(SQRT_2 * z.re);
                out.push(-SQRT_2 * z.im);
            }
        }
        out
    }

    /// Inverse of [`coords`](Self::coords).
    pub fn from_coords(&self, c: &[f64]) -> HermitianOperator {
        let n = self.dim;
        assert_eq!(c.len(), n * n, "coordinate vector has wrong length");
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        let c0 = c[0] / (n as f64).sqrt();
        for j in 0..n {
            m[(j, j)].re = c0;
        }
        for l in 1..n {
            let lf = l as f64;
            let norm = (lf * (lf + 1.0)).sqrt();
            let cl = c[l];
            for j in 0..l {
                m[(j, j)].re += cl / norm;
            }
            m[(l, l)].re -= cl * lf / norm;
        }
        let mut idx = n;
        for j in 0..n {
            for k in (j + 1)..n {
                let z = Complex64::new(c[idx], -c[idx + 1]) / SQRT_2;
                m[(j, k)] = z;
                m[(k, j)] = z.conj();
                idx += 2;
            }
        }
        HermitianOperator::from_matrix_unchecked(m)
    }

    /// The `a`-th basis element as an operator.
    pub fn element(&self, a: usize) -> HermitianOperator {
        let mut c = vec![0.0; self.len()];
        c[a] = 1.0;
        self.from_coords(&c)
    }
}
