//! Dense complex matrices and the Hermitian eigendecomposition.
//!
//! Storage is row-major over `num_complex::Complex<f64>`. The eigensolver is
//! a self-contained two-sided Jacobi iteration specialized to Hermitian
//! input; each rotation zeroes the currently largest off-diagonal entry, so
//! no external linear-algebra backend is involved and every run is
//! bit-deterministic for a given input.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::tol;

pub type Complex64 = Complex<f64>;

pub(crate) const C_ZERO: Complex64 = Complex::new(0.0, 0.0);
pub(crate) const C_ONE: Complex64 = Complex::new(1.0, 0.0);

/// Dense square complex matrix, row-major, dimension at least 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Wraps `entries` (row-major, length `dim * dim`).
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimTooSmall(dim));
        }
        if entries.len() != dim * dim {
            return Err(Error::BadEntryCount {
                dim,
                got: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    /// Zero matrix. Panics if `dim < 2`; use [`ComplexMatrix::new`] for fallible construction.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 2, "matrix dimension must be at least 2");
        Self {
            dim,
            entries: vec![C_ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            out.set(i, i, C_ONE);
        }
        out
    }

    /// Real diagonal matrix; dimension is the slice length.
    pub fn diagonal(values: &[f64]) -> Self {
        let mut out = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            out.set(i, i, Complex64::new(v, 0.0));
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Plain triple-loop product, innermost index contiguous in `rhs` rows.
    pub fn multiply(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimMismatch(self.dim, rhs.dim));
        }
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = C_ZERO;
                for k in 0..d {
                    acc += self.get(i, k) * rhs.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimMismatch(self.dim, rhs.dim));
        }
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&rhs.entries) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimMismatch(self.dim, rhs.dim));
        }
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&rhs.entries) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale_mut(factor);
        out
    }

    pub(crate) fn scale_mut(&mut self, factor: f64) {
        for e in &mut self.entries {
            *e *= factor;
        }
    }

    /// `self += factor * rhs`; dimensions must already agree.
    pub(crate) fn axpy(&mut self, factor: f64, rhs: &Self) {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a += factor * b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let r = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        debug_assert_eq!(self.dim, rhs.dim);
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Complex matrix known to be Hermitian within [`tol::HERMITIAN_ASYMMETRY`]
/// (or a caller-supplied tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::new_with(matrix, tol::HERMITIAN_ASYMMETRY)
    }

    pub fn new_with(matrix: ComplexMatrix, tolerance: f64) -> Result<Self> {
        let residual = matrix.hermiticity_residual();
        if residual > tolerance {
            return Err(Error::NotHermitian(residual));
        }
        Ok(Self { inner: matrix })
    }

    /// Forces exact symmetry by averaging with the adjoint. Intended for
    /// products that are Hermitian analytically but carry rounding noise.
    pub fn symmetrized(matrix: ComplexMatrix) -> Self {
        let d = matrix.dim();
        let mut out = matrix;
        for i in 0..d {
            let z = out.get(i, i);
            out.set(i, i, Complex64::new(z.re, 0.0));
            for j in (i + 1)..d {
                let avg = 0.5 * (out.get(i, j) + out.get(j, i).conj());
                out.set(i, j, avg);
                out.set(j, i, avg.conj());
            }
        }
        Self { inner: out }
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        Self {
            inner: ComplexMatrix::diagonal(values),
        }
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner.get(row, col)
    }

    /// Trace of a Hermitian matrix is real; the imaginary part is dropped.
    pub fn trace_real(&self) -> f64 {
        self.inner.trace().re
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        self.eig_with(tol::EIG_OFF_DIAGONAL, tol::EIG_MAX_SWEEPS)
    }

    /// Jacobi iteration: per sweep, up to m(m-1)/2 rotations, each zeroing
    /// the currently largest off-diagonal modulus. Convergence when the
    /// off-diagonal Frobenius norm drops below `off_tol * max(1, ||A||_F)`.
    pub fn eig_with(&self, off_tol: f64, max_sweeps: usize) -> Result<EigenDecomposition> {
        if !off_tol.is_finite() || off_tol <= 0.0 {
            return Err(Error::BadSetting(format!(
                "off-diagonal tolerance must be positive, got {off_tol}"
            )));
        }
        let d = self.dim();
        let mut a = self.inner.clone();
        let mut frame = ComplexMatrix::identity(d);
        let threshold = off_tol * a.frobenius_norm().max(1.0);
        let per_sweep = d * (d - 1) / 2;
        let mut converged = false;
        for _ in 0..max_sweeps {
            if off_diagonal_frobenius(&a) <= threshold {
                converged = true;
                break;
            }
            for _ in 0..per_sweep {
                let (p, q, magnitude) = largest_off_diagonal(&a);
                // Largest modulus this small bounds the whole off-diagonal
                // norm below the threshold; finish the sweep early.
                if magnitude <= threshold / d as f64 {
                    break;
                }
                rotate(&mut a, &mut frame, p, q);
            }
        }
        if !converged {
            let residual = off_diagonal_frobenius(&a);
            if residual > threshold {
                return Err(Error::EigenNoConvergence {
                    sweeps: max_sweeps,
                    residual,
                });
            }
        }
        Ok(sorted_decomposition(a, frame))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.eigenvalues[0])
    }
}

/// Spectral factorization `A = frame * diag(eigenvalues) * frame^H`.
///
/// Eigenvalues ascend. Each frame column is rotated so its first entry of
/// significant modulus lies on the positive real axis, making the
/// factorization of a fixed input deterministic.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub frame: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.frame.dim();
        let mut scaled = self.frame.clone();
        for j in 0..d {
            for i in 0..d {
                scaled.set(i, j, scaled.get(i, j) * self.eigenvalues[j]);
            }
        }
        scaled
            .multiply(&self.frame.adjoint())
            .expect("frame dimensions agree")
    }

    /// Largest entrywise deviation of `frame^H * frame` from the identity.
    pub fn frame_orthonormality_residual(&self) -> f64 {
        let product = self
            .frame
            .adjoint()
            .multiply(&self.frame)
            .expect("frame dimensions agree");
        product.max_abs_diff(&ComplexMatrix::identity(self.frame.dim()))
    }
}

fn off_diagonal_frobenius(a: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                sum += a.get(i, j).norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Index pair (p, q), p < q, of the largest off-diagonal modulus, first wins.
fn largest_off_diagonal(a: &ComplexMatrix) -> (usize, usize, f64) {
    let d = a.dim();
    let (mut bp, mut bq, mut best) = (0, 1, a.get(0, 1).norm());
    for p in 0..d {
        for q in (p + 1)..d {
            let m = a.get(p, q).norm();
            if m > best {
                best = m;
                bp = p;
                bq = q;
            }
        }
    }
    (bp, bq, best)
}

/// One two-sided unitary rotation in the (p, q) plane zeroing `a[p][q]`.
///
/// With beta = a[p][q] = |beta| e^{i phi}, the rotation angle t = tan(theta)
/// is the stable root of t^2 + 2 tau t - 1 = 0, tau = (a_qq - a_pp)/(2|beta|);
/// diagonal entries move to a_pp - t|beta| and a_qq + t|beta| exactly.
fn rotate(a: &mut ComplexMatrix, frame: &mut ComplexMatrix, p: usize, q: usize) {
    let d = a.dim();
    let beta = a.get(p, q);
    let abs_b = beta.norm();
    if abs_b == 0.0 {
        return;
    }
    let phase = beta / abs_b;
    let alpha = a.get(p, p).re;
    let gamma = a.get(q, q).re;
    let tau = (gamma - alpha) / (2.0 * abs_b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let col_p: Vec<Complex64> = (0..d).map(|k| a.get(k, p)).collect();
    let col_q: Vec<Complex64> = (0..d).map(|k| a.get(k, q)).collect();
    for k in 0..d {
        if k == p || k == q {
            continue;
        }
        let nkp = col_p[k] * c - col_q[k] * phase.conj() * s;
        let nkq = col_p[k] * phase * s + col_q[k] * c;
        a.set(k, p, nkp);
        a.set(p, k, nkp.conj());
        a.set(k, q, nkq);
        a.set(q, k, nkq.conj());
    }
    a.set(p, p, Complex64::new(alpha - t * abs_b, 0.0));
    a.set(q, q, Complex64::new(gamma + t * abs_b, 0.0));
    a.set(p, q, C_ZERO);
    a.set(q, p, C_ZERO);

    for k in 0..d {
        let vp = frame.get(k, p);
        let vq = frame.get(k, q);
        frame.set(k, p, vp * c - vq * phase.conj() * s);
        frame.set(k, q, vp * phase * s + vq * c);
    }
}

/// Orders eigenpairs ascending and fixes each column's global phase.
fn sorted_decomposition(a: ComplexMatrix, frame: ComplexMatrix) -> EigenDecomposition {
    let d = a.dim();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        a.get(i, i)
            .re
            .partial_cmp(&a.get(j, j).re)
            .expect("eigenvalues are finite")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut sorted_frame = ComplexMatrix::zeros(d);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..d {
            sorted_frame.set(row, new_col, frame.get(row, old_col));
        }
    }
    for col in 0..d {
        let lead = (0..d)
            .map(|row| sorted_frame.get(row, col))
            .find(|z| z.norm() > tol::GAUGE_FLOOR);
        if let Some(z) = lead {
            let phase = z.conj() / z.norm();
            for row in 0..d {
                sorted_frame.set(row, col, sorted_frame.get(row, col) * phase);
            }
        }
    }
    EigenDecomposition {
        eigenvalues,
        frame: sorted_frame,
    }
}
