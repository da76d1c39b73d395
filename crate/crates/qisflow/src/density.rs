//! The manifold of regular density matrices and its SLD Fisher geometry.
//!
//! Points are Hermitian, unit-trace, strictly positive matrices; tangent
//! vectors are Hermitian and traceless. The metric pairs tangents through
//! symmetric logarithmic derivatives: `L` solves `(1/2)(rho L + L rho) = xi`,
//! computed here in the eigenbasis of rho where the solution is entrywise
//! division by eigenvalue sums. A brute-force linear-system solver for the
//! same equation lives in the test suite as an independent oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hermitian::{Complex64, ComplexMatrix, HermitianMatrix, C_ZERO};
use crate::sphere::Spectrum;
use crate::tol;

/// Regular density matrix: Hermitian, trace 1 within [`tol::UNIT_TRACE`],
/// smallest eigenvalue strictly above [`tol::POSITIVITY_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    inner: HermitianMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        Self::new_with(matrix, tol::UNIT_TRACE, tol::POSITIVITY_FLOOR)
    }

    pub fn new_with(matrix: HermitianMatrix, trace_tol: f64, floor: f64) -> Result<Self> {
        let trace = matrix.trace_real();
        if (trace - 1.0).abs() > trace_tol {
            return Err(Error::InvalidTrace(trace));
        }
        let min = matrix.min_eigenvalue()?;
        if min <= floor {
            return Err(Error::BoundaryDensity(min));
        }
        Ok(Self { inner: matrix })
    }

    /// Embeds a simplex point as a diagonal density matrix. The simplex
    /// constructor already enforces interior positivity, so no
    /// eigendecomposition is needed.
    pub fn from_diagonal(theta: &DiagonalDensity) -> Self {
        Self {
            inner: HermitianMatrix::from_real_diagonal(theta.entries()),
        }
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.inner
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        self.inner.as_matrix()
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }
}

/// Tangent vector to the density manifold: Hermitian with trace zero
/// within [`tol::ZERO_TRACE`].
#[derive(Debug, Clone, PartialEq)]
pub struct TangentMatrix {
    inner: HermitianMatrix,
}

impl TangentMatrix {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        Self::new_with(matrix, tol::ZERO_TRACE)
    }

    pub fn new_with(matrix: HermitianMatrix, trace_tol: f64) -> Result<Self> {
        let trace = matrix.trace_real();
        if trace.abs() > trace_tol {
            return Err(Error::NonzeroTrace(trace));
        }
        Ok(Self { inner: matrix })
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.inner
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        self.inner.as_matrix()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner.get(row, col)
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }
}

/// Interior point of the probability simplex: positive entries summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalDensity {
    theta: Vec<f64>,
}

impl DiagonalDensity {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        Self::new_with(theta, tol::UNIT_TRACE)
    }

    pub fn new_with(theta: Vec<f64>, trace_tol: f64) -> Result<Self> {
        if theta.len() < 2 {
            return Err(Error::DimTooSmall(theta.len()));
        }
        let sum: f64 = theta.iter().sum();
        if (sum - 1.0).abs() > trace_tol {
            return Err(Error::InvalidTrace(sum));
        }
        let min = theta.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= tol::POSITIVITY_FLOOR {
            return Err(Error::BoundarySimplex(min));
        }
        Ok(Self { theta })
    }

    pub fn entries(&self) -> &[f64] {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_diagonal(self)
    }
}

/// Linear potential `rho -> scale * tr(coeff * rho)` on density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePotential {
    scale: f64,
    coeff: HermitianMatrix,
}

impl TracePotential {
    pub fn new(scale: f64, coeff: HermitianMatrix) -> Self {
        Self { scale, coeff }
    }

    /// The averaged Hebbian learning potential, `-2 tr(diag(c) rho)`; its
    /// restriction along the squaring immersion is the sphere potential.
    pub fn hebbian(c: &Spectrum) -> Self {
        Self::new(-2.0, HermitianMatrix::from_real_diagonal(c.values()))
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn coeff(&self) -> &HermitianMatrix {
        &self.coeff
    }

    pub fn dim(&self) -> usize {
        self.coeff.dim()
    }

    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.dim() {
            return Err(Error::DimMismatch(rho.dim(), self.dim()));
        }
        Ok(self.evaluate_raw(rho.as_matrix()))
    }

    /// Evaluation on a raw matrix; used for drifting integrator states.
    pub(crate) fn evaluate_raw(&self, matrix: &ComplexMatrix) -> f64 {
        debug_assert_eq!(matrix.dim(), self.dim());
        let d = matrix.dim();
        let mut acc = C_ZERO;
        for j in 0..d {
            for k in 0..d {
                acc += self.coeff.get(j, k) * matrix.get(k, j);
            }
        }
        self.scale * acc.re
    }
}

/// Symmetric logarithmic derivative: the Hermitian solution `L` of
/// `(1/2)(rho L + L rho) = xi`.
pub fn sld(rho: &DensityMatrix, xi: &TangentMatrix) -> Result<HermitianMatrix> {
    sld_with(rho, xi, tol::POSITIVITY_FLOOR)
}

pub fn sld_with(rho: &DensityMatrix, xi: &TangentMatrix, floor: f64) -> Result<HermitianMatrix> {
    if rho.dim() != xi.dim() {
        return Err(Error::DimMismatch(rho.dim(), xi.dim()));
    }
    let dec = rho.as_hermitian().eig()?;
    if dec.eigenvalues[0] <= floor {
        return Err(Error::BoundaryDensity(dec.eigenvalues[0]));
    }
    let d = rho.dim();
    let frame = &dec.frame;
    let chi = frame.adjoint().multiply(xi.as_matrix())?.multiply(frame)?;
    let mut tilde = ComplexMatrix::zeros(d);
    for j in 0..d {
        for k in 0..d {
            let denom = dec.eigenvalues[j] + dec.eigenvalues[k];
            tilde.set(j, k, chi.get(j, k) * (2.0 / denom));
        }
    }
    let l = frame.multiply(&tilde)?.multiply(&frame.adjoint())?;
    Ok(HermitianMatrix::symmetrized(l))
}

/// Fisher pairing through the trace form `(1/2) tr[rho (L1 L2 + L2 L1)]`,
/// with `L_i` the SLDs of the two tangents. The result is real; a
/// significant imaginary residual is reported rather than dropped.
pub fn fisher_metric(rho: &DensityMatrix, xi1: &TangentMatrix, xi2: &TangentMatrix) -> Result<f64> {
    let l1 = sld(rho, xi1)?;
    let l2 = sld(rho, xi2)?;
    let ab = l1.as_matrix().multiply(l2.as_matrix())?;
    let ba = l2.as_matrix().multiply(l1.as_matrix())?;
    let sym = ab.add(&ba)?.scale(0.5);
    let value = rho.as_matrix().multiply(&sym)?.trace();
    if value.im.abs() > tol::IMAGINARY_RESIDUAL * value.re.abs().max(1.0) {
        return Err(Error::NotReal(value.im));
    }
    Ok(value.re)
}

/// Fisher pairing evaluated in the eigenbasis of rho:
/// `2 sum_{jk} conj(chi_jk) chi'_jk / (theta_j + theta_k)`. Exists as an
/// independent route; agreement with [`fisher_metric`] is a library
/// invariant, so the two are never collapsed into one implementation.
pub fn fisher_metric_eigenbasis(
    rho: &DensityMatrix,
    xi1: &TangentMatrix,
    xi2: &TangentMatrix,
) -> Result<f64> {
    if rho.dim() != xi1.dim() {
        return Err(Error::DimMismatch(rho.dim(), xi1.dim()));
    }
    if rho.dim() != xi2.dim() {
        return Err(Error::DimMismatch(rho.dim(), xi2.dim()));
    }
    let dec = rho.as_hermitian().eig()?;
    if dec.eigenvalues[0] <= tol::POSITIVITY_FLOOR {
        return Err(Error::BoundaryDensity(dec.eigenvalues[0]));
    }
    let d = rho.dim();
    let frame = &dec.frame;
    let chi1 = frame.adjoint().multiply(xi1.as_matrix())?.multiply(frame)?;
    let chi2 = frame.adjoint().multiply(xi2.as_matrix())?.multiply(frame)?;
    let mut acc = C_ZERO;
    for j in 0..d {
        for k in 0..d {
            let denom = dec.eigenvalues[j] + dec.eigenvalues[k];
            acc += chi1.get(j, k).conj() * chi2.get(j, k) * (2.0 / denom);
        }
    }
    if acc.im.abs() > tol::IMAGINARY_RESIDUAL * acc.re.abs().max(1.0) {
        return Err(Error::NotReal(acc.im));
    }
    Ok(acc.re)
}

/// Hermitian coefficient matrix of the potential's differential with
/// respect to the conjugate matrix entries. For a linear trace potential
/// this is exactly `scale * coeff`; no differencing is involved.
pub fn wirtinger_matrix(potential: &TracePotential) -> HermitianMatrix {
    let scaled = potential.coeff().as_matrix().scale(potential.scale());
    HermitianMatrix::new(scaled).expect("real scaling preserves symmetry")
}

/// Central-difference Wirtinger derivative of an arbitrary real-valued
/// matrix functional at a Hermitian base point. Each perturbation keeps the
/// argument Hermitian: off-diagonal real and imaginary parts move together
/// with their mirrored conjugates, diagonal entries move alone. This is the
/// validation oracle for [`wirtinger_matrix`] and the computation route for
/// potentials that are not linear in rho.
pub fn numerical_wirtinger_matrix<F>(
    functional: F,
    at: &HermitianMatrix,
    step: f64,
) -> HermitianMatrix
where
    F: Fn(&ComplexMatrix) -> f64,
{
    let d = at.dim();
    let base = at.as_matrix();
    let diff = |bump: &dyn Fn(&mut ComplexMatrix, f64)| -> f64 {
        let mut plus = base.clone();
        bump(&mut plus, step);
        let mut minus = base.clone();
        bump(&mut minus, -step);
        (functional(&plus) - functional(&minus)) / (2.0 * step)
    };
    let mut out = ComplexMatrix::zeros(d);
    for j in 0..d {
        let d_diag = diff(&|m: &mut ComplexMatrix, h: f64| {
            let z = m.get(j, j);
            m.set(j, j, z + Complex64::new(h, 0.0));
        });
        out.set(j, j, Complex64::new(d_diag, 0.0));
        for k in (j + 1)..d {
            let d_re = diff(&|m: &mut ComplexMatrix, h: f64| {
                m.set(j, k, m.get(j, k) + Complex64::new(h, 0.0));
                m.set(k, j, m.get(k, j) + Complex64::new(h, 0.0));
            });
            let d_im = diff(&|m: &mut ComplexMatrix, h: f64| {
                m.set(j, k, m.get(j, k) + Complex64::new(0.0, h));
                m.set(k, j, m.get(k, j) - Complex64::new(0.0, h));
            });
            let entry = 0.5 * Complex64::new(d_re, d_im);
            out.set(j, k, entry);
            out.set(k, j, entry.conj());
        }
    }
    HermitianMatrix::new(out).expect("constructed entrywise Hermitian")
}

/// Gradient of the potential in the SLD Fisher metric:
/// `(1/2)(rho M + M rho) - tr(rho M) rho` with `M` the Wirtinger
/// coefficient matrix of the potential.
pub fn metric_gradient(rho: &DensityMatrix, potential: &TracePotential) -> Result<TangentMatrix> {
    if rho.dim() != potential.dim() {
        return Err(Error::DimMismatch(rho.dim(), potential.dim()));
    }
    let m = wirtinger_matrix(potential);
    let rm = rho.as_matrix().multiply(m.as_matrix())?;
    let mr = m.as_matrix().multiply(rho.as_matrix())?;
    let inner = rm.trace().re;
    let mut g = rm.add(&mr)?.scale(0.5);
    g.axpy(-inner, rho.as_matrix());
    TangentMatrix::new(HermitianMatrix::symmetrized(g))
}

/// Flow field of the averaged Hebbian potential on density matrices,
/// the negative of its Fisher gradient:
/// `rhs = (rho C + C rho) - 2 tr(rho C) rho`.
/// On diagonal matrices it restricts, exactly entrywise, to the replicator
/// field `theta_j' = 2 theta_j (c_j - sum_k c_k theta_k)`.
pub fn oja_rhs(rho: &DensityMatrix, c: &Spectrum) -> Result<TangentMatrix> {
    if rho.dim() != c.dim() {
        return Err(Error::DimMismatch(rho.dim(), c.dim()));
    }
    let raw = oja_rhs_raw(rho.as_matrix(), c.values());
    TangentMatrix::new(HermitianMatrix::symmetrized(raw))
}

/// Same field on a raw matrix; used on drifting integrator states. With a
/// diagonal spectrum the products collapse to entrywise scaling:
/// `out_jk = rho_jk (c_j + c_k - 2 tr(rho C))`, which preserves both
/// Hermiticity and diagonality exactly.
pub(crate) fn oja_rhs_raw(rho: &ComplexMatrix, c: &[f64]) -> ComplexMatrix {
    debug_assert_eq!(rho.dim(), c.len());
    let d = rho.dim();
    let mut inner = 0.0;
    for (j, &cj) in c.iter().enumerate() {
        inner += rho.get(j, j).re * cj;
    }
    let mut out = ComplexMatrix::zeros(d);
    for j in 0..d {
        for k in 0..d {
            out.set(j, k, rho.get(j, k) * (c[j] + c[k] - 2.0 * inner));
        }
    }
    out
}

/// Reproducible random interior density matrix: `B B^H / tr(B B^H)` with
/// independent standard complex Gaussian entries in `B`.
pub fn random_interior_density(dim: usize, seed: u64) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::DimTooSmall(dim));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            b.set(i, j, Complex64::new(re, im));
        }
    }
    let prod = b.multiply(&b.adjoint())?;
    let trace = prod.trace().re;
    let h = HermitianMatrix::symmetrized(prod.scale(1.0 / trace));
    DensityMatrix::new(h)
}

/// Reproducible random tangent direction: Gaussian Hermitian matrix with
/// the trace compensated on the diagonal.
pub fn random_tangent(dim: usize, seed: u64) -> Result<TangentMatrix> {
    if dim < 2 {
        return Err(Error::DimTooSmall(dim));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        let diag: f64 = rng.sample(StandardNormal);
        h.set(i, i, Complex64::new(diag, 0.0));
        for j in (i + 1)..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            h.set(i, j, Complex64::new(re, im));
            h.set(j, i, Complex64::new(re, -im));
        }
    }
    let shift = h.trace().re / dim as f64;
    for i in 0..dim {
        let z = h.get(i, i);
        h.set(i, i, Complex64::new(z.re - shift, 0.0));
    }
    TangentMatrix::new(HermitianMatrix::new(h)?)
}
