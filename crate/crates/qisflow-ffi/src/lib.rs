//! C ABI for the qisflow library.
//!
//! Every function returns a [`QisflowStatus`]; results travel through out
//! parameters. Heap objects cross the boundary as opaque handles with
//! paired `_free` functions that accept null. Complex matrices are passed
//! as row-major buffers of interleaved (re, im) doubles, so an `m x m`
//! matrix occupies `2 * m * m` entries.
//!
//! The generated header lands in `include/qisflow.h` when this crate is
//! built.

use std::ffi::c_char;

use qisflow::density::{fisher_metric, random_interior_density, random_tangent, sld};
use qisflow::flow::{
    conjugacy_check, integrate_density, integrate_sphere, replicator_oracle, IntegratorConfig,
    Trajectory,
};
use qisflow::immersion::square_map;
use qisflow::oja::oja_step;
use qisflow::{
    Complex64, ComplexMatrix, DensityMatrix, DiagonalDensity, Error, HermitianMatrix, Method,
    Spectrum, SphereState, TangentMatrix, UpdateRule,
};

/// Outcome of an API call. Zero is success; everything else names the
/// reason the inputs were rejected or the computation stopped.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QisflowStatus {
    Ok = 0,
    NullPointer = 1,
    BadDimension = 2,
    NotHermitian = 3,
    NotDensity = 4,
    InvalidTangent = 5,
    InvalidSpherePoint = 6,
    DegenerateUpdate = 7,
    BadArgument = 8,
    NumericalFailure = 9,
    IndexOutOfRange = 10,
}

/// Integration scheme selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QisflowMethod {
    Euler = 0,
    Rk4 = 1,
}

/// Stochastic update rule selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QisflowRule {
    Normalized = 0,
    Truncated = 1,
}

pub struct QisflowDensity(DensityMatrix);
pub struct QisflowTangent(TangentMatrix);
pub struct QisflowSphereTrajectory(Trajectory<Vec<f64>>);
pub struct QisflowDensityTrajectory(Trajectory<HermitianMatrix>);

fn map_error(err: Error) -> QisflowStatus {
    match err {
        Error::DimMismatch(..) | Error::DimTooSmall(_) | Error::BadEntryCount { .. } => {
            QisflowStatus::BadDimension
        }
        Error::NotHermitian(_) => QisflowStatus::NotHermitian,
        Error::InvalidTrace(_) | Error::BoundaryDensity(_) | Error::BoundarySimplex(_) => {
            QisflowStatus::NotDensity
        }
        Error::NonzeroTrace(_) | Error::NotTangent(_) => QisflowStatus::InvalidTangent,
        Error::NotUnitNorm(_) | Error::VanishingComponent { .. } => {
            QisflowStatus::InvalidSpherePoint
        }
        Error::DegenerateUpdate(_) => QisflowStatus::DegenerateUpdate,
        Error::NotOrthogonal(_) | Error::NonFiniteSpectrum | Error::BadSetting(_) => {
            QisflowStatus::BadArgument
        }
        Error::EigenNoConvergence { .. } | Error::NotReal(_) => QisflowStatus::NumericalFailure,
    }
}

fn method_of(method: QisflowMethod) -> Method {
    match method {
        QisflowMethod::Euler => Method::Euler,
        QisflowMethod::Rk4 => Method::Rk4,
    }
}

macro_rules! nonnull {
    ($ptr:expr) => {
        if $ptr.is_null() {
            return QisflowStatus::NullPointer;
        }
    };
}

macro_rules! ffi_try {
    ($expr:expr) => {
        match $expr {
            Ok(value) => value,
            Err(err) => return map_error(err),
        }
    };
}

/// Reads `2 * dim * dim` interleaved doubles into a complex matrix.
unsafe fn matrix_from_raw(dim: usize, entries: *const f64) -> Result<ComplexMatrix, Error> {
    let raw = std::slice::from_raw_parts(entries, 2 * dim * dim);
    let complex: Vec<Complex64> = raw
        .chunks_exact(2)
        .map(|pair| Complex64::new(pair[0], pair[1]))
        .collect();
    ComplexMatrix::new(dim, complex)
}

/// Writes a complex matrix as `2 * dim * dim` interleaved doubles.
unsafe fn matrix_to_raw(matrix: &ComplexMatrix, out: *mut f64) {
    let dim = matrix.dim();
    let raw = std::slice::from_raw_parts_mut(out, 2 * dim * dim);
    for (slot, entry) in raw.chunks_exact_mut(2).zip(matrix.entries()) {
        slot[0] = entry.re;
        slot[1] = entry.im;
    }
}

unsafe fn spectrum_from_raw(dim: usize, c: *const f64) -> Result<Spectrum, Error> {
    Spectrum::new(std::slice::from_raw_parts(c, dim).to_vec())
}

fn integrator_config(
    method: QisflowMethod,
    dt: f64,
    t_max: f64,
    renormalize: bool,
    sample_stride: usize,
) -> IntegratorConfig {
    IntegratorConfig {
        method: method_of(method),
        dt,
        t_max,
        renormalize,
        sample_stride,
    }
}

/// Static description of a status code.
///
/// # Safety
/// Always safe; the returned pointer is a NUL-terminated static string and
/// must not be freed.
#[no_mangle]
pub unsafe extern "C" fn qisflow_status_message(status: QisflowStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        QisflowStatus::Ok => b"ok\0",
        QisflowStatus::NullPointer => b"null pointer argument\0",
        QisflowStatus::BadDimension => b"dimension or entry count mismatch\0",
        QisflowStatus::NotHermitian => b"matrix is not Hermitian\0",
        QisflowStatus::NotDensity => b"matrix is not a strictly positive unit-trace density\0",
        QisflowStatus::InvalidTangent => b"matrix is not a trace-free tangent\0",
        QisflowStatus::InvalidSpherePoint => b"vector is not a fully supported unit vector\0",
        QisflowStatus::DegenerateUpdate => b"update denominator is numerically degenerate\0",
        QisflowStatus::BadArgument => b"invalid setting or argument\0",
        QisflowStatus::NumericalFailure => b"numerical routine failed to converge\0",
        QisflowStatus::IndexOutOfRange => b"sample index out of range\0",
    };
    text.as_ptr() as *const c_char
}

/// Builds a density matrix from `2 * dim * dim` interleaved doubles.
///
/// # Safety
/// `entries` must point to `2 * dim * dim` readable doubles and `out` to a
/// writable handle slot. On success the caller owns the handle and must
/// release it with [`qisflow_density_free`].
#[no_mangle]
pub unsafe extern "C" fn qisflow_density_new(
    dim: usize,
    entries: *const f64,
    out: *mut *mut QisflowDensity,
) -> QisflowStatus {
    nonnull!(entries);
    nonnull!(out);
    let matrix = ffi_try!(matrix_from_raw(dim, entries));
    let hermitian = ffi_try!(HermitianMatrix::new(matrix));
    let density = ffi_try!(DensityMatrix::new(hermitian));
    *out = Box::into_raw(Box::new(QisflowDensity(density)));
    QisflowStatus::Ok
}

/// Draws a random density matrix in the interior of the manifold.
///
/// # Safety
/// `out` must point to a writable handle slot. On success the caller owns
/// the handle and must release it with [`qisflow_density_free`].
#[no_mangle]
pub unsafe extern "C" fn qisflow_density_random(
    dim: usize,
    seed: u64,
    out: *mut *mut QisflowDensity,
) -> QisflowStatus {
    nonnull!(out);
    let density = ffi_try!(random_interior_density(dim, seed));
    *out = Box::into_raw(Box::new(QisflowDensity(density)));
    QisflowStatus::Ok
}

/// Reports the dimension of a density handle.
///
/// # Safety
/// `density` must be a live handle from this library; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qisflow_density_dim(
    density: *const QisflowDensity,
    out: *mut usize,
) -> QisflowStatus {
    nonnull!(density);
    nonnull!(out);
    *out = (*density).0.dim();
    QisflowStatus::Ok
}

/// Copies the matrix behind a density handle into `2 * dim * dim`
/// interleaved doubles.
///
/// # Safety
/// `density` must be a live handle; `out` must have room for
/// `2 * dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn qisflow_density_entries(
    density: *const QisflowDensity,
    out: *mut f64,
) -> QisflowStatus {
    nonnull!(density);
    nonnull!(out);
    matrix_to_raw((*density).0.as_matrix(), out);
    QisflowStatus::Ok
}

/// Releases a density handle. Accepts null.
///
/// # Safety
/// `density` must be null or a handle produced by this library that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn qisflow_density_free(density: *mut QisflowDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// Builds a tangent (Hermitian, trace-free) matrix from interleaved
/// doubles.
///
/// # Safety
/// `entries` must point to `2 * dim * dim` readable doubles and `out` to a
/// writable handle slot. On success the caller owns the handle and must
/// release it with [`qisflow_tangent_free`].
#[no_mangle]
pub unsafe extern "C" fn qisflow_tangent_new(
    dim: usize,
    entries: *const f64,
    out: *mut *mut QisflowTangent,
) -> QisflowStatus {
    nonnull!(entries);
    nonnull!(out);
    let matrix = ffi_try!(matrix_from_raw(dim, entries));
    let hermitian = ffi_try!(HermitianMatrix::new(matrix));
    let tangent = ffi_try!(TangentMatrix::new(hermitian));
    *out = Box::into_raw(Box::new(QisflowTangent(tangent)));
    QisflowStatus::Ok
}

/// Draws a random tangent matrix.
///
/// # Safety
/// `out` must point to a writable handle slot. On success the caller owns
/// the handle and must release it with [`qisflow_tangent_free`].
#[no_mangle]
pub unsafe extern "C" fn qisflow_tangent_random(
    dim: usize,
    seed: u64,
    out: *mut *mut QisflowTangent,
) -> QisflowStatus {
    nonnull!(out);
    let tangent = ffi_try!(random_tangent(dim, seed));
    *out = Box::into_raw(Box::new(QisflowTangent(tangent)));
    QisflowStatus::Ok
}

/// Releases a tangent handle. Accepts null.
///
/// # Safety
/// `tangent` must be null or a handle produced by this library that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn qisflow_tangent_free(tangent: *mut QisflowTangent) {
    if !tangent.is_null() {
        drop(Box::from_raw(tangent));
    }
}

/// Solves the symmetric logarithmic derivative equation
/// `(rho L + L rho) / 2 = xi` and writes `L` as interleaved doubles.
///
/// # Safety
/// `density` and `tangent` must be live handles of equal dimension; `out`
/// must have room for `2 * dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn qisflow_sld(
    density: *const QisflowDensity,
    tangent: *const QisflowTangent,
    out: *mut f64,
) -> QisflowStatus {
    nonnull!(density);
    nonnull!(tangent);
    nonnull!(out);
    let l = ffi_try!(sld(&(*density).0, &(*tangent).0));
    matrix_to_raw(l.as_matrix(), out);
    QisflowStatus::Ok
}

/// Evaluates the Fisher pairing of two tangents at a density.
///
/// # Safety
/// `density`, `first`, and `second` must be live handles of equal
/// dimension; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qisflow_fisher_metric(
    density: *const QisflowDensity,
    first: *const QisflowTangent,
    second: *const QisflowTangent,
    out: *mut f64,
) -> QisflowStatus {
    nonnull!(density);
    nonnull!(first);
    nonnull!(second);
    nonnull!(out);
    *out = ffi_try!(fisher_metric(&(*density).0, &(*first).0, &(*second).0));
    QisflowStatus::Ok
}

/// Squares a fully supported unit vector into simplex weights,
/// `theta_j = w_j * w_j`.
///
/// # Safety
/// `w` must point to `dim` readable doubles and `out_theta` to `dim`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qisflow_square_map(
    w: *const f64,
    dim: usize,
    out_theta: *mut f64,
) -> QisflowStatus {
    nonnull!(w);
    nonnull!(out_theta);
    let state = ffi_try!(SphereState::new(
        std::slice::from_raw_parts(w, dim).to_vec()
    ));
    let theta = ffi_try!(square_map(&state));
    std::slice::from_raw_parts_mut(out_theta, dim).copy_from_slice(theta.entries());
    QisflowStatus::Ok
}

/// Evaluates the closed-form simplex flow at time `t` from the weights in
/// `theta0`.
///
/// # Safety
/// `theta0` and `c` must point to `dim` readable doubles; `out_theta` must
/// have room for `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn qisflow_replicator(
    theta0: *const f64,
    c: *const f64,
    dim: usize,
    t: f64,
    out_theta: *mut f64,
) -> QisflowStatus {
    nonnull!(theta0);
    nonnull!(c);
    nonnull!(out_theta);
    let start = ffi_try!(DiagonalDensity::new(
        std::slice::from_raw_parts(theta0, dim).to_vec()
    ));
    let spectrum = ffi_try!(spectrum_from_raw(dim, c));
    let theta = ffi_try!(replicator_oracle(&start, &spectrum, t));
    std::slice::from_raw_parts_mut(out_theta, dim).copy_from_slice(&theta);
    QisflowStatus::Ok
}

/// Integrates the sphere flow `w' = C w - (w . C w) w` from `w0` and
/// returns a trajectory handle.
///
/// # Safety
/// `w0` and `c` must point to `dim` readable doubles; `out` must be a
/// writable handle slot. On success the caller owns the handle and must
/// release it with [`qisflow_sphere_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn qisflow_sphere_flow(
    w0: *const f64,
    c: *const f64,
    dim: usize,
    method: QisflowMethod,
    dt: f64,
    t_max: f64,
    renormalize: bool,
    sample_stride: usize,
    out: *mut *mut QisflowSphereTrajectory,
) -> QisflowStatus {
    nonnull!(w0);
    nonnull!(c);
    nonnull!(out);
    let start = ffi_try!(SphereState::new(
        std::slice::from_raw_parts(w0, dim).to_vec()
    ));
    let spectrum = ffi_try!(spectrum_from_raw(dim, c));
    let config = integrator_config(method, dt, t_max, renormalize, sample_stride);
    let trajectory = ffi_try!(integrate_sphere(&start, &spectrum, &config));
    *out = Box::into_raw(Box::new(QisflowSphereTrajectory(trajectory)));
    QisflowStatus::Ok
}

/// Reports the number of samples in a sphere trajectory.
///
/// # Safety
/// `trajectory` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qisflow_sphere_trajectory_len(
    trajectory: *const QisflowSphereTrajectory,
    out: *mut usize,
) -> QisflowStatus {
    nonnull!(trajectory);
    nonnull!(out);
    *out = (*trajectory).0.len();
    QisflowStatus::Ok
}

/// Copies sample `index` of a sphere trajectory: its time and its `dim`
/// coordinates.
///
/// # Safety
/// `trajectory` must be a live handle; `out_time` must be writable and
/// `out_state` must have room for the trajectory's dimension.
#[no_mangle]
pub unsafe extern "C" fn qisflow_sphere_trajectory_sample(
    trajectory: *const QisflowSphereTrajectory,
    index: usize,
    out_time: *mut f64,
    out_state: *mut f64,
) -> QisflowStatus {
    nonnull!(trajectory);
    nonnull!(out_time);
    nonnull!(out_state);
    let inner = &(*trajectory).0;
    if index >= inner.len() {
        return QisflowStatus::IndexOutOfRange;
    }
    *out_time = inner.times[index];
    let state = &inner.states[index];
    std::slice::from_raw_parts_mut(out_state, state.len()).copy_from_slice(state);
    QisflowStatus::Ok
}

/// Releases a sphere trajectory handle. Accepts null.
///
/// # Safety
/// `trajectory` must be null or a handle produced by this library that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn qisflow_sphere_trajectory_free(trajectory: *mut QisflowSphereTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Integrates the density flow `rho' = rho C + C rho - 2 tr(rho C) rho`
/// from the density behind `rho0` and returns a trajectory handle. The run
/// stops early if an eigenvalue reaches the positivity floor.
///
/// # Safety
/// `rho0` must be a live handle and `c` must point to `dim` readable
/// doubles matching its dimension; `out` must be a writable handle slot.
/// On success the caller owns the handle and must release it with
/// [`qisflow_density_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn qisflow_density_flow(
    rho0: *const QisflowDensity,
    c: *const f64,
    dim: usize,
    method: QisflowMethod,
    dt: f64,
    t_max: f64,
    renormalize: bool,
    sample_stride: usize,
    out: *mut *mut QisflowDensityTrajectory,
) -> QisflowStatus {
    nonnull!(rho0);
    nonnull!(c);
    nonnull!(out);
    let spectrum = ffi_try!(spectrum_from_raw(dim, c));
    let config = integrator_config(method, dt, t_max, renormalize, sample_stride);
    let trajectory = ffi_try!(integrate_density(&(*rho0).0, &spectrum, &config));
    *out = Box::into_raw(Box::new(QisflowDensityTrajectory(trajectory)));
    QisflowStatus::Ok
}

/// Reports the number of samples in a density trajectory.
///
/// # Safety
/// `trajectory` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qisflow_density_trajectory_len(
    trajectory: *const QisflowDensityTrajectory,
    out: *mut usize,
) -> QisflowStatus {
    nonnull!(trajectory);
    nonnull!(out);
    *out = (*trajectory).0.len();
    QisflowStatus::Ok
}

/// Copies sample `index` of a density trajectory: its time and the state
/// matrix as `2 * dim * dim` interleaved doubles.
///
/// # Safety
/// `trajectory` must be a live handle; `out_time` must be writable and
/// `out_entries` must have room for `2 * dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn qisflow_density_trajectory_sample(
    trajectory: *const QisflowDensityTrajectory,
    index: usize,
    out_time: *mut f64,
    out_entries: *mut f64,
) -> QisflowStatus {
    nonnull!(trajectory);
    nonnull!(out_time);
    nonnull!(out_entries);
    let inner = &(*trajectory).0;
    if index >= inner.len() {
        return QisflowStatus::IndexOutOfRange;
    }
    *out_time = inner.times[index];
    matrix_to_raw(inner.states[index].as_matrix(), out_entries);
    QisflowStatus::Ok
}

/// Reports whether a density run stopped at the positivity boundary. When
/// it did, writes the hit time and the offending eigenvalue; otherwise
/// both outputs are set to NaN.
///
/// # Safety
/// `trajectory` must be a live handle; all outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qisflow_density_trajectory_truncated(
    trajectory: *const QisflowDensityTrajectory,
    out_truncated: *mut bool,
    out_time: *mut f64,
    out_min_eigenvalue: *mut f64,
) -> QisflowStatus {
    nonnull!(trajectory);
    nonnull!(out_truncated);
    nonnull!(out_time);
    nonnull!(out_min_eigenvalue);
    match &(*trajectory).0.boundary {
        Some(hit) => {
            *out_truncated = true;
            *out_time = hit.time;
            *out_min_eigenvalue = hit.min_eigenvalue;
        }
        None => {
            *out_truncated = false;
            *out_time = f64::NAN;
            *out_min_eigenvalue = f64::NAN;
        }
    }
    QisflowStatus::Ok
}

/// Releases a density trajectory handle. Accepts null.
///
/// # Safety
/// `trajectory` must be null or a handle produced by this library that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn qisflow_density_trajectory_free(
    trajectory: *mut QisflowDensityTrajectory,
) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Integrates the sphere flow and the density flow from matched starting
/// points and writes the largest deviation between the squared sphere
/// trajectory and the density diagonal.
///
/// # Safety
/// `w0` and `c` must point to `dim` readable doubles; `out_sup` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qisflow_conjugacy_sup(
    w0: *const f64,
    c: *const f64,
    dim: usize,
    method: QisflowMethod,
    dt: f64,
    t_max: f64,
    sample_stride: usize,
    out_sup: *mut f64,
) -> QisflowStatus {
    nonnull!(w0);
    nonnull!(c);
    nonnull!(out_sup);
    let start = ffi_try!(SphereState::new(
        std::slice::from_raw_parts(w0, dim).to_vec()
    ));
    let spectrum = ffi_try!(spectrum_from_raw(dim, c));
    let config = integrator_config(method, dt, t_max, false, sample_stride);
    *out_sup = ffi_try!(conjugacy_check(&start, &spectrum, &config));
    QisflowStatus::Ok
}

/// Applies one stochastic learning update to the coupling vector `w` for
/// the signal `x` and writes the new coupling vector.
///
/// # Safety
/// `w` and `x` must point to `dim` readable doubles; `out_w` must have
/// room for `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn qisflow_oja_step(
    rule: QisflowRule,
    dim: usize,
    w: *const f64,
    x: *const f64,
    eta: f64,
    out_w: *mut f64,
) -> QisflowStatus {
    nonnull!(w);
    nonnull!(x);
    nonnull!(out_w);
    let rule = match rule {
        QisflowRule::Normalized => UpdateRule::Normalized,
        QisflowRule::Truncated => UpdateRule::Truncated,
    };
    let updated = ffi_try!(oja_step(
        rule,
        std::slice::from_raw_parts(w, dim),
        std::slice::from_raw_parts(x, dim),
        eta,
    ));
    std::slice::from_raw_parts_mut(out_w, dim).copy_from_slice(&updated);
    QisflowStatus::Ok
}
