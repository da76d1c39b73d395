//! Default numerical tolerances, collected here so every threshold in the
//! library has one authoritative value. Functions that check an invariant
//! take an explicit tolerance in their `_with` variant and use these
//! constants otherwise.

/// Maximum entrywise asymmetry |a_jk - conj(a_kj)| accepted as Hermitian.
pub const HERMITIAN_ASYMMETRY: f64 = 1e-12;

/// Off-diagonal Frobenius threshold for eigensolver convergence,
/// relative to max(1, Frobenius norm of the input).
pub const EIG_OFF_DIAGONAL: f64 = 1e-13;

/// Sweep budget for the eigensolver; one sweep is m(m-1)/2 rotations.
pub const EIG_MAX_SWEEPS: usize = 100;

/// Modulus above which a frame-column entry counts as significant when
/// fixing the column's global phase.
pub const GAUGE_FLOOR: f64 = 1e-8;

/// Accepted |tr - 1| for a density matrix.
pub const UNIT_TRACE: f64 = 1e-10;

/// Eigenvalues at or below this floor count as the manifold boundary;
/// density matrices must stay strictly above it.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// Accepted |tr| for a tangent matrix.
pub const ZERO_TRACE: f64 = 1e-10;

/// Accepted imaginary part of a scalar that must come out real, relative
/// to max(1, |real part|): roundoff in the imaginary component scales
/// with the magnitude of the quantity being accumulated.
pub const IMAGINARY_RESIDUAL: f64 = 1e-12;

/// Accepted deviation from unit norm for sphere points and couplings.
pub const UNIT_NORM: f64 = 1e-10;

/// Accepted |w . u| for a sphere tangent at w.
pub const TANGENCY: f64 = 1e-10;

/// Components at or below this magnitude sit on a coordinate hyperplane,
/// outside the domain of the squaring immersion.
pub const COMPONENT_FLOOR: f64 = 1e-12;

/// Accepted deviation from orthogonality for signal frames, G^T G = I.
pub const FRAME_ORTHOGONALITY: f64 = 1e-10;

/// Denominator floor below which a normalized update is degenerate.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Step for the tangent-curve finite differences used in gradient checks.
pub const FD_STEP: f64 = 1e-5;
