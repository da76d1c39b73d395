//! Library-wide error type. Configuration parsing has its own error in
//! [`crate::config`]; everything numeric reports through [`Error`].

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("matrix dimension must be at least 2, got {0}")]
    DimTooSmall(usize),

    #[error("entry count {got} does not match a {dim}x{dim} matrix")]
    BadEntryCount { dim: usize, got: usize },

    #[error("matrix is not Hermitian: max asymmetry {0:.3e}")]
    NotHermitian(f64),

    #[error(
        "eigensolver did not converge after {sweeps} sweeps, off-diagonal residual {residual:.3e}"
    )]
    EigenNoConvergence { sweeps: usize, residual: f64 },

    #[error("trace must be 1, got {0}")]
    InvalidTrace(f64),

    #[error("tangent trace must vanish, got {0:.3e}")]
    NonzeroTrace(f64),

    #[error("density matrix at the positivity boundary: min eigenvalue {0:.3e}")]
    BoundaryDensity(f64),

    #[error("simplex point at the boundary: min entry {0:.3e}")]
    BoundarySimplex(f64),

    #[error("component {index} vanishes ({value:.3e}); point lies on a coordinate hyperplane")]
    VanishingComponent { index: usize, value: f64 },

    #[error("vector norm must be 1, got {0}")]
    NotUnitNorm(f64),

    #[error("vector is not tangent: inner product with base point {0:.3e}")]
    NotTangent(f64),

    #[error("update denominator {0:.3e} is numerically degenerate")]
    DegenerateUpdate(f64),

    #[error("signal frame is not orthogonal: max residual {0:.3e}")]
    NotOrthogonal(f64),

    #[error("spectrum entries must be finite")]
    NonFiniteSpectrum,

    #[error("expected a real scalar, imaginary residual {0:.3e}")]
    NotReal(f64),

    #[error("invalid setting: {0}")]
    BadSetting(String),
}

pub type Result<T> = std::result::Result<T, Error>;
