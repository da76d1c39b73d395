//! The squaring immersion from the sphere into diagonal density matrices,
//! `w -> diag(w_1^2, ..., w_m^2)`, defined off the coordinate hyperplanes.
//!
//! Componentwise sign flips leave the image untouched, so the map is a
//! 2^m-to-one covering onto the interior of the simplex; its differential
//! scales the round metric by exactly 4 under the Fisher pairing, and it
//! carries the sphere potential gradient onto the density-matrix one. Those
//! two facts are what the property suite and the conjugacy experiments pin
//! down numerically.

use crate::density::{DiagonalDensity, TangentMatrix};
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::sphere::{self, Spectrum, SphereState, SphereTangent};
use crate::tol;

/// Element of the sign group acting on sphere coordinates; entries are
/// exactly +1 or -1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector {
    signs: Vec<i8>,
}

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.len() < 2 {
            return Err(Error::DimTooSmall(signs.len()));
        }
        if let Some(&bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::BadSetting(format!(
                "sign entries must be +1 or -1, got {bad}"
            )));
        }
        Ok(Self { signs })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            signs: vec![1; dim],
        }
    }

    /// Bitmask constructor: bit k set means coordinate k is flipped.
    /// Handy for enumerating the whole group in tests.
    pub fn from_mask(dim: usize, mask: u64) -> Self {
        Self {
            signs: (0..dim)
                .map(|k| if mask & (1 << k) == 0 { 1 } else { -1 })
                .collect(),
        }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }
}

/// Componentwise sign flip of a sphere point. Exact: flipping signs leaves
/// every square, hence the norm, bit-identical.
pub fn sign_action(sigma: &SignVector, w: &SphereState) -> Result<SphereState> {
    if sigma.dim() != w.dim() {
        return Err(Error::DimMismatch(sigma.dim(), w.dim()));
    }
    let flipped: Vec<f64> = w
        .coords()
        .iter()
        .zip(sigma.signs())
        .map(|(x, &s)| f64::from(s) * x)
        .collect();
    SphereState::new(flipped)
}

/// The immersion itself: `theta_k = w_k^2`. Rejects points on a coordinate
/// hyperplane, where the map stops being an immersion.
pub fn square_map(w: &SphereState) -> Result<DiagonalDensity> {
    if let Some((index, &value)) = w
        .coords()
        .iter()
        .enumerate()
        .find(|(_, x)| x.abs() <= tol::COMPONENT_FLOOR)
    {
        return Err(Error::VanishingComponent { index, value });
    }
    let theta: Vec<f64> = w.coords().iter().map(|x| x * x).collect();
    // Squaring doubles the norm residual of the base point, so the simplex
    // sum check is widened accordingly.
    DiagonalDensity::new_with(theta, 2.5 * tol::UNIT_NORM)
}

/// Differential of the immersion: `u -> diag(2 w_k u_k)`, a traceless
/// diagonal tangent at the image point.
pub fn square_map_differential(w: &SphereState, u: &SphereTangent) -> Result<TangentMatrix> {
    if w.dim() != u.components().len() {
        return Err(Error::DimMismatch(w.dim(), u.components().len()));
    }
    let overlap = sphere::dot(w.coords(), u.components());
    if overlap.abs() > tol::TANGENCY {
        return Err(Error::NotTangent(overlap));
    }
    let diag: Vec<f64> = w
        .coords()
        .iter()
        .zip(u.components())
        .map(|(wk, uk)| 2.0 * wk * uk)
        .collect();
    // The image trace is twice the tangency residual of u.
    TangentMatrix::new_with(
        HermitianMatrix::from_real_diagonal(&diag),
        2.5 * tol::TANGENCY,
    )
}

/// Image of the sphere potential gradient under the differential, computed
/// on the positive-root sheet `w_k = sqrt(theta_k)`. Sign flips cancel in
/// pairs, so every sheet produces the same matrix; the conjugacy invariant
/// is that this equals the Fisher gradient of the matching trace potential
/// at `diag(theta)`.
pub fn pushforward_potential_gradient(
    theta: &DiagonalDensity,
    c: &Spectrum,
) -> Result<TangentMatrix> {
    if theta.dim() != c.dim() {
        return Err(Error::DimMismatch(theta.dim(), c.dim()));
    }
    if let Some(&min) = theta
        .entries()
        .iter()
        .find(|&&t| t <= tol::POSITIVITY_FLOOR)
    {
        return Err(Error::BoundarySimplex(min));
    }
    let w: Vec<f64> = theta.entries().iter().map(|t| t.sqrt()).collect();
    let rayleigh: f64 = w.iter().zip(c.values()).map(|(wk, ck)| ck * wk * wk).sum();
    let diag: Vec<f64> = w
        .iter()
        .zip(c.values())
        .map(|(wk, ck)| 2.0 * wk * ((rayleigh - ck) * wk))
        .collect();
    TangentMatrix::new_with(
        HermitianMatrix::from_real_diagonal(&diag),
        tol::ZERO_TRACE * (1.0 + 2.0 * rayleigh.abs()),
    )
}
