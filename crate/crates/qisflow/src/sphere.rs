//! The averaged Hebbian learning flow on the unit sphere.
//!
//! For a diagonal correlation spectrum c the flow field is
//! `w' = C w - (w . C w) w`, the negative gradient of the quadratic
//! potential `-(1/2) sum_k c_k w_k^2` in the round metric. The field is
//! tangent to the sphere, vanishes componentwise on coordinate hyperplanes,
//! and commutes with componentwise sign flips.

use crate::error::{Error, Result};
use crate::tol;

/// Point on the unit sphere, `||w|| = 1` within [`tol::UNIT_NORM`].
#[derive(Debug, Clone, PartialEq)]
pub struct SphereState {
    w: Vec<f64>,
}

impl SphereState {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.len() < 2 {
            return Err(Error::DimTooSmall(w.len()));
        }
        let norm = norm(&w);
        if (norm - 1.0).abs() > tol::UNIT_NORM {
            return Err(Error::NotUnitNorm(norm));
        }
        Ok(Self { w })
    }

    /// Rescales an arbitrary nonzero vector onto the sphere.
    pub fn normalized(v: Vec<f64>) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::DimTooSmall(v.len()));
        }
        let norm = norm(&v);
        if norm <= tol::DEGENERATE_NORM {
            return Err(Error::NotUnitNorm(norm));
        }
        Ok(Self {
            w: v.into_iter().map(|x| x / norm).collect(),
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.w
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }
}

/// Tangent vector `u` at a recorded base point, `w . u = 0` within
/// [`tol::TANGENCY`].
#[derive(Debug, Clone, PartialEq)]
pub struct SphereTangent {
    u: Vec<f64>,
    base: SphereState,
}

impl SphereTangent {
    pub fn new(base: SphereState, u: Vec<f64>) -> Result<Self> {
        if u.len() != base.dim() {
            return Err(Error::DimMismatch(base.dim(), u.len()));
        }
        let overlap = dot(base.coords(), &u);
        if overlap.abs() > tol::TANGENCY {
            return Err(Error::NotTangent(overlap));
        }
        Ok(Self { u, base })
    }

    pub fn components(&self) -> &[f64] {
        &self.u
    }

    pub fn base(&self) -> &SphereState {
        &self.base
    }
}

/// Eigenvalue spectrum of a correlation matrix, one entry per coordinate.
///
/// Entries must be finite. Convergence statements about principal-component
/// extraction additionally assume a unique maximum; that is a property of
/// the experiment, not a construction invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::DimTooSmall(values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSpectrum);
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Index of the strictly largest entry, if it is unique.
    pub fn dominant_index(&self) -> Option<usize> {
        let mut best = 0;
        for i in 1..self.values.len() {
            if self.values[i] > self.values[best] {
                best = i;
            }
        }
        let unique = self
            .values
            .iter()
            .enumerate()
            .all(|(i, &v)| i == best || v < self.values[best]);
        unique.then_some(best)
    }

    /// Gap between the largest and second-largest entries.
    pub fn spectral_gap(&self) -> Option<f64> {
        let best = self.dominant_index()?;
        let runner_up = self
            .values
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != best)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        Some(self.values[best] - runner_up)
    }
}

/// Flow field `C w - (w . C w) w`.
pub fn oja_rhs(w: &SphereState, c: &Spectrum) -> Result<Vec<f64>> {
    if w.dim() != c.dim() {
        return Err(Error::DimMismatch(w.dim(), c.dim()));
    }
    Ok(oja_rhs_raw(w.coords(), c.values()))
}

/// Quadratic learning potential `-(1/2) sum_k c_k w_k^2`.
pub fn potential(w: &SphereState, c: &Spectrum) -> Result<f64> {
    if w.dim() != c.dim() {
        return Err(Error::DimMismatch(w.dim(), c.dim()));
    }
    Ok(potential_raw(w.coords(), c.values()))
}

/// Sphere gradient of the potential; the negative of [`oja_rhs`].
pub fn potential_gradient(w: &SphereState, c: &Spectrum) -> Result<SphereTangent> {
    let mut u = oja_rhs(w, c)?;
    for x in &mut u {
        *x = -*x;
    }
    debug_assert!(dot(w.coords(), &u).abs() <= tol::TANGENCY);
    Ok(SphereTangent { u, base: w.clone() })
}

/// Orthogonal projection of an ambient vector onto the tangent space at `w`.
pub fn tangent_project(w: &SphereState, v: &[f64]) -> Result<SphereTangent> {
    if v.len() != w.dim() {
        return Err(Error::DimMismatch(w.dim(), v.len()));
    }
    let overlap = dot(w.coords(), v);
    let u: Vec<f64> = v
        .iter()
        .zip(w.coords())
        .map(|(vi, wi)| vi - overlap * wi)
        .collect();
    Ok(SphereTangent { u, base: w.clone() })
}

/// True when every component clears the coordinate-hyperplane floor, i.e.
/// the point lies in the domain of the squaring immersion.
pub fn has_full_support(w: &SphereState) -> bool {
    has_full_support_with(w, tol::COMPONENT_FLOOR)
}

pub fn has_full_support_with(w: &SphereState, floor: f64) -> bool {
    w.coords().iter().all(|x| x.abs() > floor)
}

pub(crate) fn oja_rhs_raw(w: &[f64], c: &[f64]) -> Vec<f64> {
    let rayleigh = rayleigh_raw(w, c);
    w.iter()
        .zip(c)
        .map(|(wi, ci)| (ci - rayleigh) * wi)
        .collect()
}

pub(crate) fn potential_raw(w: &[f64], c: &[f64]) -> f64 {
    -0.5 * rayleigh_raw(w, c)
}

fn rayleigh_raw(w: &[f64], c: &[f64]) -> f64 {
    w.iter().zip(c).map(|(wi, ci)| ci * wi * wi).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn two_one() -> Spectrum {
        Spectrum::new(vec![2.0, 1.0]).unwrap()
    }

    #[test]
    fn state_accepts_unit_and_rejects_other_norms() {
        assert!(SphereState::new(vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]).is_ok());
        assert!(matches!(
            SphereState::new(vec![1.0, 1.0]),
            Err(Error::NotUnitNorm(_))
        ));
    }

    #[test]
    fn normalized_rejects_zero_vector() {
        assert!(SphereState::normalized(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn rhs_on_the_diagonal_direction() {
        let w = SphereState::new(vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let rhs = oja_rhs(&w, &two_one()).unwrap();
        assert_abs_diff_eq!(rhs[0], 0.5 * FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(rhs[1], -0.5 * FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn rhs_is_tangent_to_the_sphere() {
        let w = SphereState::normalized(vec![0.3, -1.2, 0.5, 2.0]).unwrap();
        let c = Spectrum::new(vec![1.5, 0.2, -0.4, 0.9]).unwrap();
        let rhs = oja_rhs(&w, &c).unwrap();
        assert!(dot(w.coords(), &rhs).abs() < 1e-14);
    }

    #[test]
    fn rhs_vanishes_exactly_on_hyperplanes() {
        let w = SphereState::new(vec![0.0, 0.6, 0.8]).unwrap();
        let c = Spectrum::new(vec![2.0, 1.0, 0.5]).unwrap();
        let rhs = oja_rhs(&w, &c).unwrap();
        assert_eq!(rhs[0], 0.0);
    }

    #[test]
    fn rhs_commutes_with_sign_flips_exactly() {
        let w = SphereState::normalized(vec![0.4, -0.7, 1.1]).unwrap();
        let c = Spectrum::new(vec![1.3, 0.8, 0.1]).unwrap();
        let rhs = oja_rhs(&w, &c).unwrap();
        for mask in 0..8u32 {
            let signs: Vec<f64> = (0..3)
                .map(|k| if mask & (1 << k) == 0 { 1.0 } else { -1.0 })
                .collect();
            let flipped =
                SphereState::new(w.coords().iter().zip(&signs).map(|(x, s)| x * s).collect())
                    .unwrap();
            let flipped_rhs = oja_rhs(&flipped, &c).unwrap();
            for k in 0..3 {
                assert_eq!(flipped_rhs[k], signs[k] * rhs[k]);
            }
        }
    }

    #[test]
    fn potential_on_the_diagonal_direction() {
        let w = SphereState::new(vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert_abs_diff_eq!(potential(&w, &two_one()).unwrap(), -0.75, epsilon = 1e-15);
    }

    #[test]
    fn gradient_is_negative_rhs() {
        let w = SphereState::normalized(vec![1.0, 2.0, -0.5]).unwrap();
        let c = Spectrum::new(vec![0.3, 1.7, 0.9]).unwrap();
        let rhs = oja_rhs(&w, &c).unwrap();
        let grad = potential_gradient(&w, &c).unwrap();
        for (g, r) in grad.components().iter().zip(&rhs) {
            assert_eq!(*g, -r);
        }
    }

    #[test]
    fn gradient_matches_great_circle_finite_differences() {
        let w = SphereState::normalized(vec![0.9, -0.4, 0.2, 1.3]).unwrap();
        let c = Spectrum::new(vec![1.1, 0.5, -0.3, 0.8]).unwrap();
        let grad = potential_gradient(&w, &c).unwrap();
        let raw = [0.3, -1.0, 0.7, 0.1];
        let u = tangent_project(&w, &raw).unwrap();
        let unit_u = {
            let n = norm(u.components());
            u.components().iter().map(|x| x / n).collect::<Vec<_>>()
        };
        let h = tol::FD_STEP;
        let circle = |t: f64| -> f64 {
            let p: Vec<f64> = w
                .coords()
                .iter()
                .zip(&unit_u)
                .map(|(wi, ui)| t.cos() * wi + t.sin() * ui)
                .collect();
            potential_raw(&p, c.values())
        };
        let fd = (circle(h) - circle(-h)) / (2.0 * h);
        let analytic = dot(grad.components(), &unit_u);
        assert!((analytic - fd).abs() / (1.0 + fd.abs()) < 1e-6);
    }

    #[test]
    fn projection_removes_the_radial_part() {
        let w = SphereState::new(vec![1.0, 0.0, 0.0]).unwrap();
        let t = tangent_project(&w, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.components(), &[0.0, 2.0, 3.0]);
    }

    #[test]
    fn tangent_constructor_rejects_radial_vectors() {
        let w = SphereState::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            SphereTangent::new(w, vec![0.5, 0.1]),
            Err(Error::NotTangent(_))
        ));
    }

    #[test]
    fn support_predicate_uses_the_component_floor() {
        let tiny = 1e-13;
        let w = SphereState::new(vec![tiny, (1.0 - tiny * tiny).sqrt()]).unwrap();
        assert!(!has_full_support(&w));
        let generic = SphereState::normalized(vec![1.0, 1.0]).unwrap();
        assert!(has_full_support(&generic));
    }

    #[test]
    fn spectrum_analysis_helpers() {
        let c = Spectrum::new(vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(c.dominant_index(), Some(1));
        assert_abs_diff_eq!(c.spectral_gap().unwrap(), 1.0, epsilon = 1e-15);
        let tie = Spectrum::new(vec![3.0, 3.0, 1.0]).unwrap();
        assert_eq!(tie.dominant_index(), None);
        assert!(Spectrum::new(vec![f64::NAN, 1.0]).is_err());
    }
}
