//! Fixed-step integration of the two gradient flows, with the conserved
//! quantities of each picture monitored along the way.
//!
//! Both pictures share one vector field shape: the sphere flow moves real
//! coordinate vectors, the density flow moves Hermitian matrices. A small
//! internal state trait lets Euler and the classical fourth-order
//! Runge-Kutta scheme serve both without duplication. Integration is
//! deliberately fixed-step: reproducibility matters more here than adaptive
//! efficiency, and the invariant drift of each scheme is itself an object
//! of study.

use std::collections::BTreeMap;

use crate::density::{self, DensityMatrix, DiagonalDensity, TracePotential};
use crate::error::{Error, Result};
use crate::hermitian::{ComplexMatrix, HermitianMatrix};
use crate::immersion;
use crate::seed::derive_seed;
use crate::sphere::{self, Spectrum, SphereState};
use crate::tol;

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Explicit Euler. First order; useful as a convergence baseline.
    Euler,
    /// Classical fourth-order Runge-Kutta.
    Rk4,
}

/// Fixed-step integration settings shared by both flows.
#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Step size. Must be positive and finite.
    pub dt: f64,
    /// Integration horizon. The step count is `round(t_max / dt)`.
    pub t_max: f64,
    /// When set, project back onto the constraint set after every step:
    /// rescale to unit norm on the sphere, re-symmetrize and rescale to
    /// unit trace on densities. Off by default so drift stays observable.
    pub renormalize: bool,
    /// Record every `sample_stride`-th step (plus the initial and final
    /// states). Must be at least 1.
    pub sample_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            dt: 1e-3,
            t_max: 10.0,
            renormalize: false,
            sample_stride: 10,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::BadSetting(format!(
                "step size must be positive and finite, got {}",
                self.dt
            )));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::BadSetting(format!(
                "horizon must be positive and finite, got {}",
                self.t_max
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::BadSetting(
                "sample stride must be at least 1".to_string(),
            ));
        }
        Ok(())
    }

    fn step_count(&self) -> usize {
        ((self.t_max / self.dt).round() as usize).max(1)
    }
}

/// Reason and location of an early stop of the density flow.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryHit {
    /// Time of the first step whose result left the strictly positive cone.
    pub time: f64,
    /// Smallest eigenvalue observed at that step.
    pub min_eigenvalue: f64,
}

/// Sampled solution of one integration run.
///
/// `times[i]` pairs with `states[i]` and `diagnostics[i]`. The diagnostics
/// maps hold the monitored invariants at that sample; keys are stable and
/// documented on the integrators.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub diagnostics: Vec<BTreeMap<String, f64>>,
    /// Set when the run stopped before the horizon; only the density flow
    /// can trigger this. Samples past the hit are never recorded.
    pub boundary: Option<BoundaryHit>,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory has at least one sample")
    }

    pub fn final_state(&self) -> &S {
        self.states
            .last()
            .expect("trajectory has at least one sample")
    }

    pub fn is_truncated(&self) -> bool {
        self.boundary.is_some()
    }
}

/// Minimal vector-space surface the steppers need.
trait FlowState: Clone {
    /// `self += factor * direction`, entrywise.
    fn accumulate(&mut self, factor: f64, direction: &Self);
}

impl FlowState for Vec<f64> {
    fn accumulate(&mut self, factor: f64, direction: &Self) {
        debug_assert_eq!(self.len(), direction.len());
        for (a, b) in self.iter_mut().zip(direction) {
            *a += factor * b;
        }
    }
}

impl FlowState for ComplexMatrix {
    fn accumulate(&mut self, factor: f64, direction: &Self) {
        self.axpy(factor, direction);
    }
}

fn advance<S, F>(method: Method, state: &S, dt: f64, rhs: &F) -> S
where
    S: FlowState,
    F: Fn(&S) -> S,
{
    match method {
        Method::Euler => {
            let mut next = state.clone();
            next.accumulate(dt, &rhs(state));
            next
        }
        Method::Rk4 => {
            let k1 = rhs(state);
            let mut mid = state.clone();
            mid.accumulate(0.5 * dt, &k1);
            let k2 = rhs(&mid);
            let mut mid = state.clone();
            mid.accumulate(0.5 * dt, &k2);
            let k3 = rhs(&mid);
            let mut end = state.clone();
            end.accumulate(dt, &k3);
            let k4 = rhs(&end);
            let mut next = state.clone();
            next.accumulate(dt / 6.0, &k1);
            next.accumulate(dt / 3.0, &k2);
            next.accumulate(dt / 3.0, &k3);
            next.accumulate(dt / 6.0, &k4);
            next
        }
    }
}

/// Integrates the sphere flow `w' = (C - rayleigh) w` from `w0`.
///
/// Diagnostics per sample: `norm_err` (Euclidean norm minus one) and
/// `potential` (minus half the Rayleigh quotient). States are raw
/// coordinate vectors so off-sphere drift remains visible; wrap them back
/// into [`SphereState`] only where validity is required.
pub fn integrate_sphere(
    w0: &SphereState,
    c: &Spectrum,
    config: &IntegratorConfig,
) -> Result<Trajectory<Vec<f64>>> {
    config.validate()?;
    if w0.dim() != c.dim() {
        return Err(Error::DimMismatch(w0.dim(), c.dim()));
    }
    let coeff = c.values().to_vec();
    let rhs = |w: &Vec<f64>| sphere::oja_rhs_raw(w, &coeff);

    let steps = config.step_count();
    let mut state = w0.coords().to_vec();
    let mut trajectory = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        diagnostics: Vec::new(),
        boundary: None,
    };
    record_sphere_sample(&mut trajectory, 0.0, &state, &coeff);

    for i in 1..=steps {
        state = advance(config.method, &state, config.dt, &rhs);
        if config.renormalize {
            let n = sphere::norm(&state);
            if n <= tol::DEGENERATE_NORM {
                return Err(Error::DegenerateUpdate(n));
            }
            for x in &mut state {
                *x /= n;
            }
        }
        if i % config.sample_stride == 0 || i == steps {
            record_sphere_sample(&mut trajectory, i as f64 * config.dt, &state, &coeff);
        }
    }
    Ok(trajectory)
}

fn record_sphere_sample(
    trajectory: &mut Trajectory<Vec<f64>>,
    time: f64,
    state: &[f64],
    coeff: &[f64],
) {
    let mut diag = BTreeMap::new();
    diag.insert("norm_err".to_string(), sphere::norm(state) - 1.0);
    diag.insert("potential".to_string(), sphere::potential_raw(state, coeff));
    trajectory.times.push(time);
    trajectory.states.push(state.to_vec());
    trajectory.diagnostics.push(diag);
}

/// Integrates the density flow `rho' = C rho + rho C - 2 tr(C rho) rho`
/// from `rho0`, with `C = diag(c)`.
///
/// After every step the smallest eigenvalue is checked; if it falls to the
/// positivity floor the run stops, the offending state is discarded, and
/// the trajectory is returned truncated at the last valid sample with
/// [`Trajectory::boundary`] describing the hit. Diagnostics per sample:
/// `trace_err` (trace minus one), `herm_err` (worst conjugate-symmetry
/// residual), `min_eig`, and `potential` (the learning potential
/// `-2 tr(C rho)`).
pub fn integrate_density(
    rho0: &DensityMatrix,
    c: &Spectrum,
    config: &IntegratorConfig,
) -> Result<Trajectory<HermitianMatrix>> {
    config.validate()?;
    if rho0.dim() != c.dim() {
        return Err(Error::DimMismatch(rho0.dim(), c.dim()));
    }
    let coeff = c.values().to_vec();
    let rhs = |rho: &ComplexMatrix| density::oja_rhs_raw(rho, &coeff);

    let steps = config.step_count();
    let mut state = rho0.as_matrix().clone();
    let mut trajectory = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        diagnostics: Vec::new(),
        boundary: None,
    };
    let min0 = HermitianMatrix::symmetrized(state.clone()).min_eigenvalue()?;
    record_density_sample(&mut trajectory, 0.0, &state, min0, &coeff);

    for i in 1..=steps {
        state = advance(config.method, &state, config.dt, &rhs);
        if config.renormalize {
            let repaired = HermitianMatrix::symmetrized(state);
            let trace = repaired.trace_real();
            if trace.abs() <= tol::DEGENERATE_NORM {
                return Err(Error::DegenerateUpdate(trace));
            }
            let mut m = repaired.into_matrix();
            m.scale_mut(1.0 / trace);
            state = m;
        }
        let time = i as f64 * config.dt;
        let min_eig = HermitianMatrix::symmetrized(state.clone()).min_eigenvalue()?;
        if min_eig <= tol::POSITIVITY_FLOOR {
            trajectory.boundary = Some(BoundaryHit {
                time,
                min_eigenvalue: min_eig,
            });
            break;
        }
        if i % config.sample_stride == 0 || i == steps {
            record_density_sample(&mut trajectory, time, &state, min_eig, &coeff);
        }
    }
    Ok(trajectory)
}

fn record_density_sample(
    trajectory: &mut Trajectory<HermitianMatrix>,
    time: f64,
    state: &ComplexMatrix,
    min_eig: f64,
    coeff: &[f64],
) {
    let potential = -2.0
        * (0..state.dim())
            .map(|j| coeff[j] * state.get(j, j).re)
            .sum::<f64>();
    let mut diag = BTreeMap::new();
    diag.insert("trace_err".to_string(), state.trace().re - 1.0);
    diag.insert("herm_err".to_string(), state.hermiticity_residual());
    diag.insert("min_eig".to_string(), min_eig);
    diag.insert("potential".to_string(), potential);
    trajectory.times.push(time);
    trajectory
        .states
        .push(HermitianMatrix::symmetrized(state.clone()));
    trajectory.diagnostics.push(diag);
}

/// Closed-form solution of the density flow restricted to diagonal states.
///
/// On the diagonal the flow reduces to `theta_j' = 2 theta_j (c_j - a)`
/// with `a = sum_k c_k theta_k`. The formula
///
/// ```text
/// theta_j(t) = theta_j(0) exp(2 c_j t) / sum_k theta_k(0) exp(2 c_k t)
/// ```
///
/// solves it: writing `S(t)` for the denominator, the quotient rule gives
/// `theta_j' = 2 c_j theta_j - theta_j S'/S`, and `S'/S` expands to
/// `sum_k 2 c_k theta_k(t)`, which is `2a`. At `t = 0` the quotient is
/// `theta(0)`, so the initial condition holds as well. Exponents are
/// shifted by their maximum before exponentiation, which leaves the
/// quotient unchanged and keeps it finite at long horizons.
///
/// Returns plain weights rather than a [`DiagonalDensity`]: at large `t`
/// the losing entries legitimately underflow the interior floor.
pub fn replicator_oracle(theta0: &DiagonalDensity, c: &Spectrum, t: f64) -> Result<Vec<f64>> {
    if theta0.dim() != c.dim() {
        return Err(Error::DimMismatch(theta0.dim(), c.dim()));
    }
    if !t.is_finite() {
        return Err(Error::BadSetting(format!(
            "evaluation time must be finite, got {t}"
        )));
    }
    let exponents: Vec<f64> = c.values().iter().map(|&ck| 2.0 * ck * t).collect();
    let shift = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let grown: Vec<f64> = theta0
        .entries()
        .iter()
        .zip(&exponents)
        .map(|(&th, &e)| th * (e - shift).exp())
        .collect();
    let total: f64 = grown.iter().sum();
    Ok(grown.into_iter().map(|g| g / total).collect())
}

/// Side-by-side integration of the two conjugate pictures.
///
/// The sphere flow starts at `w0`; the density flow starts at the squared
/// point. At every shared sample the squared sphere state is compared with
/// the density matrix in Frobenius norm.
#[derive(Debug, Clone)]
pub struct ConjugacyReport {
    pub times: Vec<f64>,
    /// Entrywise squares of the sphere samples.
    pub sphere_squares: Vec<Vec<f64>>,
    /// Diagonals of the density samples (real parts).
    pub density_diagonals: Vec<Vec<f64>>,
    /// Frobenius distance between the squared sphere state (as a diagonal
    /// matrix) and the full density sample, per shared sample.
    pub deviations: Vec<f64>,
    pub sup_deviation: f64,
    /// Set when the density run stopped at the positivity floor; the
    /// comparison then covers the samples recorded before the hit.
    pub truncated: bool,
}

/// Runs both flows from conjugate starting points and measures how far the
/// squared sphere trajectory drifts from the density trajectory.
pub fn conjugacy_run(
    w0: &SphereState,
    c: &Spectrum,
    config: &IntegratorConfig,
) -> Result<ConjugacyReport> {
    let theta0 = immersion::square_map(w0)?;
    let rho0 = theta0.to_density();
    let sphere_traj = integrate_sphere(w0, c, config)?;
    let density_traj = integrate_density(&rho0, c, config)?;

    let shared = sphere_traj.len().min(density_traj.len());
    let mut times = Vec::with_capacity(shared);
    let mut sphere_squares = Vec::with_capacity(shared);
    let mut density_diagonals = Vec::with_capacity(shared);
    let mut deviations = Vec::with_capacity(shared);
    let mut sup = 0.0_f64;
    for i in 0..shared {
        let w = &sphere_traj.states[i];
        let rho = density_traj.states[i].as_matrix();
        let squares: Vec<f64> = w.iter().map(|x| x * x).collect();
        let diag: Vec<f64> = (0..rho.dim()).map(|j| rho.get(j, j).re).collect();
        let mut dev2 = 0.0;
        for (j, &square) in squares.iter().enumerate() {
            for k in 0..rho.dim() {
                let target = if j == k { square } else { 0.0 };
                dev2 += (rho.get(j, k) - target).norm_sqr();
            }
        }
        let dev = dev2.sqrt();
        sup = sup.max(dev);
        times.push(sphere_traj.times[i]);
        sphere_squares.push(squares);
        density_diagonals.push(diag);
        deviations.push(dev);
    }
    Ok(ConjugacyReport {
        times,
        sphere_squares,
        density_diagonals,
        deviations,
        sup_deviation: sup,
        truncated: density_traj.is_truncated(),
    })
}

/// Convenience wrapper returning only the largest deviation of
/// [`conjugacy_run`].
pub fn conjugacy_check(w0: &SphereState, c: &Spectrum, config: &IntegratorConfig) -> Result<f64> {
    Ok(conjugacy_run(w0, c, config)?.sup_deviation)
}

/// Checks the defining property of the metric gradient by finite
/// differences.
///
/// For random trace-free directions `Xi`, the metric pairing of the
/// gradient with `Xi` must equal the derivative of the potential along the
/// normalized ray `r(tau) = (rho + tau Xi) / tr(rho + tau Xi)`, whose
/// velocity at `tau = 0` is `Xi` itself. Returns the worst error over
/// `samples` directions, relative against `max(1, |derivative|)`.
pub fn finite_diff_gradient_check(
    rho: &DensityMatrix,
    potential: &TracePotential,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if rho.dim() != potential.dim() {
        return Err(Error::DimMismatch(rho.dim(), potential.dim()));
    }
    let gradient = density::metric_gradient(rho, potential)?;
    let mut worst = 0.0_f64;
    for i in 0..samples {
        let direction = density::random_tangent(rho.dim(), derive_seed(seed, i as u64))?;
        let paired = density::fisher_metric(rho, &gradient, &direction)?;

        let value_at = |tau: f64| -> f64 {
            let mut moved = rho.as_matrix().clone();
            moved.axpy(tau, direction.as_matrix());
            let trace = moved.trace().re;
            moved.scale_mut(1.0 / trace);
            potential.evaluate_raw(&moved)
        };
        let h = tol::FD_STEP;
        let derivative = (value_at(h) - value_at(-h)) / (2.0 * h);
        let err = (paired - derivative).abs() / derivative.abs().max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}
