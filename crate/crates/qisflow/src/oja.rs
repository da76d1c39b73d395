//! Stochastic Oja learning and its bridge to the averaged flow.
//!
//! A single linear neuron sees zero-mean Gaussian signals with a prescribed
//! correlation structure and adapts its coupling vector by a Hebbian update
//! with decay. Averaging the update over the signal distribution yields
//! exactly the sphere flow of [`crate::flow::integrate_sphere`], so for
//! small learning rates the mean learning path shadows that flow. The
//! bridge runner here makes the comparison quantitative.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::flow::{integrate_sphere, IntegratorConfig, Method};
use crate::seed::derive_seed;
use crate::sphere::{self, Spectrum, SphereState};
use crate::tol;

/// Gaussian signal source with correlation `G diag(c) G^T`, where `G` is a
/// real orthogonal frame whose columns are the principal directions and
/// `c` holds the (nonnegative) principal intensities.
#[derive(Debug, Clone)]
pub struct CorrelationModel {
    spectrum: Spectrum,
    /// Row-major `m x m` orthogonal frame.
    frame: Vec<f64>,
    /// Square roots of the intensities, cached for signal synthesis.
    half_power: Vec<f64>,
}

impl CorrelationModel {
    pub fn new(spectrum: Spectrum, frame: Vec<f64>) -> Result<Self> {
        let m = spectrum.dim();
        if frame.len() != m * m {
            return Err(Error::BadEntryCount {
                dim: m,
                got: frame.len(),
            });
        }
        let mut residual = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                let mut dot = 0.0;
                for k in 0..m {
                    dot += frame[k * m + i] * frame[k * m + j];
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                residual = residual.max((dot - expected).abs());
            }
        }
        if residual > tol::FRAME_ORTHOGONALITY {
            return Err(Error::NotOrthogonal(residual));
        }
        let mut half_power = Vec::with_capacity(m);
        for &ck in spectrum.values() {
            if ck < 0.0 {
                return Err(Error::BadSetting(format!(
                    "signal intensities must be nonnegative, got {ck}"
                )));
            }
            half_power.push(ck.sqrt());
        }
        Ok(Self {
            spectrum,
            frame,
            half_power,
        })
    }

    /// Model whose principal directions are the coordinate axes.
    pub fn axis_aligned(spectrum: Spectrum) -> Result<Self> {
        let m = spectrum.dim();
        let mut frame = vec![0.0; m * m];
        for i in 0..m {
            frame[i * m + i] = 1.0;
        }
        Self::new(spectrum, frame)
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn frame(&self) -> &[f64] {
        &self.frame
    }

    /// Entry `(i, j)` of the correlation matrix `G diag(c) G^T`.
    pub fn correlation_entry(&self, i: usize, j: usize) -> f64 {
        let m = self.dim();
        (0..m)
            .map(|k| self.frame[i * m + k] * self.spectrum.values()[k] * self.frame[j * m + k])
            .sum()
    }

    /// Draws one signal `x = G diag(sqrt(c)) g` with `g` standard normal.
    pub fn draw_signal(&self, rng: &mut impl Rng) -> Vec<f64> {
        let m = self.dim();
        let g: Vec<f64> = (0..m)
            .map(|k| {
                let z: f64 = rng.sample(StandardNormal);
                self.half_power[k] * z
            })
            .collect();
        (0..m)
            .map(|i| (0..m).map(|k| self.frame[i * m + k] * g[k]).sum())
            .collect()
    }

    /// Coordinates of `w` in the principal frame, `G^T w`.
    pub fn rotate_to_principal(&self, w: &[f64]) -> Vec<f64> {
        let m = self.dim();
        debug_assert_eq!(w.len(), m);
        (0..m)
            .map(|k| (0..m).map(|i| self.frame[i * m + k] * w[i]).sum())
            .collect()
    }
}

/// Reproducible signal stream with deterministic fan-out for batch runs.
#[derive(Debug, Clone)]
pub struct SignalStream {
    rng: ChaCha8Rng,
    base_seed: u64,
}

impl SignalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            base_seed: seed,
        }
    }

    /// Independent stream for run `index`, derived from the base seed.
    pub fn derived(&self, index: u64) -> Self {
        Self::new(derive_seed(self.base_seed, index))
    }

    pub fn seed(&self) -> u64 {
        self.base_seed
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// How the coupling vector is updated after each signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRule {
    /// Hebbian step followed by explicit renormalization:
    /// `w <- (w + eta y x) / |w + eta y x|` with `y = w . x`.
    Normalized,
    /// The same update expanded to first order in `eta`:
    /// `w <- w + eta (y x - y^2 w)`. Keeps the norm only approximately.
    Truncated,
}

/// One update of the coupling vector under `rule`.
pub fn oja_step(rule: UpdateRule, w: &[f64], x: &[f64], eta: f64) -> Result<Vec<f64>> {
    debug_assert_eq!(w.len(), x.len());
    let y = sphere::dot(w, x);
    match rule {
        UpdateRule::Normalized => {
            let moved: Vec<f64> = w.iter().zip(x).map(|(wi, xi)| wi + eta * y * xi).collect();
            let n = sphere::norm(&moved);
            if n <= tol::DEGENERATE_NORM {
                return Err(Error::DegenerateUpdate(n));
            }
            Ok(moved.into_iter().map(|v| v / n).collect())
        }
        UpdateRule::Truncated => Ok(w
            .iter()
            .zip(x)
            .map(|(wi, xi)| wi + eta * (y * xi - y * y * wi))
            .collect()),
    }
}

/// Settings of one learning run.
#[derive(Debug, Clone)]
pub struct LearningConfig {
    pub rule: UpdateRule,
    /// Learning rate. One step advances rescaled time by `eta`.
    pub eta: f64,
    /// Number of signal presentations.
    pub steps: usize,
    /// Record every `sample_stride`-th step plus both endpoints, matching
    /// the sampling rule of the flow integrators.
    pub sample_stride: usize,
    pub seed: u64,
}

impl LearningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::BadSetting(format!(
                "learning rate must be positive and finite, got {}",
                self.eta
            )));
        }
        if self.steps == 0 {
            return Err(Error::BadSetting(
                "learning needs at least one step".to_string(),
            ));
        }
        if self.sample_stride == 0 {
            return Err(Error::BadSetting(
                "sample stride must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Sampled path of one learning run.
#[derive(Debug, Clone)]
pub struct LearningTrajectory {
    /// Rescaled times `eta * step`.
    pub times: Vec<f64>,
    /// Step indices of the samples.
    pub steps: Vec<usize>,
    /// Coupling vectors at the samples.
    pub couplings: Vec<Vec<f64>>,
    /// The same couplings rotated to the principal frame, `G^T w`.
    pub rotated: Vec<Vec<f64>>,
    pub seed: u64,
}

/// Runs one stochastic learning pass from `w0`.
pub fn run_learning(
    model: &CorrelationModel,
    w0: &SphereState,
    config: &LearningConfig,
) -> Result<LearningTrajectory> {
    config.validate()?;
    if w0.dim() != model.dim() {
        return Err(Error::DimMismatch(w0.dim(), model.dim()));
    }
    let mut stream = SignalStream::new(config.seed);
    let mut w = w0.coords().to_vec();
    let mut trajectory = LearningTrajectory {
        times: Vec::new(),
        steps: Vec::new(),
        couplings: Vec::new(),
        rotated: Vec::new(),
        seed: config.seed,
    };
    let mut record = |step: usize, w: &[f64]| {
        trajectory.times.push(step as f64 * config.eta);
        trajectory.steps.push(step);
        trajectory.couplings.push(w.to_vec());
        trajectory.rotated.push(model.rotate_to_principal(w));
    };
    record(0, &w);
    for step in 1..=config.steps {
        let x = model.draw_signal(stream.rng());
        w = oja_step(config.rule, &w, &x, config.eta)?;
        if step % config.sample_stride == 0 || step == config.steps {
            record(step, &w);
        }
    }
    Ok(trajectory)
}

/// Mean learning path against the averaged flow, at matched sample times.
#[derive(Debug, Clone)]
pub struct BridgeReport {
    pub times: Vec<f64>,
    /// Mean of the principal-frame couplings over the batch.
    pub mean_rotated: Vec<Vec<f64>>,
    /// Averaged-flow reference at the same times.
    pub reference: Vec<Vec<f64>>,
    /// Euclidean distance between mean and reference per sample.
    pub deviations: Vec<f64>,
    pub sup_deviation: f64,
    pub runs: usize,
}

/// Averages `runs` independent learning passes (seeds derived from
/// `config.seed`) and compares the mean principal-frame path with the
/// sphere flow integrated at step size `eta`, so samples align one-to-one.
pub fn bridge_comparison(
    model: &CorrelationModel,
    w0: &SphereState,
    config: &LearningConfig,
    runs: usize,
) -> Result<BridgeReport> {
    config.validate()?;
    if runs == 0 {
        return Err(Error::BadSetting(
            "the bridge needs at least one run".to_string(),
        ));
    }

    let rotated_start = SphereState::normalized(model.rotate_to_principal(w0.coords()))?;
    let flow_config = IntegratorConfig {
        method: Method::Rk4,
        dt: config.eta,
        t_max: config.eta * config.steps as f64,
        renormalize: false,
        sample_stride: config.sample_stride,
    };
    let reference = integrate_sphere(&rotated_start, model.spectrum(), &flow_config)?;

    // Runs are independent, so they fan out across worker threads. Each
    // run lands in its own slot and the accumulation below walks the slots
    // in run order, keeping the result independent of scheduling.
    let base = SignalStream::new(config.seed);
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(runs);
    let chunk_size = runs.div_ceil(workers);
    let mut paths: Vec<Option<Result<Vec<Vec<f64>>>>> = (0..runs).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (worker, chunk) in paths.chunks_mut(chunk_size).enumerate() {
            let base = &base;
            scope.spawn(move || {
                for (offset, slot) in chunk.iter_mut().enumerate() {
                    let run = worker * chunk_size + offset;
                    let mut run_config = config.clone();
                    run_config.seed = base.derived(run as u64).seed();
                    *slot = Some(run_learning(model, w0, &run_config).map(|path| path.rotated));
                }
            });
        }
    });

    let mut mean: Vec<Vec<f64>> = Vec::new();
    for slot in paths {
        let rotated = slot.expect("every run slot is filled")?;
        if mean.is_empty() {
            mean = vec![vec![0.0; model.dim()]; rotated.len()];
        }
        for (acc, sample) in mean.iter_mut().zip(&rotated) {
            for (a, v) in acc.iter_mut().zip(sample) {
                *a += v;
            }
        }
    }
    for sample in &mut mean {
        for a in sample.iter_mut() {
            *a /= runs as f64;
        }
    }

    debug_assert_eq!(mean.len(), reference.states.len());
    let mut deviations = Vec::with_capacity(mean.len());
    let mut sup = 0.0_f64;
    for (avg, reference_state) in mean.iter().zip(&reference.states) {
        let dev = avg
            .iter()
            .zip(reference_state)
            .map(|(a, r)| (a - r) * (a - r))
            .sum::<f64>()
            .sqrt();
        sup = sup.max(dev);
        deviations.push(dev);
    }
    Ok(BridgeReport {
        times: reference.times.clone(),
        mean_rotated: mean,
        reference: reference.states.clone(),
        deviations,
        sup_deviation: sup,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation_model(angle: f64, c: Vec<f64>) -> CorrelationModel {
        let (s, cs) = angle.sin_cos();
        CorrelationModel::new(Spectrum::new(c).unwrap(), vec![cs, -s, s, cs]).unwrap()
    }

    #[test]
    fn normalized_step_on_a_hand_example() {
        // w = e1, x = (1, 1), eta = 0.1: y = 1, so the moved vector is
        // (1.1, 0.1) and the step divides by sqrt(1.22).
        let w = vec![1.0, 0.0];
        let x = vec![1.0, 1.0];
        let next = oja_step(UpdateRule::Normalized, &w, &x, 0.1).unwrap();
        let scale = 1.22_f64.sqrt();
        assert!((next[0] - 1.1 / scale).abs() < 1e-15);
        assert!((next[1] - 0.1 / scale).abs() < 1e-15);
    }

    #[test]
    fn truncated_step_on_a_hand_example() {
        let w = vec![1.0, 0.0];
        let x = vec![1.0, 1.0];
        let next = oja_step(UpdateRule::Truncated, &w, &x, 0.1).unwrap();
        assert!((next[0] - 1.0).abs() < 1e-15);
        assert!((next[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn normalized_rule_pins_the_norm_over_a_long_run() {
        let model = CorrelationModel::axis_aligned(Spectrum::new(vec![2.0, 1.0]).unwrap()).unwrap();
        let mut stream = SignalStream::new(17);
        let mut w = vec![0.6, 0.8];
        for _ in 0..1_000_000 {
            let x = model.draw_signal(stream.rng());
            w = oja_step(UpdateRule::Normalized, &w, &x, 1e-3).unwrap();
        }
        assert!((sphere::norm(&w) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rules_differ_at_second_order_in_the_rate() {
        // From a common state and signal, the gap between one normalized
        // step and one truncated step is O(eta^2): halving eta divides the
        // gap by about four.
        let model = CorrelationModel::axis_aligned(Spectrum::new(vec![2.0, 1.0]).unwrap()).unwrap();
        let mut stream = SignalStream::new(4242);
        for _ in 0..10 {
            let w = {
                let raw = model.draw_signal(stream.rng());
                let n = sphere::norm(&raw);
                raw.into_iter().map(|v| v / n).collect::<Vec<f64>>()
            };
            let x = model.draw_signal(stream.rng());
            let gap = |eta: f64| -> f64 {
                let a = oja_step(UpdateRule::Normalized, &w, &x, eta).unwrap();
                let b = oja_step(UpdateRule::Truncated, &w, &x, eta).unwrap();
                a.iter()
                    .zip(&b)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt()
            };
            let ratio = gap(0.02) / gap(0.01);
            assert!(
                (3.0..5.0).contains(&ratio),
                "second-order gap ratio out of range: {ratio}"
            );
        }
    }

    #[test]
    fn sample_covariance_matches_the_axis_aligned_model() {
        let model = CorrelationModel::axis_aligned(Spectrum::new(vec![2.0, 1.0]).unwrap()).unwrap();
        let mut stream = SignalStream::new(7);
        let n = 1_000_000_usize;
        let mut sums = [0.0_f64; 3]; // xx, yy, xy
        for _ in 0..n {
            let x = model.draw_signal(stream.rng());
            sums[0] += x[0] * x[0];
            sums[1] += x[1] * x[1];
            sums[2] += x[0] * x[1];
        }
        let n = n as f64;
        // Standard errors of the moment estimators: var(x^2) = 2 c^2 for a
        // centered Gaussian, var(x y) = c1 c2 for independent components.
        let se_xx = (2.0 * 4.0 / n).sqrt();
        let se_yy = (2.0 * 1.0 / n).sqrt();
        let se_xy = (2.0 / n).sqrt();
        assert!((sums[0] / n - 2.0).abs() < 3.0 * se_xx);
        assert!((sums[1] / n - 1.0).abs() < 3.0 * se_yy);
        assert!((sums[2] / n).abs() < 3.0 * se_xy);
    }

    #[test]
    fn rotated_model_shows_the_rotated_covariance() {
        let model = rotation_model(0.3, vec![2.0, 1.0]);
        let mut stream = SignalStream::new(13);
        let n = 200_000_usize;
        let mut sums = [0.0_f64; 3];
        for _ in 0..n {
            let x = model.draw_signal(stream.rng());
            sums[0] += x[0] * x[0];
            sums[1] += x[1] * x[1];
            sums[2] += x[0] * x[1];
        }
        let n = n as f64;
        let expected = [
            model.correlation_entry(0, 0),
            model.correlation_entry(1, 1),
            model.correlation_entry(0, 1),
        ];
        let se = |i: usize, j: usize| -> f64 {
            let cii = model.correlation_entry(i, i);
            let cjj = model.correlation_entry(j, j);
            let cij = model.correlation_entry(i, j);
            ((cii * cjj + cij * cij) / n).sqrt()
        };
        assert!((sums[0] / n - expected[0]).abs() < 3.0 * se(0, 0));
        assert!((sums[1] / n - expected[1]).abs() < 3.0 * se(1, 1));
        assert!((sums[2] / n - expected[2]).abs() < 3.0 * se(0, 1));
    }

    #[test]
    fn model_rejects_skewed_frames_and_negative_intensities() {
        let spectrum = Spectrum::new(vec![2.0, 1.0]).unwrap();
        let skewed = CorrelationModel::new(spectrum.clone(), vec![1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(skewed, Err(Error::NotOrthogonal(_))));
        let negative = CorrelationModel::axis_aligned(Spectrum::new(vec![2.0, -1.0]).unwrap());
        assert!(matches!(negative, Err(Error::BadSetting(_))));
    }

    #[test]
    fn learning_runs_are_reproducible_and_fan_out() {
        let model = CorrelationModel::axis_aligned(Spectrum::new(vec![2.0, 1.0]).unwrap()).unwrap();
        let w0 = SphereState::normalized(vec![1.0, 1.0]).unwrap();
        let config = LearningConfig {
            rule: UpdateRule::Normalized,
            eta: 1e-2,
            steps: 100,
            sample_stride: 10,
            seed: 99,
        };
        let a = run_learning(&model, &w0, &config).unwrap();
        let b = run_learning(&model, &w0, &config).unwrap();
        assert_eq!(a.couplings, b.couplings);

        let mut other = config.clone();
        other.seed = SignalStream::new(99).derived(1).seed();
        let c = run_learning(&model, &w0, &other).unwrap();
        assert_ne!(a.couplings.last(), c.couplings.last());
    }

    #[test]
    fn rotation_to_principal_frame_matches_the_direct_product() {
        let model = rotation_model(0.5, vec![2.0, 1.0]);
        let w = vec![0.3, -0.9];
        let rotated = model.rotate_to_principal(&w);
        let g = model.frame();
        let by_hand = [g[0] * w[0] + g[2] * w[1], g[1] * w[0] + g[3] * w[1]];
        assert!((rotated[0] - by_hand[0]).abs() < 1e-15);
        assert!((rotated[1] - by_hand[1]).abs() < 1e-15);
    }

    #[test]
    fn mean_learning_path_shadows_the_averaged_flow() {
        let model = rotation_model(0.4, vec![2.0, 1.0]);
        let w0 = SphereState::normalized(vec![1.0, 0.2]).unwrap();
        let config = LearningConfig {
            rule: UpdateRule::Normalized,
            eta: 2e-3,
            steps: 500,
            sample_stride: 50,
            seed: 2024,
        };
        let report = bridge_comparison(&model, &w0, &config, 200).unwrap();
        assert_eq!(report.times.len(), report.mean_rotated.len());
        assert!(
            report.sup_deviation < 0.05,
            "mean path strayed by {}",
            report.sup_deviation
        );
    }
}
