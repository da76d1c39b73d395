//! Experiment execution: dispatch a validated config, evaluate the
//! experiment's checks, and emit machine-readable output.
//!
//! Output files are deterministic given the config: floats are written
//! with the shortest round-trip formatting, map keys are ordered, and all
//! randomness flows from the config seed. The JSON report additionally
//! carries the measured wall time, which is the one field excluded from
//! that guarantee; CSV output never includes it.

use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, ExperimentKind, OutputFormat};
use crate::error::Error;
use crate::flow::{
    conjugacy_run, integrate_density, integrate_sphere, ConjugacyReport, Trajectory,
};
use crate::hermitian::HermitianMatrix;
use crate::oja::{bridge_comparison, BridgeReport};
use crate::verify::{all_passed, run_property_suite, CheckResult};

/// What a finished (or failed) run reports back.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub experiment: ExperimentKind,
    /// Echo of the driving config.
    pub config: ExperimentConfig,
    /// Measured wall time; informational only, not deterministic.
    pub wall_time_s: f64,
    pub final_time: f64,
    /// True when the density flow stopped at the positivity floor.
    pub truncated: bool,
    /// Scalar summary of the run (max drifts, sup deviations, ...).
    pub summary: BTreeMap<String, f64>,
    pub final_state: Value,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
    /// Present when the run aborted before producing a trajectory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

/// Failures around a run, as opposed to failed checks inside one.
#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error("could not write `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

struct Prepared {
    summary: BTreeMap<String, f64>,
    final_state: Value,
    final_time: f64,
    truncated: bool,
    checks: Vec<CheckResult>,
    file_body: Option<FileBody>,
}

enum FileBody {
    Csv(String),
    Trajectory(Value),
}

/// Runs one experiment end to end: integrate or learn, evaluate checks,
/// and write the output file if the config (or CLI override baked into
/// it) names one. Library errors become a failed report rather than an
/// `Err`; only file-system problems surface as [`RunnerError`].
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport, RunnerError> {
    let started = Instant::now();
    let outcome = dispatch(config);
    let mut report = match outcome {
        Ok(prepared) => RunReport {
            experiment: config.experiment,
            config: config.clone(),
            wall_time_s: 0.0,
            final_time: prepared.final_time,
            truncated: prepared.truncated,
            summary: prepared.summary,
            final_state: prepared.final_state,
            passed: all_passed(&prepared.checks),
            checks: prepared.checks,
            error: None,
            output_path: config.output_path.clone(),
        },
        Err(error) => RunReport {
            experiment: config.experiment,
            config: config.clone(),
            wall_time_s: 0.0,
            final_time: 0.0,
            truncated: false,
            summary: BTreeMap::new(),
            final_state: Value::Null,
            checks: vec![CheckResult::new("run_completed", f64::INFINITY, 0.0)],
            passed: false,
            error: Some(error.to_string()),
            output_path: config.output_path.clone(),
        },
    };

    if let Some(path) = &config.output_path {
        let format = config.output_format.unwrap_or(OutputFormat::Csv);
        let body = render_output(config, &report, format);
        fs::write(path, body).map_err(|source| RunnerError::Io {
            path: path.clone(),
            source,
        })?;
    }
    report.wall_time_s = started.elapsed().as_secs_f64();
    Ok(report)
}

/// The file body for the chosen format. CSV carries the trajectory alone;
/// JSON carries the report and the trajectory together.
fn render_output(config: &ExperimentConfig, report: &RunReport, format: OutputFormat) -> String {
    // Re-run the (deterministic) experiment body for the trajectory data:
    // the report keeps only summaries, and runs are cheap enough that this
    // beats threading large payloads through every layer.
    match format {
        OutputFormat::Csv => match dispatch(config) {
            Ok(Prepared {
                file_body: Some(FileBody::Csv(csv)),
                ..
            }) => csv,
            _ => String::new(),
        },
        OutputFormat::Json => {
            let trajectory = match dispatch(config) {
                Ok(Prepared {
                    file_body: Some(FileBody::Trajectory(value)),
                    ..
                }) => value,
                _ => Value::Null,
            };
            let document = json!({ "report": report, "trajectory": trajectory });
            let mut text = serde_json::to_string_pretty(&document).expect("report serializes");
            text.push('\n');
            text
        }
    }
}

fn dispatch(config: &ExperimentConfig) -> Result<Prepared, Error> {
    match config.experiment {
        ExperimentKind::SphereFlow => run_sphere_flow(config),
        ExperimentKind::QisFlow => run_qis_flow(config),
        ExperimentKind::Conjugacy => run_conjugacy(config),
        ExperimentKind::OjaCompare => run_oja_compare(config),
        ExperimentKind::PropertySuite => run_suite(config),
    }
}

fn is_flat(c: &[f64]) -> bool {
    c.iter().all(|&x| x == c[0])
}

fn max_abs_diagnostic<S>(trajectory: &Trajectory<S>, key: &str) -> f64 {
    trajectory
        .diagnostics
        .iter()
        .map(|d| d[key].abs())
        .fold(0.0, f64::max)
}

fn max_potential_rise<S>(trajectory: &Trajectory<S>) -> f64 {
    let mut worst = 0.0_f64;
    for pair in trajectory.diagnostics.windows(2) {
        worst = worst.max(pair[1]["potential"] - pair[0]["potential"]);
    }
    worst.max(0.0)
}

fn run_sphere_flow(config: &ExperimentConfig) -> Result<Prepared, Error> {
    let c = config.spectrum()?;
    let w0 = config.sphere_start()?;
    let trajectory = integrate_sphere(&w0, &c, &config.integrator_config())?;

    let norm_drift = max_abs_diagnostic(&trajectory, "norm_err");
    let potential_rise = max_potential_rise(&trajectory);
    let mut checks = vec![
        CheckResult::new(
            "norm_drift",
            norm_drift,
            config.threshold("norm_drift", 1e-8),
        ),
        CheckResult::new(
            "potential_descent",
            potential_rise,
            config.threshold("potential_descent", 1e-10),
        ),
    ];
    let mut summary = BTreeMap::new();
    summary.insert("max_norm_err".to_string(), norm_drift);
    summary.insert("max_potential_rise".to_string(), potential_rise);
    summary.insert(
        "final_potential".to_string(),
        trajectory.diagnostics.last().unwrap()["potential"],
    );
    if is_flat(config.c.as_slice()) {
        let drift = trajectory
            .final_state()
            .iter()
            .zip(w0.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        checks.push(CheckResult::new(
            "stationarity",
            drift,
            config.threshold("stationarity", 1e-12),
        ));
        summary.insert("stationary_drift".to_string(), drift);
    }

    Ok(Prepared {
        final_time: trajectory.final_time(),
        truncated: false,
        final_state: json!(trajectory.final_state()),
        file_body: Some(sphere_file_body(config, &trajectory)),
        summary,
        checks,
    })
}

fn run_qis_flow(config: &ExperimentConfig) -> Result<Prepared, Error> {
    let c = config.spectrum()?;
    let rho0 = config.density_start()?;
    let trajectory = integrate_density(&rho0, &c, &config.integrator_config())?;

    let trace_drift = max_abs_diagnostic(&trajectory, "trace_err");
    let herm_residual = max_abs_diagnostic(&trajectory, "herm_err");
    let potential_rise = max_potential_rise(&trajectory);
    let mut checks = vec![
        CheckResult::new(
            "trace_drift",
            trace_drift,
            config.threshold("trace_drift", 1e-8),
        ),
        CheckResult::new(
            "hermiticity_residual",
            herm_residual,
            config.threshold("hermiticity_residual", 1e-10),
        ),
        CheckResult::new(
            "potential_descent",
            potential_rise,
            config.threshold("potential_descent", 1e-10),
        ),
    ];
    let mut summary = BTreeMap::new();
    summary.insert("max_trace_err".to_string(), trace_drift);
    summary.insert("max_herm_err".to_string(), herm_residual);
    summary.insert("max_potential_rise".to_string(), potential_rise);
    summary.insert(
        "min_eigenvalue".to_string(),
        trajectory
            .diagnostics
            .iter()
            .map(|d| d["min_eig"])
            .fold(f64::INFINITY, f64::min),
    );
    if is_flat(config.c.as_slice()) {
        let drift = trajectory
            .final_state()
            .as_matrix()
            .max_abs_diff(rho0.as_matrix());
        checks.push(CheckResult::new(
            "stationarity",
            drift,
            config.threshold("stationarity", 1e-12),
        ));
        summary.insert("stationary_drift".to_string(), drift);
    }

    Ok(Prepared {
        final_time: trajectory.final_time(),
        truncated: trajectory.is_truncated(),
        final_state: matrix_pairs(trajectory.final_state()),
        file_body: Some(qis_file_body(config, &trajectory)),
        summary,
        checks,
    })
}

fn run_conjugacy(config: &ExperimentConfig) -> Result<Prepared, Error> {
    let c = config.spectrum()?;
    let w0 = config.sphere_start()?;
    let report = conjugacy_run(&w0, &c, &config.integrator_config())?;

    let checks = vec![CheckResult::new(
        "conjugacy_sup",
        report.sup_deviation,
        config.threshold("conjugacy_sup", 1e-7),
    )];
    let mut summary = BTreeMap::new();
    summary.insert("sup_deviation".to_string(), report.sup_deviation);
    summary.insert("samples".to_string(), report.times.len() as f64);

    Ok(Prepared {
        final_time: *report.times.last().unwrap_or(&0.0),
        truncated: report.truncated,
        final_state: json!({
            "sphere_squares": report.sphere_squares.last(),
            "density_diagonal": report.density_diagonals.last(),
        }),
        file_body: Some(conjugacy_file_body(config, &report)),
        summary,
        checks,
    })
}

fn run_oja_compare(config: &ExperimentConfig) -> Result<Prepared, Error> {
    let model = config.correlation_model()?;
    let w0 = config.sphere_start()?;
    let learning = config.learning_config();
    let report = bridge_comparison(&model, &w0, &learning, config.runs())?;

    let checks = vec![CheckResult::new(
        "bridge_mean_deviation",
        report.sup_deviation,
        config.threshold("bridge_mean_deviation", 0.05),
    )];
    let mut summary = BTreeMap::new();
    summary.insert("sup_deviation".to_string(), report.sup_deviation);
    summary.insert("runs".to_string(), report.runs as f64);
    summary.insert("steps".to_string(), learning.steps as f64);
    summary.insert("eta".to_string(), learning.eta);

    Ok(Prepared {
        final_time: *report.times.last().unwrap_or(&0.0),
        truncated: false,
        final_state: json!({
            "mean_rotated": report.mean_rotated.last(),
            "reference": report.reference.last(),
        }),
        file_body: Some(oja_file_body(config, &report)),
        summary,
        checks,
    })
}

fn run_suite(config: &ExperimentConfig) -> Result<Prepared, Error> {
    let checks: Vec<CheckResult> = run_property_suite()
        .into_iter()
        .map(|check| {
            let threshold = config.threshold(&check.name, check.threshold);
            check.with_threshold(threshold)
        })
        .collect();
    let mut summary = BTreeMap::new();
    summary.insert("checks".to_string(), checks.len() as f64);
    summary.insert(
        "failures".to_string(),
        checks.iter().filter(|c| !c.passed).count() as f64,
    );
    Ok(Prepared {
        final_time: 0.0,
        truncated: false,
        final_state: Value::Null,
        file_body: Some(suite_file_body(&checks)),
        summary,
        checks,
    })
}

/// Upper-triangle row-major full matrix as `[re, im]` pairs.
fn matrix_pairs(matrix: &HermitianMatrix) -> Value {
    let m = matrix.dim();
    let mut pairs = Vec::with_capacity(m * m);
    for j in 0..m {
        for k in 0..m {
            let z = matrix.get(j, k);
            pairs.push(json!([z.re, z.im]));
        }
    }
    Value::Array(pairs)
}

fn push_float(row: &mut String, value: f64) {
    if !row.is_empty() {
        row.push(',');
    }
    row.push_str(&format!("{value}"));
}

fn sphere_file_body(config: &ExperimentConfig, trajectory: &Trajectory<Vec<f64>>) -> FileBody {
    match config.output_format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let m = config.m;
            let mut out = String::from("t");
            for i in 1..=m {
                out.push_str(&format!(",w{i}"));
            }
            out.push_str(",norm_err,potential\n");
            for i in 0..trajectory.len() {
                let mut row = String::new();
                push_float(&mut row, trajectory.times[i]);
                for &x in &trajectory.states[i] {
                    push_float(&mut row, x);
                }
                push_float(&mut row, trajectory.diagnostics[i]["norm_err"]);
                push_float(&mut row, trajectory.diagnostics[i]["potential"]);
                out.push_str(&row);
                out.push('\n');
            }
            FileBody::Csv(out)
        }
        OutputFormat::Json => FileBody::Trajectory(json!({
            "times": trajectory.times,
            "states": trajectory.states,
            "diagnostics": trajectory.diagnostics,
        })),
    }
}

fn qis_file_body(config: &ExperimentConfig, trajectory: &Trajectory<HermitianMatrix>) -> FileBody {
    match config.output_format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let m = config.m;
            let mut out = String::from("t");
            for j in 1..=m {
                for k in j..=m {
                    out.push_str(&format!(",re_rho_{j}{k},im_rho_{j}{k}"));
                }
            }
            out.push_str(",trace_err,min_eig,potential\n");
            for i in 0..trajectory.len() {
                let mut row = String::new();
                push_float(&mut row, trajectory.times[i]);
                let state = &trajectory.states[i];
                for j in 0..m {
                    for k in j..m {
                        let z = state.get(j, k);
                        push_float(&mut row, z.re);
                        push_float(&mut row, z.im);
                    }
                }
                let diag = &trajectory.diagnostics[i];
                push_float(&mut row, diag["trace_err"]);
                push_float(&mut row, diag["min_eig"]);
                push_float(&mut row, diag["potential"]);
                out.push_str(&row);
                out.push('\n');
            }
            FileBody::Csv(out)
        }
        OutputFormat::Json => FileBody::Trajectory(json!({
            "times": trajectory.times,
            "states": trajectory
                .states
                .iter()
                .map(matrix_pairs)
                .collect::<Vec<Value>>(),
            "diagnostics": trajectory.diagnostics,
        })),
    }
}

fn conjugacy_file_body(config: &ExperimentConfig, report: &ConjugacyReport) -> FileBody {
    match config.output_format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let m = config.m;
            let mut out = String::from("t");
            for i in 1..=m {
                out.push_str(&format!(",theta_sphere_{i}"));
            }
            for i in 1..=m {
                out.push_str(&format!(",theta_qis_{i}"));
            }
            out.push_str(",frobenius_dev\n");
            for i in 0..report.times.len() {
                let mut row = String::new();
                push_float(&mut row, report.times[i]);
                for &x in &report.sphere_squares[i] {
                    push_float(&mut row, x);
                }
                for &x in &report.density_diagonals[i] {
                    push_float(&mut row, x);
                }
                push_float(&mut row, report.deviations[i]);
                out.push_str(&row);
                out.push('\n');
            }
            FileBody::Csv(out)
        }
        OutputFormat::Json => FileBody::Trajectory(json!({
            "times": report.times,
            "sphere_squares": report.sphere_squares,
            "density_diagonals": report.density_diagonals,
            "deviations": report.deviations,
            "sup_deviation": report.sup_deviation,
            "truncated": report.truncated,
        })),
    }
}

fn oja_file_body(config: &ExperimentConfig, report: &BridgeReport) -> FileBody {
    match config.output_format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let m = config.m;
            let mut out = String::from("t");
            for i in 1..=m {
                out.push_str(&format!(",mean_w{i}"));
            }
            for i in 1..=m {
                out.push_str(&format!(",ref_w{i}"));
            }
            out.push_str(",deviation\n");
            for i in 0..report.times.len() {
                let mut row = String::new();
                push_float(&mut row, report.times[i]);
                for &x in &report.mean_rotated[i] {
                    push_float(&mut row, x);
                }
                for &x in &report.reference[i] {
                    push_float(&mut row, x);
                }
                push_float(&mut row, report.deviations[i]);
                out.push_str(&row);
                out.push('\n');
            }
            FileBody::Csv(out)
        }
        OutputFormat::Json => FileBody::Trajectory(json!({
            "times": report.times,
            "mean_rotated": report.mean_rotated,
            "reference": report.reference,
            "deviations": report.deviations,
            "sup_deviation": report.sup_deviation,
            "runs": report.runs,
        })),
    }
}

fn suite_file_body(checks: &[CheckResult]) -> FileBody {
    let mut out = String::from("name,value,threshold,result\n");
    for check in checks {
        out.push_str(&format!(
            "{},{},{},{}\n",
            check.name,
            check.value,
            check.threshold,
            if check.passed { "pass" } else { "fail" }
        ));
    }
    FileBody::Csv(out)
}
