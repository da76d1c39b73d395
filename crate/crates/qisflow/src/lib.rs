//! Gradient flows for principal-component learning, in two conjugate
//! pictures: the averaged Hebbian flow on the unit sphere, and its image
//! under the squaring immersion inside the manifold of regular density
//! matrices carrying the SLD Fisher metric. The crate bundles the matrix
//! kernel, both flows, the immersion linking them, a stochastic Oja
//! learning loop, fixed-step integrators with invariant monitoring, and
//! the `qisflow` command-line harness.

pub mod config;
pub mod density;
pub mod error;
pub mod flow;
pub mod hermitian;
pub mod immersion;
pub mod oja;
pub mod runner;
pub mod seed;
pub mod sphere;
pub mod tol;
pub mod verify;

pub use config::{parse_config, ConfigError, ExperimentConfig, ExperimentKind, OutputFormat};
pub use density::{DensityMatrix, DiagonalDensity, TangentMatrix, TracePotential};
pub use error::{Error, Result};
pub use flow::{BoundaryHit, ConjugacyReport, IntegratorConfig, Method, Trajectory};
pub use hermitian::{Complex64, ComplexMatrix, EigenDecomposition, HermitianMatrix};
pub use immersion::SignVector;
pub use oja::{BridgeReport, CorrelationModel, LearningConfig, LearningTrajectory, UpdateRule};
pub use runner::{run_experiment, RunReport, RunnerError};
pub use sphere::{Spectrum, SphereState, SphereTangent};
pub use verify::CheckResult;
