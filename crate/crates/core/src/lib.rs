//! Simulation engine for the periodically driven Dicke model in the
//! thermodynamic limit.
//!
//! The state of `N` two-level atoms coupled to a cavity mode is described
//! by macroscopic mean fields `(alpha, beta)` plus Gaussian fluctuations
//! around them. The crate integrates both, classifies the stability of the
//! driven linearization through Floquet theory, and evaluates photon
//! statistics, work, inner friction and two-mode squeezing.
//!
//! | module | contents |
//! |---|---|
//! | [`protocol`] | parameters, drive protocols, `mu(t)`, stationary points |
//! | [`meanfield`] | nonlinear mean-field flow and its energy function |
//! | [`fluctuations`] | fluctuation kernel, fundamental matrix, covariances |
//! | [`floquet`] | monodromy, instability rate, validity times, sweeps |
//! | [`observables`] | photon number, Mandel parameter, work, squeezing |
//! | [`ode`] | Runge-Kutta integrators shared by the above |

pub mod error;
pub mod floquet;
pub mod fluctuations;
pub mod meanfield;
pub mod observables;
pub mod ode;
pub mod protocol;

pub use error::{DickeError, Result};
pub use floquet::{
    floquet, gamma_star_static, instability_rate, monodromy, stability_sweep, validity_times, Axis,
    AxisKind, CellStatus, FloquetResult, GridSpec, StabilityGrid, SweepTemplate, ValidityTimes,
};
pub use fluctuations::{
    build_m, integrate_joint, symplectic_defect, validity_monitor, FluctuationState, JointSample,
    JointTrajectory, Mat4, Validity,
};
pub use meanfield::{
    classical_hamiltonian, integrate_mean_field, linearized_m0, mean_field_rhs, MeanField,
    MeanFieldTrajectory, TrajectoryStatus,
};
pub use observables::{ObservablesRecord, SqueezeFit};
pub use ode::{IntegratorConfig, Method, StepStats};
pub use protocol::{DriveProtocol, MuSummary, Parameters, PointKind, StationaryPoint};

pub use num_complex::Complex64;
