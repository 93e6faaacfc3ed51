//! Gaussian quantum fluctuations around the mean fields.
//!
//! Quadratures are ordered `(q_c, q_d, p_c, p_d)` with `q = (k + k^dag)/sqrt 2`
//! and `p = i (k^dag - k)/sqrt 2`, so the vacuum covariance is `I/2` and the
//! symplectic form is `J = [[0, I], [-I, 0]]`. The fundamental matrix `Phi`
//! is integrated together with the mean fields; covariances are rebuilt as
//! `W(t) = Phi W(0) Phi^T`.

use nalgebra::{Matrix4, SMatrix, SymmetricEigen};

use crate::error::{DickeError, Result};
use crate::meanfield::{self, MeanField, TrajectoryStatus};
use crate::ode::{self, IntegratorConfig, StepStats};
use crate::protocol::{DriveProtocol, Parameters};

pub type Mat4 = Matrix4<f64>;

/// Symplectic form in `(q_c, q_d, p_c, p_d)` ordering.
pub fn symplectic_form() -> Mat4 {
    Mat4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    )
}

/// Two-mode vacuum covariance.
pub fn vacuum() -> Mat4 {
    Mat4::identity() * 0.5
}

/// Thermal state with `nbar` quanta in each mode.
pub fn thermal(nbar: f64) -> Mat4 {
    Mat4::identity() * (nbar + 0.5)
}

/// Generator of the quadrature dynamics, `dQ/dt = M Q`, for the
/// instantaneous mean fields.
pub fn build_m(mf: &MeanField, p: &Parameters) -> Result<Mat4> {
    let gamma = mf.check(f64::NAN)?;
    let s = gamma.sqrt();
    let (ar, br, bi) = (mf.alpha.re, mf.beta.re, mf.beta.im);
    let (wa, wb, g2) = (p.omega_a, p.omega_b, 2.0 * p.g);
    let cross = g2 * br * bi / s;
    let mix = g2 * s * (1.0 - br * br / gamma);
    let skew = g2 * ar * bi / s * (1.0 + br * br / gamma);
    let a_rr = g2 * ar * br / s;
    Ok(Mat4::new(
        0.0,
        0.0,
        wa,
        0.0, //
        -cross,
        -skew,
        0.0,
        wb - a_rr * (1.0 + bi * bi / gamma), //
        -wa,
        -mix,
        0.0,
        cross, //
        -mix,
        -wb + a_rr * (3.0 + br * br / gamma),
        0.0,
        skew,
    ))
}

/// `max_ij |Phi J Phi^T - J|_ij`.
pub fn symplectic_defect(phi: &Mat4) -> f64 {
    let j = symplectic_form();
    (phi * j * phi.transpose() - j).amax()
}

/// Smallest eigenvalue of the Hermitian matrix `W + (i/2) J`; a physical
/// covariance has it non-negative.
pub fn uncertainty_min_eigenvalue(w: &Mat4) -> f64 {
    // real embedding [[A, -B], [B, A]] of A + iB doubles every eigenvalue
    let b = symplectic_form() * 0.5;
    let mut big = SMatrix::<f64, 8, 8>::zeros();
    big.fixed_view_mut::<4, 4>(0, 0).copy_from(w);
    big.fixed_view_mut::<4, 4>(4, 4).copy_from(w);
    big.fixed_view_mut::<4, 4>(0, 4).copy_from(&(-b));
    big.fixed_view_mut::<4, 4>(4, 0).copy_from(&b);
    let sym = (big + big.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// Relative deviation of `det W` from the pure-state value `1/16`.
pub fn purity_defect(w: &Mat4) -> f64 {
    (w.determinant() - 1.0 / 16.0).abs() * 16.0
}

/// Purity defect of `W = Phi W0 Phi^T` evaluated as `det(Phi)^2 det(W0)`.
/// Forming `W` first squares the condition number of `Phi`, so the direct
/// determinant loses about `cond(Phi)^2 * eps` relative accuracy.
pub fn propagated_purity_defect(phi: &Mat4, w0: &Mat4) -> f64 {
    let d = phi.determinant();
    (d * d * w0.determinant() - 1.0 / 16.0).abs() * 16.0
}

/// Checks that `w` is a symmetric covariance satisfying the uncertainty
/// relation (to `tol`).
pub fn check_covariance(w: &Mat4, tol: f64) -> Result<()> {
    if w.iter().any(|v| !v.is_finite()) {
        return Err(DickeError::InvalidArgument(
            "covariance has non-finite entries".into(),
        ));
    }
    let asym = (w - w.transpose()).amax();
    if asym > tol * w.amax().max(1.0) {
        return Err(DickeError::InvalidArgument(format!(
            "covariance is not symmetric (max asymmetry {asym:e})"
        )));
    }
    let min_eig = uncertainty_min_eigenvalue(w);
    if min_eig < -tol {
        return Err(DickeError::InvalidArgument(format!(
            "covariance violates the uncertainty relation (min eigenvalue of W + iJ/2 = {min_eig:e})"
        )));
    }
    Ok(())
}

/// Whether the `1/N` expansion is still trustworthy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Validity {
    Valid,
    /// `max |Phi_ij|` first reached `sqrt(N)` at the recorded sample time.
    Exceeded {
        t_max_observed: f64,
    },
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// Tracks the first sample at which `max_ij |Phi_ij| >= sqrt(N)`.
#[derive(Debug, Clone, Copy)]
pub struct ValidityMonitor {
    threshold: f64,
    state: Validity,
}

impl ValidityMonitor {
    pub fn new(n_atoms: f64) -> Self {
        Self {
            threshold: n_atoms.max(1.0).sqrt(),
            state: Validity::Valid,
        }
    }

    pub fn observe(&mut self, t: f64, phi: &Mat4) -> Validity {
        if self.state.is_valid() && phi.amax() >= self.threshold {
            self.state = Validity::Exceeded { t_max_observed: t };
        }
        self.state
    }

    pub fn state(&self) -> Validity {
        self.state
    }
}

/// Single-matrix form of the validity check.
pub fn validity_monitor(phi: &Mat4, n_atoms: f64, t: f64) -> Validity {
    ValidityMonitor::new(n_atoms).observe(t, phi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationState {
    pub t: f64,
    pub phi: Mat4,
    pub w: Mat4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSample {
    pub t: f64,
    pub mean_field: MeanField,
    pub fluct: FluctuationState,
}

#[derive(Debug, Clone)]
pub struct JointTrajectory {
    pub samples: Vec<JointSample>,
    pub stats: StepStats,
    pub status: TrajectoryStatus,
    /// Initial covariance the samples were propagated from.
    pub w0: Mat4,
}

impl JointTrajectory {
    pub fn max_symplectic_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| symplectic_defect(&s.fluct.phi))
            .fold(0.0, f64::max)
    }

    pub fn max_purity_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| propagated_purity_defect(&s.fluct.phi, &self.w0))
            .fold(0.0, f64::max)
    }

    pub fn max_phi(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.fluct.phi.amax())
            .fold(0.0, f64::max)
    }

    /// Validity flag at each sample for a system of `n_atoms` atoms.
    pub fn validity(&self, n_atoms: f64) -> Vec<Validity> {
        let mut monitor = ValidityMonitor::new(n_atoms);
        self.samples
            .iter()
            .map(|s| monitor.observe(s.t, &s.fluct.phi))
            .collect()
    }
}

fn joint_rhs(t: f64, y: &[f64; 20], protocol: &DriveProtocol) -> Result<[f64; 20]> {
    let p = protocol.evaluate(t);
    let mut mf_state = [0.0; 4];
    mf_state.copy_from_slice(&y[..4]);
    let d_mf = meanfield::real_rhs(t, &mf_state, &p)?;
    let m = build_m(&MeanField::from_state(&mf_state), &p)?;
    let phi = Mat4::from_row_slice(&y[4..]);
    let d_phi = m * phi;
    let mut out = [0.0; 20];
    out[..4].copy_from_slice(&d_mf);
    for r in 0..4 {
        for c in 0..4 {
            out[4 + 4 * r + c] = d_phi[(r, c)];
        }
    }
    Ok(out)
}

/// Co-integrates mean fields and the fundamental matrix from `t = 0`.
pub fn integrate_joint(
    mf0: MeanField,
    w0: &Mat4,
    protocol: &DriveProtocol,
    samples: &[f64],
    config: &IntegratorConfig,
) -> Result<JointTrajectory> {
    integrate_joint_from(0.0, mf0, w0, protocol, samples, config)
}

/// As [`integrate_joint`] but starting at `t0` with `Phi(t0) = I`. Chaining
/// two legs composes the fundamental matrices as `Phi_2 Phi_1`.
pub fn integrate_joint_from(
    t0: f64,
    mf0: MeanField,
    w0: &Mat4,
    protocol: &DriveProtocol,
    samples: &[f64],
    config: &IntegratorConfig,
) -> Result<JointTrajectory> {
    mf0.check(t0)?;
    check_covariance(w0, 1e-9)?;
    let mut y0 = [0.0; 20];
    y0[..4].copy_from_slice(&mf0.to_state());
    for k in 0..4 {
        y0[4 + 5 * k] = 1.0;
    }
    let w0 = *w0;
    let mut out = Vec::with_capacity(samples.len() + 1);
    let outcome = ode::integrate(
        |t, y: &[f64; 20]| joint_rhs(t, y, protocol),
        t0,
        y0,
        samples,
        config,
        |t, y| {
            let phi = Mat4::from_row_slice(&y[4..]);
            out.push(JointSample {
                t,
                mean_field: MeanField::from_state(&y[..4]),
                fluct: FluctuationState {
                    t,
                    phi,
                    w: phi * w0 * phi.transpose(),
                },
            });
        },
    );
    let status = match outcome.stop {
        None => TrajectoryStatus::Completed,
        Some(DickeError::GammaNonPositive { t, .. }) => TrajectoryStatus::BetaBoundary { t },
        Some(e) => return Err(e),
    };
    Ok(JointTrajectory {
        samples: out,
        stats: outcome.stats,
        status,
        w0,
    })
}

/// Fundamental matrix of the linearized flow (`Phi' = M0(t) Phi`) between
/// `t0` and `t1`.
pub fn linear_propagator(
    protocol: &DriveProtocol,
    t0: f64,
    t1: f64,
    config: &IntegratorConfig,
) -> Result<Mat4> {
    let mut y0 = [0.0; 16];
    for k in 0..4 {
        y0[5 * k] = 1.0;
    }
    let mut last = y0;
    ode::integrate(
        |t, y: &[f64; 16]| {
            let m = meanfield::linearized_m0(&protocol.evaluate(t));
            let phi = Mat4::from_row_slice(y);
            let d = m * phi;
            let mut out = [0.0; 16];
            for r in 0..4 {
                for c in 0..4 {
                    out[4 * r + c] = d[(r, c)];
                }
            }
            Ok(out)
        },
        t0,
        y0,
        &[t1],
        config,
        |_, y| last = *y,
    )
    .into_result()?;
    Ok(Mat4::from_row_slice(&last))
}
