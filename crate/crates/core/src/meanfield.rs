//! Nonlinear equations of motion for the rescaled mean fields
//! `alpha = <a>/sqrt(N)` and `beta = <b>/sqrt(N)`.
//!
//! Integration works on the real vector `(alpha_r, beta_r, alpha_i, beta_i)`,
//! in which the flow is canonical with coordinates `(alpha_r, beta_r)` and
//! momenta `(alpha_i, beta_i)`.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{DickeError, Result};
use crate::ode::{self, IntegratorConfig, StepStats};
use crate::protocol::{DriveProtocol, Parameters};

/// Smallest admissible `Gamma = 1 - |beta|^2`.
pub const GAMMA_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanField {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl MeanField {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        Self { alpha, beta }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Coherent cavity amplitude `epsilon`, atoms in the ground state.
    pub fn coherent(epsilon: f64) -> Self {
        Self::new(Complex64::new(epsilon, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn gamma(&self) -> f64 {
        1.0 - self.beta.norm_sqr()
    }

    pub fn check(&self, t: f64) -> Result<f64> {
        let gamma = self.gamma();
        if gamma <= GAMMA_FLOOR || !gamma.is_finite() {
            return Err(DickeError::GammaNonPositive {
                t,
                beta_sq: self.beta.norm_sqr(),
            });
        }
        Ok(gamma)
    }

    pub fn to_state(&self) -> [f64; 4] {
        [self.alpha.re, self.beta.re, self.alpha.im, self.beta.im]
    }

    pub fn from_state(s: &[f64]) -> Self {
        Self::new(Complex64::new(s[0], s[2]), Complex64::new(s[1], s[3]))
    }

    /// `max(|alpha|, |beta|)`, the size of the initial displacement.
    pub fn delta(&self) -> f64 {
        self.alpha.norm().max(self.beta.norm())
    }
}

impl std::ops::Neg for MeanField {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.alpha, -self.beta)
    }
}

/// Time derivative of the real state `(alpha_r, beta_r, alpha_i, beta_i)`.
pub fn real_rhs(t: f64, s: &[f64; 4], p: &Parameters) -> Result<[f64; 4]> {
    let [ar, br, ai, bi] = *s;
    let gamma = 1.0 - br * br - bi * bi;
    if gamma <= GAMMA_FLOOR || !gamma.is_finite() {
        return Err(DickeError::GammaNonPositive {
            t,
            beta_sq: br * br + bi * bi,
        });
    }
    let sg = gamma.sqrt();
    let two_g = 2.0 * p.g;
    Ok([
        p.omega_a * ai,
        p.omega_b * bi - two_g * ar * br * bi / sg,
        -p.omega_a * ar - two_g * sg * br,
        -p.omega_b * br - two_g * sg * ar * (1.0 - br * br / gamma),
    ])
}

/// `(d alpha/dt, d beta/dt)` at time `t`.
pub fn mean_field_rhs(
    t: f64,
    mf: &MeanField,
    protocol: &DriveProtocol,
) -> Result<(Complex64, Complex64)> {
    let p = protocol.evaluate(t);
    let gamma = mf.check(t)?;
    let sg = gamma.sqrt();
    let minus_i = Complex64::new(0.0, -1.0);
    let ar = mf.alpha.re;
    let br = mf.beta.re;
    let d_alpha = minus_i * (p.omega_a * mf.alpha + 2.0 * p.g * sg * br);
    let d_beta =
        minus_i * (p.omega_b * mf.beta + 2.0 * p.g * sg * ar * (1.0 - mf.beta * br / gamma));
    Ok((d_alpha, d_beta))
}

/// Conserved energy function of the frozen-parameter flow.
pub fn classical_hamiltonian(mf: &MeanField, p: &Parameters) -> Result<f64> {
    let sg = mf.check(f64::NAN)?.sqrt();
    Ok(0.5 * p.omega_a * mf.alpha.norm_sqr()
        + 0.5 * p.omega_b * mf.beta.norm_sqr()
        + 2.0 * p.g * sg * mf.beta.re * mf.alpha.re)
}

/// Generator of the linearized flow around `alpha = beta = 0`, acting on
/// `(alpha_r, beta_r, alpha_i, beta_i)`.
pub fn linearized_m0(p: &Parameters) -> Matrix4<f64> {
    let (wa, wb, g2) = (p.omega_a, p.omega_b, 2.0 * p.g);
    Matrix4::new(
        0.0, 0.0, wa, 0.0, //
        0.0, 0.0, 0.0, wb, //
        -wa, -g2, 0.0, 0.0, //
        -g2, -wb, 0.0, 0.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryStatus {
    Completed,
    /// Stopped because `|beta|` reached the guard; samples end before `t`.
    BetaBoundary {
        t: f64,
    },
}

#[derive(Debug, Clone)]
pub struct MeanFieldTrajectory {
    pub samples: Vec<(f64, MeanField)>,
    pub stats: StepStats,
    pub status: TrajectoryStatus,
}

impl MeanFieldTrajectory {
    pub fn max_abs_alpha(&self) -> f64 {
        self.samples
            .iter()
            .map(|(_, m)| m.alpha.norm())
            .fold(0.0, f64::max)
    }
}

/// Integrates the mean fields, recording the initial state and every entry
/// of `samples`.
pub fn integrate_mean_field(
    initial: MeanField,
    protocol: &DriveProtocol,
    samples: &[f64],
    config: &IntegratorConfig,
) -> Result<MeanFieldTrajectory> {
    initial.check(0.0)?;
    let mut out = Vec::with_capacity(samples.len() + 1);
    let outcome = ode::integrate(
        |t, s: &[f64; 4]| real_rhs(t, s, &protocol.evaluate(t)),
        0.0,
        initial.to_state(),
        samples,
        config,
        |t, s| out.push((t, MeanField::from_state(s))),
    );
    let status = match outcome.stop {
        None => TrajectoryStatus::Completed,
        Some(DickeError::GammaNonPositive { t, .. }) => TrajectoryStatus::BetaBoundary { t },
        Some(e) => return Err(e),
    };
    Ok(MeanFieldTrajectory {
        samples: out,
        stats: outcome.stats,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::uniform_samples;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rhs_at_normal_point_vanishes() {
        let p = DriveProtocol::sinusoidal(1.0, 1.3, 0.2, 0.7, 0.9);
        let (da, db) = mean_field_rhs(0.4, &MeanField::zero(), &p).unwrap();
        assert_eq!(da, c(0.0, 0.0));
        assert_eq!(db, c(0.0, 0.0));
    }

    #[test]
    fn rhs_small_cavity_displacement() {
        let p = DriveProtocol::constant(1.0, 1.0, 0.5);
        let (da, db) = mean_field_rhs(0.0, &MeanField::coherent(1e-2), &p).unwrap();
        assert_abs_diff_eq!(da.re, 0.0);
        assert_abs_diff_eq!(da.im, -0.01, epsilon = 1e-16);
        assert_abs_diff_eq!(db.re, 0.0);
        assert_abs_diff_eq!(db.im, -0.01, epsilon = 1e-16);
    }

    #[test]
    fn complex_and_real_forms_agree() {
        let p = Parameters::new(1.1, 0.7, 0.45);
        let proto = DriveProtocol::constant(p.omega_a, p.omega_b, p.g);
        let mf = MeanField::new(c(0.2, -0.3), c(-0.4, 0.25));
        let (da, db) = mean_field_rhs(0.0, &mf, &proto).unwrap();
        let r = real_rhs(0.0, &mf.to_state(), &p).unwrap();
        assert_abs_diff_eq!(da.re, r[0], epsilon = 1e-15);
        assert_abs_diff_eq!(db.re, r[1], epsilon = 1e-15);
        assert_abs_diff_eq!(da.im, r[2], epsilon = 1e-15);
        assert_abs_diff_eq!(db.im, r[3], epsilon = 1e-15);
    }

    #[test]
    fn super_radiant_points_are_fixed() {
        let p = Parameters::new(1.0, 1.0, 1.0 / 2f64.sqrt());
        for sp in p.stationary_points() {
            let r = real_rhs(0.0, &MeanField::new(sp.alpha, sp.beta).to_state(), &p).unwrap();
            assert!(r.iter().all(|v| v.abs() < 1e-12), "{:?}: {r:?}", sp.kind);
        }
    }

    #[test]
    fn rhs_rejects_beta_on_the_boundary() {
        let p = Parameters::new(1.0, 1.0, 0.5);
        let s = MeanField::new(c(0.0, 0.0), c(0.6, 0.8)).to_state();
        assert!(matches!(
            real_rhs(1.0, &s, &p),
            Err(DickeError::GammaNonPositive { .. })
        ));
    }

    #[test]
    fn hamiltonian_values() {
        let p = Parameters::new(1.0, 1.0, 0.5);
        assert_eq!(classical_hamiltonian(&MeanField::zero(), &p).unwrap(), 0.0);
        assert_abs_diff_eq!(
            classical_hamiltonian(&MeanField::coherent(0.01), &p).unwrap(),
            5e-5,
            epsilon = 1e-18
        );
    }

    #[test]
    fn hamiltonian_generates_the_flow() {
        // canonical equations checked against central differences of H
        let p = Parameters::new(1.0, 0.8, 0.6);
        let s = [0.3, -0.2, 0.1, 0.35];
        let h = |v: [f64; 4]| classical_hamiltonian(&MeanField::from_state(&v), &p).unwrap();
        let grad = |i: usize| {
            let eps = 1e-6;
            let mut up = s;
            let mut dn = s;
            up[i] += eps;
            dn[i] -= eps;
            (h(up) - h(dn)) / (2.0 * eps)
        };
        let r = real_rhs(0.0, &s, &p).unwrap();
        assert_abs_diff_eq!(r[0], grad(2), epsilon = 1e-8);
        assert_abs_diff_eq!(r[1], grad(3), epsilon = 1e-8);
        assert_abs_diff_eq!(r[2], -grad(0), epsilon = 1e-8);
        assert_abs_diff_eq!(r[3], -grad(1), epsilon = 1e-8);
    }

    #[test]
    fn m0_spectra() {
        let eig = |p: Parameters| linearized_m0(&p).complex_eigenvalues();
        let free = eig(Parameters::new(1.0, 2.0, 0.0));
        let mut ims: Vec<f64> = free.iter().map(|z| z.im.abs()).collect();
        ims.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(ims[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ims[3], 2.0, epsilon = 1e-12);
        assert!(free.iter().all(|z| z.re.abs() < 1e-12));

        let critical = eig(Parameters::new(1.0, 1.0, 0.5));
        assert!(critical.iter().any(|z| z.norm() < 1e-6));

        let sr = eig(Parameters::new(1.0, 1.0, 0.6));
        let max_re = sr.iter().map(|z| z.re).fold(f64::MIN, f64::max);
        assert_abs_diff_eq!(max_re, 0.2f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn zero_initial_state_stays_zero() {
        let p = DriveProtocol::sinusoidal(1.0, 1.0, 0.5, 0.3, 0.7);
        let traj = integrate_mean_field(
            MeanField::zero(),
            &p,
            &uniform_samples(50.0, 50),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(traj.status, TrajectoryStatus::Completed);
        assert!(traj.samples.iter().all(|(_, m)| *m == MeanField::zero()));
    }

    #[test]
    fn invalid_initial_state_is_rejected() {
        let p = DriveProtocol::constant(1.0, 1.0, 0.5);
        let bad = MeanField::new(c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(
            integrate_mean_field(bad, &p, &[1.0], &IntegratorConfig::default()),
            Err(DickeError::GammaNonPositive { .. })
        ));
    }
}
