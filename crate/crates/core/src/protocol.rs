//! Model parameters, drive protocols and the quantities derived from them
//! (the control parameter `mu`, its excursion under driving, and the static
//! stationary points of the mean-field flow).
//!
//! Conventions: `hbar = 1`; all frequencies are angular frequencies in the
//! same (arbitrary) unit, conventionally that of `omega_a`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{DickeError, Result};

/// Instantaneous model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    /// Cavity frequency.
    pub omega_a: f64,
    /// Atomic level splitting.
    pub omega_b: f64,
    /// Collective coupling.
    pub g: f64,
}

impl Parameters {
    pub fn new(omega_a: f64, omega_b: f64, g: f64) -> Self {
        Self {
            omega_a,
            omega_b,
            g,
        }
    }

    /// `mu = omega_a * omega_b / (4 g^2)`; the normal phase is `mu > 1`.
    pub fn mu(&self) -> Result<f64> {
        if self.g == 0.0 {
            return Err(DickeError::ZeroCoupling { t: f64::NAN });
        }
        Ok(self.omega_a * self.omega_b / (4.0 * self.g * self.g))
    }

    /// Stationary points of the mean-field equations for frozen parameters.
    ///
    /// The normal point is always first. For `mu < 1` the two symmetry-broken
    /// points follow; at `mu == 1` they merge into the normal one and are not
    /// reported separately.
    pub fn stationary_points(&self) -> Vec<StationaryPoint> {
        let mut points = vec![StationaryPoint::normal()];
        let mu = match self.mu() {
            Ok(mu) => mu,
            Err(_) => return points,
        };
        if mu < 1.0 {
            let alpha = (self.g / self.omega_a) * (1.0 - mu * mu).sqrt();
            let beta = ((1.0 - mu) / 2.0).sqrt();
            points.push(StationaryPoint {
                alpha: Complex64::new(alpha, 0.0),
                beta: Complex64::new(-beta, 0.0),
                kind: PointKind::SuperRadiantPlus,
            });
            points.push(StationaryPoint {
                alpha: Complex64::new(-alpha, 0.0),
                beta: Complex64::new(beta, 0.0),
                kind: PointKind::SuperRadiantMinus,
            });
        }
        points
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    Normal,
    SuperRadiantPlus,
    SuperRadiantMinus,
}

/// A fixed point `(alpha, beta)` of the frozen-parameter mean-field flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub kind: PointKind,
}

impl StationaryPoint {
    pub fn normal() -> Self {
        Self {
            alpha: Complex64::new(0.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
            kind: PointKind::Normal,
        }
    }
}

/// Atomic frequency modulated as `omega_b(t) = omega_a (lambda0 + lambda sin(eta t))`
/// with constant cavity frequency and coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidalDrive {
    pub omega_a: f64,
    pub lambda0: f64,
    pub lambda: f64,
    pub eta: f64,
    pub g: f64,
}

/// Range of `mu(t)` over a cycle of the sinusoidal drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuSummary {
    pub mu0: f64,
    pub mu_min: f64,
    pub mu_max: f64,
}

impl SinusoidalDrive {
    pub fn omega_b(&self, t: f64) -> f64 {
        self.omega_a * (self.lambda0 + self.lambda * (self.eta * t).sin())
    }

    pub fn mu_summary(&self) -> MuSummary {
        let mu0 = self.lambda0 * self.omega_a * self.omega_a / (4.0 * self.g * self.g);
        let ratio = self.lambda / self.lambda0;
        MuSummary {
            mu0,
            mu_min: mu0 * (1.0 - ratio),
            mu_max: mu0 * (1.0 + ratio),
        }
    }

    /// Drive amplitude at which `mu` just touches 1 during the cycle.
    ///
    /// Solving `mu0 (1 + (lambda / lambda0) s) = 1` for the drive amplitude
    /// at `s = 1` gives `lambda_c = lambda0 (1/mu0 - 1)`; the super-radiant
    /// window is where `sin(eta t) < lambda_c / lambda`.
    pub fn lambda_c(&self) -> f64 {
        self.lambda0 * (1.0 / self.mu_summary().mu0 - 1.0)
    }
}

type ParamFn = dyn Fn(f64) -> Parameters + Send + Sync;

/// Arbitrary user-supplied time dependence of all three parameters.
#[derive(Clone)]
pub struct GeneralDrive {
    params: Arc<ParamFn>,
    period: Option<f64>,
}

impl GeneralDrive {
    /// `period` must be supplied for Floquet analysis; `None` marks an
    /// aperiodic protocol.
    pub fn new<F>(params: F, period: Option<f64>) -> Self
    where
        F: Fn(f64) -> Parameters + Send + Sync + 'static,
    {
        Self {
            params: Arc::new(params),
            period,
        }
    }
}

impl fmt::Debug for GeneralDrive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralDrive")
            .field("period", &self.period)
            .finish_non_exhaustive()
    }
}

/// Time dependence of `(omega_a, omega_b, g)`.
#[derive(Debug, Clone)]
pub enum DriveProtocol {
    Sinusoidal(SinusoidalDrive),
    General(GeneralDrive),
}

impl DriveProtocol {
    pub fn sinusoidal(omega_a: f64, lambda0: f64, lambda: f64, eta: f64, g: f64) -> Self {
        DriveProtocol::Sinusoidal(SinusoidalDrive {
            omega_a,
            lambda0,
            lambda,
            eta,
            g,
        })
    }

    /// Time-independent parameters. `eta` is kept at 1 so that a nominal
    /// period exists for monodromy computations.
    pub fn constant(omega_a: f64, omega_b: f64, g: f64) -> Self {
        Self::sinusoidal(omega_a, omega_b / omega_a, 0.0, 1.0, g)
    }

    /// Constant parameters analysed over an explicit nominal period.
    pub fn constant_with_period(omega_a: f64, omega_b: f64, g: f64, period: f64) -> Self {
        Self::sinusoidal(omega_a, omega_b / omega_a, 0.0, 2.0 * PI / period, g)
    }

    pub fn general<F>(params: F, period: Option<f64>) -> Self
    where
        F: Fn(f64) -> Parameters + Send + Sync + 'static,
    {
        DriveProtocol::General(GeneralDrive::new(params, period))
    }

    pub fn evaluate(&self, t: f64) -> Parameters {
        match self {
            DriveProtocol::Sinusoidal(d) => Parameters {
                omega_a: d.omega_a,
                omega_b: d.omega_b(t),
                g: d.g,
            },
            DriveProtocol::General(d) => (d.params)(t),
        }
    }

    pub fn mu(&self, t: f64) -> Result<f64> {
        self.evaluate(t)
            .mu()
            .map_err(|_| DickeError::ZeroCoupling { t })
    }

    /// Drive period, if the protocol is periodic.
    pub fn period(&self) -> Option<f64> {
        match self {
            DriveProtocol::Sinusoidal(d) if d.eta > 0.0 => Some(2.0 * PI / d.eta),
            DriveProtocol::Sinusoidal(_) => None,
            DriveProtocol::General(d) => d.period,
        }
    }

    pub fn as_sinusoidal(&self) -> Option<&SinusoidalDrive> {
        match self {
            DriveProtocol::Sinusoidal(d) => Some(d),
            DriveProtocol::General(_) => None,
        }
    }

    /// Non-fatal remarks about the parameter choice.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let DriveProtocol::Sinusoidal(d) = self {
            if d.lambda > d.lambda0 {
                out.push(format!(
                    "drive amplitude lambda = {} exceeds lambda0 = {}: omega_b(t) changes sign during the cycle",
                    d.lambda, d.lambda0
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sinusoidal_evaluation() {
        let p = DriveProtocol::sinusoidal(1.0, 1.0, 0.5, 0.1, 0.5);
        assert_eq!(p.evaluate(0.0).omega_b, 1.0);
        assert_abs_diff_eq!(p.evaluate(5.0 * PI).omega_b, 1.5, epsilon = 1e-15);
        let s = DriveProtocol::constant(2.0, 3.0, 0.5);
        for t in [0.0, 0.3, 17.0] {
            assert_abs_diff_eq!(s.evaluate(t).omega_b, 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn mu_values() {
        assert_eq!(Parameters::new(1.0, 1.0, 0.5).mu().unwrap(), 1.0);
        let half = Parameters::new(1.0, 1.0, 1.0 / 2f64.sqrt()).mu().unwrap();
        assert_abs_diff_eq!(half, 0.5, epsilon = 1e-15);

        let eta = 1.0;
        let p = DriveProtocol::sinusoidal(11.0 * eta, 1.0, 0.5, eta, 12.5 * eta / 2.0);
        assert_abs_diff_eq!(
            p.mu(0.0).unwrap(),
            (11.0f64 / 12.5).powi(2),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(p.mu(0.0).unwrap(), 0.7744, epsilon = 1e-12);
    }

    #[test]
    fn zero_coupling_is_an_error() {
        let p = DriveProtocol::constant(1.0, 1.0, 0.0);
        assert!(matches!(p.mu(2.0), Err(DickeError::ZeroCoupling { t }) if t == 2.0));
    }

    #[test]
    fn stationary_points_by_phase() {
        let normal = Parameters::new(1.0, 1.0, 0.4).stationary_points();
        assert_eq!(normal.len(), 1);
        assert_eq!(normal[0].kind, PointKind::Normal);

        let critical = Parameters::new(1.0, 1.0, 0.5).stationary_points();
        assert_eq!(critical.len(), 1);

        let sr = Parameters::new(1.0, 1.0, 1.0 / 2f64.sqrt()).stationary_points();
        assert_eq!(sr.len(), 3);
        let plus = sr[1];
        assert_eq!(plus.kind, PointKind::SuperRadiantPlus);
        assert_abs_diff_eq!(plus.alpha.re, 0.612_372_435_695_794_5, epsilon = 1e-12);
        assert_abs_diff_eq!(plus.beta.re, -0.5, epsilon = 1e-12);
        assert_eq!(sr[2].alpha, -plus.alpha);
        assert_eq!(sr[2].beta, -plus.beta);
    }

    #[test]
    fn mu_summary_brackets_mu() {
        let d = SinusoidalDrive {
            omega_a: 1.0,
            lambda0: 1.0,
            lambda: 0.5,
            eta: 0.3,
            g: 0.55,
        };
        let s = d.mu_summary();
        assert!(s.mu_min <= s.mu0 && s.mu0 <= s.mu_max);
        let p = DriveProtocol::Sinusoidal(d);
        let period = p.period().unwrap();
        for k in 0..=2000 {
            let mu = p.mu(period * k as f64 / 2000.0).unwrap();
            assert!(mu >= s.mu_min - 1e-14 && mu <= s.mu_max + 1e-14);
        }
    }

    #[test]
    fn overdriven_protocol_warns() {
        assert!(DriveProtocol::sinusoidal(1.0, 1.0, 1.5, 0.1, 0.5)
            .warnings()
            .iter()
            .any(|w| w.contains("changes sign")));
        assert!(DriveProtocol::sinusoidal(1.0, 1.0, 0.5, 0.1, 0.5)
            .warnings()
            .is_empty());
    }

    #[test]
    fn general_protocol_is_evaluated() {
        let p = DriveProtocol::general(
            |t| Parameters::new(1.0 + t, 2.0, 0.5 * (1.0 + t)),
            Some(3.0),
        );
        let at = p.evaluate(1.0);
        assert_eq!(at, Parameters::new(2.0, 2.0, 1.0));
        assert_eq!(p.period(), Some(3.0));
        assert_abs_diff_eq!(p.mu(1.0).unwrap(), 1.0, epsilon = 1e-15);
    }
}
