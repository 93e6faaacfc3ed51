//! Floquet analysis of the linearized dynamics around the normal point:
//! monodromy matrices, multipliers and exponents, the instability rate, the
//! static closed form, finite-`N` validity times and stability diagrams.

use std::f64::consts::PI;

use nalgebra::Schur;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{DickeError, Result};
use crate::fluctuations::{linear_propagator, Mat4};
use crate::ode::IntegratorConfig;
use crate::protocol::{DriveProtocol, Parameters};

/// Real parts of Floquet exponents above this value count as unstable.
pub const POSITIVE_RATE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetResult {
    pub period: f64,
    pub monodromy: Mat4,
    pub multipliers: [Complex64; 4],
    /// `ln(rho) / T` on the principal branch. Imaginary parts are only
    /// defined modulo `2 pi / T`.
    pub exponents: [Complex64; 4],
    /// Largest real part among the exponents (may be slightly negative or
    /// positive from round-off in stable cases).
    pub max_real_exponent: f64,
    pub gamma_star: f64,
}

impl FloquetResult {
    pub fn from_monodromy(monodromy: Mat4, period: f64) -> Self {
        let multipliers = multipliers(&monodromy);
        let exponents = multipliers.map(|rho| rho.ln() / period);
        let max_real_exponent = exponents
            .iter()
            .map(|nu| nu.re)
            .fold(f64::NEG_INFINITY, f64::max);
        let gamma_star = if max_real_exponent > POSITIVE_RATE_THRESHOLD {
            max_real_exponent
        } else {
            0.0
        };
        Self {
            period,
            monodromy,
            multipliers,
            exponents,
            max_real_exponent,
            gamma_star,
        }
    }

    pub fn is_unstable(&self) -> bool {
        self.gamma_star > 0.0
    }

    /// Largest `|det(monodromy) - 1|`-style check, relative to the scale
    /// of the matrix.
    pub fn det_defect(&self) -> f64 {
        (self.monodromy.determinant() - 1.0).abs()
    }

    /// For each multiplier, distance of `1/rho` to the nearest other
    /// multiplier, relative to `max(1, |1/rho|)`; the worst case is returned.
    pub fn reciprocity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, rho) in self.multipliers.iter().enumerate() {
            let inv = rho.inv();
            let best = self
                .multipliers
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, other)| (other - inv).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best / inv.norm().max(1.0));
        }
        worst
    }
}

/// Eigenvalues of a 4x4 real matrix. The matrix is rescaled before the
/// Schur iteration so that strongly unstable monodromies stay well scaled.
pub fn multipliers(m: &Mat4) -> [Complex64; 4] {
    let scale = m.amax();
    if scale == 0.0 || !scale.is_finite() {
        return [Complex64::new(0.0, 0.0); 4];
    }
    match Schur::try_new(m / scale, f64::EPSILON, 10_000) {
        Some(schur) => {
            let ev = schur.complex_eigenvalues();
            [ev[0] * scale, ev[1] * scale, ev[2] * scale, ev[3] * scale]
        }
        None => symplectic_multipliers(m),
    }
}

/// Multipliers of a 4x4 symplectic matrix from its palindromic
/// characteristic polynomial `x^4 - a x^3 + b x^2 - a x + 1`: the sums
/// `rho + 1/rho` solve `s^2 - a s + (b - 2) = 0`.
pub fn symplectic_multipliers(m: &Mat4) -> [Complex64; 4] {
    let a = m.trace();
    let mut b = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            b += m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)];
        }
    }
    let c = Complex64::new(b - 2.0, 0.0);
    let disc = Complex64::new(a * a, 0.0) - 4.0 * c;
    let root = disc.sqrt();
    // numerically stable quadratic roots
    let q = if a >= 0.0 {
        -0.5 * (-a - root)
    } else {
        -0.5 * (-a + root)
    };
    let s1 = q;
    let s2 = if q.norm() > 0.0 {
        c / q
    } else {
        Complex64::new(0.0, 0.0)
    };
    let split = |s: Complex64| {
        let r = (s * s - 4.0).sqrt();
        let big = if (s + r).norm() >= (s - r).norm() {
            (s + r) * 0.5
        } else {
            (s - r) * 0.5
        };
        [big, big.inv()]
    };
    let [r1, r2] = split(s1);
    let [r3, r4] = split(s2);
    [r1, r2, r3, r4]
}

/// Fundamental matrix of the linearized dynamics over one drive period.
pub fn monodromy(protocol: &DriveProtocol, config: &IntegratorConfig) -> Result<Mat4> {
    let period = protocol.period().ok_or_else(|| DickeError::NotPeriodic {
        eta: protocol.as_sinusoidal().map_or(f64::NAN, |d| d.eta),
    })?;
    linear_propagator(protocol, 0.0, period, config)
}

/// Monodromy plus its spectral analysis.
pub fn floquet(protocol: &DriveProtocol, config: &IntegratorConfig) -> Result<FloquetResult> {
    let m = monodromy(protocol, config)?;
    let period = protocol.period().expect("period checked by monodromy");
    Ok(FloquetResult::from_monodromy(m, period))
}

pub fn instability_rate(result: &FloquetResult) -> f64 {
    result.gamma_star
}

/// Closed-form instability rate of the undriven linearization: zero in the
/// normal phase, `sqrt(sqrt(((wa^2 - wb^2)/2)^2 + 4 wa wb g^2) - (wa^2 + wb^2)/2)`
/// otherwise.
pub fn gamma_star_static(p: &Parameters) -> f64 {
    let (wa, wb, g) = (p.omega_a, p.omega_b, p.g);
    let half_diff = 0.5 * (wa * wa - wb * wb);
    let inner = (half_diff * half_diff + 4.0 * wa * wb * g * g).sqrt() - 0.5 * (wa * wa + wb * wb);
    if inner > 0.0 {
        inner.sqrt()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `delta >> N^-1/2`: the linear transient ends before the expansion fails.
    MeanFieldDominated,
    /// `delta <~ N^-1/2`: validity is lost inside the linear transient.
    FluctuationDominated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityTimes {
    pub tau_star: f64,
    pub t_lin: f64,
    pub t_max: f64,
    pub regime: Regime,
}

/// Characteristic time `1/gamma*`, end of the linear transient
/// `tau* ln(1/delta)` and validity horizon `(tau*/2) ln N`.
pub fn validity_times(gamma_star: f64, delta: f64, n_atoms: f64) -> Result<ValidityTimes> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(DickeError::InvalidArgument(format!(
            "initial displacement delta = {delta} must lie in (0, 1)"
        )));
    }
    if !(n_atoms >= 1.0) {
        return Err(DickeError::InvalidArgument(format!(
            "N = {n_atoms} must be >= 1"
        )));
    }
    if gamma_star < 0.0 || gamma_star.is_nan() {
        return Err(DickeError::InvalidArgument(format!(
            "gamma* = {gamma_star}"
        )));
    }
    let regime = if delta * n_atoms.sqrt() > 1.0 {
        Regime::MeanFieldDominated
    } else {
        Regime::FluctuationDominated
    };
    if gamma_star == 0.0 {
        return Ok(ValidityTimes {
            tau_star: f64::INFINITY,
            t_lin: f64::INFINITY,
            t_max: f64::INFINITY,
            regime,
        });
    }
    let tau_star = 1.0 / gamma_star;
    Ok(ValidityTimes {
        tau_star,
        t_lin: tau_star * (1.0 / delta).ln(),
        t_max: 0.5 * tau_star * n_atoms.ln(),
        regime,
    })
}

/// Quantity laid out along a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    /// Drive frequency `eta`.
    Eta,
    /// `eta / omega_a`.
    EtaOverOmegaA,
    /// Coupling `g`.
    G,
    /// `g / omega_a`.
    GOverOmegaA,
    /// `2 g / eta`.
    TwoGOverEta,
}

impl AxisKind {
    pub fn name(&self) -> &'static str {
        match self {
            AxisKind::Eta => "eta",
            AxisKind::EtaOverOmegaA => "eta/omega_a",
            AxisKind::G => "g",
            AxisKind::GOverOmegaA => "g/omega_a",
            AxisKind::TwoGOverEta => "2g/eta",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "eta" => Some(AxisKind::Eta),
            "eta/omega_a" => Some(AxisKind::EtaOverOmegaA),
            "g" => Some(AxisKind::G),
            "g/omega_a" => Some(AxisKind::GOverOmegaA),
            "2g/eta" => Some(AxisKind::TwoGOverEta),
            _ => None,
        }
    }

    fn is_frequency(&self) -> bool {
        matches!(self, AxisKind::Eta | AxisKind::EtaOverOmegaA)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub kind: AxisKind,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(kind: AxisKind, min: f64, max: f64, points: usize) -> Self {
        Self {
            kind,
            min,
            max,
            points,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.points <= 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.points - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }
}

/// Drive frequency axis times coupling axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub frequency: Axis,
    pub coupling: Axis,
}

impl GridSpec {
    /// 160 x 160 cells over `eta/omega_a in [0.05, 2.5]` and
    /// `g/omega_a in [0, 1]`.
    pub fn fig1_default() -> Self {
        Self {
            frequency: Axis::new(AxisKind::EtaOverOmegaA, 0.05, 2.5, 160),
            coupling: Axis::new(AxisKind::GOverOmegaA, 0.0, 1.0, 160),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.frequency.kind.is_frequency() {
            return Err(DickeError::InvalidArgument(format!(
                "first sweep axis must be a drive frequency, got {}",
                self.frequency.kind.name()
            )));
        }
        if self.coupling.kind.is_frequency() {
            return Err(DickeError::InvalidArgument(format!(
                "second sweep axis must be a coupling, got {}",
                self.coupling.kind.name()
            )));
        }
        for axis in [&self.frequency, &self.coupling] {
            if axis.points == 0 || !axis.min.is_finite() || !axis.max.is_finite() {
                return Err(DickeError::InvalidArgument(format!(
                    "malformed axis {}",
                    axis.kind.name()
                )));
            }
        }
        let eta_lo = self.frequency.min.min(self.frequency.max);
        if eta_lo <= 0.0 {
            return Err(DickeError::InvalidArgument(
                "drive frequency must be positive on the whole grid".into(),
            ));
        }
        if self.coupling.min.min(self.coupling.max) < 0.0 {
            return Err(DickeError::InvalidArgument(
                "coupling axis must be >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frequency.points * self.coupling.points
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Fixed parameters of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepTemplate {
    pub omega_a: f64,
    pub lambda0: f64,
    pub lambda: f64,
}

impl SweepTemplate {
    /// `(eta, g)` for grid indices `(i, j)`.
    pub fn cell_parameters(&self, spec: &GridSpec, i: usize, j: usize) -> (f64, f64) {
        let x = spec.frequency.value(i);
        let eta = match spec.frequency.kind {
            AxisKind::EtaOverOmegaA => x * self.omega_a,
            _ => x,
        };
        let y = spec.coupling.value(j);
        let g = match spec.coupling.kind {
            AxisKind::GOverOmegaA => y * self.omega_a,
            AxisKind::TwoGOverEta => 0.5 * y * eta,
            _ => y,
        };
        (eta, g)
    }

    pub fn protocol(&self, eta: f64, g: f64) -> DriveProtocol {
        DriveProtocol::sinusoidal(self.omega_a, self.lambda0, self.lambda, eta, g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Stable,
    Unstable,
    /// Largest real exponent within a decade of the positivity threshold.
    Marginal,
    Failed,
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Stable => "stable",
            CellStatus::Unstable => "unstable",
            CellStatus::Marginal => "marginal",
            CellStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub eta: f64,
    pub g: f64,
    /// `NaN` for failed cells.
    pub gamma_star: f64,
    pub max_real_exponent: f64,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityGrid {
    pub spec: GridSpec,
    pub template: SweepTemplate,
    /// Frequency index outer, coupling index inner.
    pub cells: Vec<Cell>,
}

impl StabilityGrid {
    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.spec.coupling.points + j]
    }

    pub fn failed(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.status == CellStatus::Failed)
            .count()
    }
}

/// Floquet analysis of a single sweep cell.
pub fn analyse_cell(template: &SweepTemplate, eta: f64, g: f64, config: &IntegratorConfig) -> Cell {
    let protocol = template.protocol(eta, g);
    match floquet(&protocol, config) {
        Ok(res) if res.max_real_exponent.is_finite() => {
            let m = res.max_real_exponent;
            let status =
                if m > POSITIVE_RATE_THRESHOLD / 10.0 && m <= 10.0 * POSITIVE_RATE_THRESHOLD {
                    CellStatus::Marginal
                } else if res.is_unstable() {
                    CellStatus::Unstable
                } else {
                    CellStatus::Stable
                };
            Cell {
                eta,
                g,
                gamma_star: res.gamma_star,
                max_real_exponent: m,
                status,
            }
        }
        _ => Cell {
            eta,
            g,
            gamma_star: f64::NAN,
            max_real_exponent: f64::NAN,
            status: CellStatus::Failed,
        },
    }
}

/// Instability rate over a two-parameter grid. Cells are independent and
/// collected by index, so the result does not depend on `workers`.
pub fn stability_sweep(
    spec: &GridSpec,
    template: &SweepTemplate,
    config: &IntegratorConfig,
    workers: usize,
) -> Result<StabilityGrid> {
    spec.validate()?;
    let ny = spec.coupling.points;
    let run = || -> Vec<Cell> {
        (0..spec.len())
            .into_par_iter()
            .map(|k| {
                let (eta, g) = template.cell_parameters(spec, k / ny, k % ny);
                analyse_cell(template, eta, g, config)
            })
            .collect()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| DickeError::InvalidArgument(format!("worker pool: {e}")))?;
    let cells = pool.install(run);
    Ok(StabilityGrid {
        spec: *spec,
        template: *template,
        cells,
    })
}

/// Couplings of the reference curves of the stability diagram at drive
/// amplitude `lambda`: `mu0 = 1`, `mu_min = 1` and `mu_max = 1`.
pub fn reference_couplings(template: &SweepTemplate) -> [(&'static str, f64); 3] {
    let base = template.omega_a * template.lambda0.sqrt() / 2.0;
    let r = template.lambda / template.lambda0;
    [
        ("mu0=1", base),
        ("mu_min=1", base * (1.0 - r).max(0.0).sqrt()),
        ("mu_max=1", base * (1.0 + r).sqrt()),
    ]
}

/// Sum-resonance frequencies `omega_a (1 + lambda0) / k` for `k = 1..=k_max`.
pub fn resonance_frequencies(template: &SweepTemplate, k_max: usize) -> Vec<f64> {
    (1..=k_max)
        .map(|k| template.omega_a * (1.0 + template.lambda0) / k as f64)
        .collect()
}

/// Drive period for frequency `eta`.
pub fn period_of(eta: f64) -> f64 {
    2.0 * PI / eta
}
