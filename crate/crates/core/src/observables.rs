//! Physical observables built from the mean fields, the covariance matrix
//! and the atom number: photon number and statistics, energy and work,
//! inner friction, ground-state energy and the optimal two-mode squeezing.

use std::f64::consts::PI;

use crate::error::{DickeError, Result};
use crate::fluctuations::{build_m, symplectic_form, JointSample, Mat4, Validity};
use crate::meanfield::MeanField;
use crate::protocol::{DriveProtocol, Parameters};

/// Mean photon number `N |alpha|^2 + (W11 + W33 - 1)/2`.
pub fn photon_number(mf: &MeanField, w: &Mat4, n_atoms: f64) -> f64 {
    n_atoms * mf.alpha.norm_sqr() + 0.5 * (w[(0, 0)] + w[(2, 2)] - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonStatistics {
    /// Leading-order (`O(N)`) photon-number variance.
    pub sigma2: f64,
    /// Mandel parameter `sigma2 / n_a`.
    pub rho: f64,
    /// `N -> infinity` limit of the Mandel parameter.
    pub rho_infinity: f64,
    /// False when `N |alpha|^2` does not dominate the fluctuation photons by
    /// at least a factor 10; the values are then outside their regime.
    pub mean_field_dominated: bool,
}

pub fn photon_variance_and_mandel(mf: &MeanField, w: &Mat4, n_atoms: f64) -> PhotonStatistics {
    let (ar, ai) = (mf.alpha.re, mf.alpha.im);
    let quad = ar * ar * w[(0, 0)] + ai * ai * w[(2, 2)] + 2.0 * ar * ai * w[(0, 2)];
    let sigma2 = 2.0 * n_atoms * quad;
    let n_a = photon_number(mf, w, n_atoms);
    let fluct = 0.5 * (w[(0, 0)] + w[(2, 2)]);
    PhotonStatistics {
        sigma2,
        rho: sigma2 / n_a,
        rho_infinity: 2.0 * quad / mf.alpha.norm_sqr(),
        mean_field_dominated: n_atoms * mf.alpha.norm_sqr() >= 10.0 * fluct,
    }
}

/// The c-number part of the expanded Hamiltonian.
pub fn lambda_n(mf: &MeanField, p: &Parameters, n_atoms: f64) -> Result<f64> {
    let gamma = mf.check(f64::NAN)?;
    let sg = gamma.sqrt();
    let (ar, br) = (mf.alpha.re, mf.beta.re);
    let b2 = mf.beta.norm_sqr();
    Ok(n_atoms
        * (p.omega_a * mf.alpha.norm_sqr() + p.omega_b * (b2 - 0.5) + 4.0 * p.g * sg * ar * br)
        - p.g * ar * br * b2 / (2.0 * sg))
}

/// Symmetric matrix `H` of the quadratic fluctuation Hamiltonian written as
/// `Q^T H Q / 2` in symmetric ordering; the dynamics is `dQ/dt = J H Q`.
pub fn quadratic_form(mf: &MeanField, p: &Parameters) -> Result<Mat4> {
    let m = build_m(mf, p)?;
    let h = -(symplectic_form() * m);
    Ok((h + h.transpose()) * 0.5)
}

/// `<H>` for a Gaussian state with mean fields `mf` and covariance `w`.
///
/// The quadratic part is normal ordered, so its expectation is
/// `tr(H (W - I/2)) / 2`; the terms linear in the fluctuations vanish.
pub fn mean_energy(
    mf: &MeanField,
    w: &Mat4,
    protocol: &DriveProtocol,
    t: f64,
    n_atoms: f64,
) -> Result<f64> {
    let p = protocol.evaluate(t);
    let h = quadratic_form(mf, &p)?;
    let shifted = w - Mat4::identity() * 0.5;
    Ok(lambda_n(mf, &p, n_atoms)? + 0.5 * (h * shifted).trace())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkEstimate {
    /// Closed-form average work evaluated from the photon number and the
    /// atomic and cross covariances.
    pub closed_form: f64,
    /// `<H>_t - <H>_0`.
    pub energy_difference: f64,
    /// The value to report: `closed_form` when it applies (zero mean fields
    /// and vacuum initial fluctuations), otherwise `energy_difference`.
    pub value: f64,
    /// Set when the closed form was not applicable.
    pub closed_form_flagged: bool,
}

/// Average work done by the drive between `0` and the time of `now`.
pub fn average_work(
    now: &JointSample,
    start: &JointSample,
    w0: &Mat4,
    protocol: &DriveProtocol,
    n_atoms: f64,
) -> Result<WorkEstimate> {
    let t = now.t;
    let p_t = protocol.evaluate(t);
    let p_0 = protocol.evaluate(start.t);
    let w = &now.fluct.w;
    let closed_form = p_t.omega_a * photon_number(&now.mean_field, w, n_atoms)
        + n_atoms * p_0.omega_b / 2.0
        + 2.0 * p_t.g * w[(0, 1)]
        + p_t.omega_b * (w[(1, 1)] + w[(3, 3)] - (n_atoms + 1.0)) / 2.0;
    let e_t = mean_energy(&now.mean_field, w, protocol, t, n_atoms)?;
    let e_0 = mean_energy(&start.mean_field, w0, protocol, start.t, n_atoms)?;
    let energy_difference = e_t - e_0;
    let zero_fields = [now.mean_field, start.mean_field]
        .iter()
        .all(|m| *m == MeanField::zero());
    let vacuum_start = (w0 - Mat4::identity() * 0.5).amax() < 1e-12;
    let applicable = zero_fields && vacuum_start;
    Ok(WorkEstimate {
        closed_form,
        energy_difference,
        value: if applicable {
            closed_form
        } else {
            energy_difference
        },
        closed_form_flagged: !applicable,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Normal,
    SuperRadiant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateEnergy {
    pub e_per_atom: f64,
    pub phase: Phase,
}

/// Leading-order ground-state energy per atom: `-omega_b/2` in the normal
/// phase and `-(omega_b/4)(mu + 1/mu)` in the super-radiant one.
pub fn ground_state_energy_per_atom(p: &Parameters) -> GroundStateEnergy {
    let mu = p.mu().unwrap_or(f64::INFINITY);
    if mu >= 1.0 {
        GroundStateEnergy {
            e_per_atom: -p.omega_b / 2.0,
            phase: Phase::Normal,
        }
    } else {
        GroundStateEnergy {
            e_per_atom: -(p.omega_b / 4.0) * (mu + 1.0 / mu),
            phase: Phase::SuperRadiant,
        }
    }
}

/// Thermodynamic-limit inner friction per atom at control parameter `mu`.
pub fn inner_friction_limit(omega_b: f64, mu: f64) -> f64 {
    if mu >= 1.0 {
        0.0
    } else {
        let x = 1.0 - 1.0 / mu;
        omega_b * x * x / 4.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerFriction {
    pub w_fric: f64,
    pub w_fric_per_atom_limit: f64,
}

/// Non-adiabatic part of the work, `<w> - E_GS(t) + E_GS(0)`, with
/// ground-state energies taken at leading order in `N`.
pub fn inner_friction(
    work: f64,
    protocol: &DriveProtocol,
    t: f64,
    n_atoms: f64,
) -> Result<InnerFriction> {
    let p_t = protocol.evaluate(t);
    let p_0 = protocol.evaluate(0.0);
    let e_t = ground_state_energy_per_atom(&p_t).e_per_atom;
    let e_0 = ground_state_energy_per_atom(&p_0).e_per_atom;
    let mu_t = protocol.mu(t)?;
    Ok(InnerFriction {
        w_fric: work - n_atoms * (e_t - e_0),
        w_fric_per_atom_limit: inner_friction_limit(p_t.omega_b, mu_t),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrWindows {
    /// Amplitude at which `mu(t)` just reaches 1: `lambda0 (1/mu0 - 1)`.
    pub lambda_c: f64,
    /// Intervals with `mu(t) < 1`, clipped to `[0, periods * T]`.
    /// Tangencies (`mu_min == 1`) appear as zero-width intervals.
    pub intervals: Vec<(f64, f64)>,
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Option<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Time windows, over `periods` drive cycles, in which the sinusoidal
/// protocol holds the system in the super-radiant region (`mu(t) < 1`).
///
/// Window edges are first placed from `sin(eta t) = lambda_c / lambda` and
/// then polished by bisection on `mu(t) - 1`.
pub fn sr_entry_times(protocol: &DriveProtocol, periods: usize) -> Result<SrWindows> {
    let d = protocol.as_sinusoidal().ok_or_else(|| {
        DickeError::InvalidArgument("super-radiant windows need the sinusoidal protocol".into())
    })?;
    if !(d.eta > 0.0) {
        return Err(DickeError::NotPeriodic { eta: d.eta });
    }
    let summary = d.mu_summary();
    let lambda_c = d.lambda_c();
    let period = 2.0 * PI / d.eta;
    let horizon = period * periods as f64;
    const TANGENCY: f64 = 1e-12;
    if summary.mu_min > 1.0 + TANGENCY {
        return Err(DickeError::NoSrWindow {
            mu_min: summary.mu_min,
        });
    }
    if summary.mu_max < 1.0 {
        return Ok(SrWindows {
            lambda_c,
            intervals: vec![(0.0, horizon)],
        });
    }
    if (summary.mu_min - 1.0).abs() <= TANGENCY {
        let intervals = (0..periods)
            .map(|k| {
                let t = (1.5 * PI + 2.0 * PI * k as f64) / d.eta;
                (t, t)
            })
            .collect();
        return Ok(SrWindows {
            lambda_c,
            intervals,
        });
    }
    let threshold = (lambda_c / d.lambda).clamp(-1.0, 1.0);
    let a = threshold.asin();
    let f = |t: f64| protocol.mu(t).map(|mu| mu - 1.0).unwrap_or(f64::NAN);
    let polish = |guess: f64| {
        let w = 1e-3 * period;
        bisect(f, guess - w, guess + w).unwrap_or(guess)
    };
    let mut intervals = Vec::new();
    let k_start: i64 = -1;
    for k in k_start..=(periods as i64) {
        let base = 2.0 * PI * k as f64;
        let enter = polish((base + PI - a) / d.eta);
        let leave = polish((base + 2.0 * PI + a) / d.eta);
        let lo = enter.max(0.0);
        let hi = leave.min(horizon);
        if hi > lo {
            intervals.push((lo, hi));
        }
    }
    Ok(SrWindows {
        lambda_c,
        intervals,
    })
}

/// Covariance of the two-mode squeezed vacuum `exp(r (c^dag d^dag - c d))|0,0>`.
pub fn two_mode_squeezed(r: f64) -> Mat4 {
    let (c, s) = ((2.0 * r).cosh() * 0.5, (2.0 * r).sinh() * 0.5);
    Mat4::new(
        c, s, 0.0, 0.0, //
        s, c, 0.0, 0.0, //
        0.0, 0.0, c, -s, //
        0.0, 0.0, -s, c,
    )
}

/// Overlap of two pure two-mode Gaussian states with equal first moments.
pub fn gaussian_fidelity(w1: &Mat4, w2: &Mat4) -> f64 {
    1.0 / (w1 + w2).determinant().sqrt()
}

/// `ln det(W + W_sq(r))` without the cancellation that a direct determinant
/// suffers at large `r`. In the rotated quadratures `(q_c +- q_d)/sqrt 2`,
/// `(p_c +- p_d)/sqrt 2` the squeezed covariance is diagonal, and the
/// determinant expands into principal minors of `W` times products of those
/// diagonal entries; for positive definite `W` every term is positive.
pub fn ln_det_with_squeezed(w: &Mat4, r: f64) -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let o = Mat4::new(
        h, h, 0.0, 0.0, //
        h, -h, 0.0, 0.0, //
        0.0, 0.0, h, h, //
        0.0, 0.0, h, -h,
    );
    let wr = o * w * o.transpose();
    let ln_d = [2.0 * r, -2.0 * r, -2.0 * r, 2.0 * r].map(|x| x - std::f64::consts::LN_2);
    let mut terms = [0.0; 16];
    for (mask, term) in terms.iter_mut().enumerate() {
        // indices in `mask` take the diagonal entry, the rest form the minor
        let rest: Vec<usize> = (0..4).filter(|i| mask & (1 << i) == 0).collect();
        let minor = if rest.is_empty() {
            1.0
        } else {
            wr.select_rows(&rest).select_columns(&rest).determinant()
        };
        if !(minor > 0.0) {
            return (w + two_mode_squeezed(r)).determinant().ln();
        }
        let diag: f64 = (0..4)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| ln_d[i])
            .sum();
        *term = minor.ln() + diag;
    }
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeFit {
    pub r_opt: f64,
    pub fidelity: f64,
    /// `det W` differs from `1/16` by more than `1e-4` relative.
    pub impure: bool,
    /// The fidelity profile has more than one local maximum on the scan grid.
    pub not_unimodal: bool,
}

/// Brent's minimisation on `[a, b]`.
fn brent_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const GOLD: f64 = 0.381_966_011_250_105;
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e): (f64, f64) = (0.0, 0.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let tol1 = tol + 1e-12 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if m >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= m { a - x } else { b - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    x
}

/// Squeezing degree `r >= 0` maximising the fidelity between the state with
/// covariance `w` and the two-mode squeezed coherent state sharing its
/// first moments.
pub fn optimal_squeezing(w: &Mat4) -> SqueezeFit {
    let impure = (w.determinant() * 16.0 - 1.0).abs() > 1e-4;
    // minimising ln det(W + W_sq(r)) maximises the fidelity
    let cost = |r: f64| ln_det_with_squeezed(w, r);
    let mut r_max: f64 = 25.0;
    let step = 0.05;
    let (grid, best) = loop {
        let n = (r_max / step).round() as usize;
        let grid: Vec<(f64, f64)> = (0..=n)
            .map(|k| {
                let r = r_max * k as f64 / n as f64;
                (r, cost(r))
            })
            .collect();
        let best = grid
            .iter()
            .enumerate()
            .filter(|(_, (_, c))| c.is_finite())
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if best + 1 == grid.len() && r_max < 100.0 {
            r_max *= 2.0;
            continue;
        }
        break (grid, best);
    };
    let local_minima = (1..grid.len() - 1)
        .filter(|&i| grid[i].1 < grid[i - 1].1 && grid[i].1 < grid[i + 1].1)
        .count()
        + usize::from(grid[0].1 < grid[1].1);
    let lo = grid[best.saturating_sub(1)].0;
    let hi = grid[(best + 1).min(grid.len() - 1)].0;
    let r_opt = if best == 0 && grid[0].1 <= grid[1].1 {
        // boundary optimum; refine inside [0, step] in case it is interior
        let r = brent_min(cost, 0.0, hi, 1e-10);
        if cost(r) < cost(0.0) - 1e-12 {
            r
        } else {
            0.0
        }
    } else {
        brent_min(cost, lo, hi, 1e-10)
    };
    SqueezeFit {
        r_opt,
        fidelity: (-0.5 * cost(r_opt)).exp().min(1.0),
        impure,
        not_unimodal: local_minima > 1,
    }
}

/// Everything reported at one output sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservablesRecord {
    pub t: f64,
    pub n_a: f64,
    pub sigma2_a: f64,
    pub rho: f64,
    pub rho_infinity: f64,
    pub work: f64,
    pub work_closed_form: f64,
    pub w_fric: f64,
    pub w_fric_per_atom_limit: f64,
    pub r_opt: f64,
    pub fidelity: f64,
    pub valid: bool,
}

impl ObservablesRecord {
    pub fn compute(
        now: &JointSample,
        start: &JointSample,
        w0: &Mat4,
        protocol: &DriveProtocol,
        n_atoms: f64,
        validity: Validity,
    ) -> Result<Self> {
        let w = &now.fluct.w;
        let stats = photon_variance_and_mandel(&now.mean_field, w, n_atoms);
        let work = average_work(now, start, w0, protocol, n_atoms)?;
        let fric = inner_friction(work.value, protocol, now.t, n_atoms)?;
        let fit = optimal_squeezing(w);
        Ok(Self {
            t: now.t,
            n_a: photon_number(&now.mean_field, w, n_atoms),
            sigma2_a: stats.sigma2,
            rho: stats.rho,
            rho_infinity: stats.rho_infinity,
            work: work.value,
            work_closed_form: work.closed_form,
            w_fric: fric.w_fric,
            w_fric_per_atom_limit: fric.w_fric_per_atom_limit,
            r_opt: fit.r_opt,
            fidelity: fit.fidelity,
            valid: validity.is_valid(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn alpha_only(re: f64, im: f64) -> MeanField {
        MeanField::new(Complex64::new(re, im), Complex64::new(0.0, 0.0))
    }

    #[test]
    fn photon_number_anchors() {
        let vac = Mat4::identity() * 0.5;
        for n in [1.0, 1e3, 1e9] {
            assert_eq!(photon_number(&MeanField::zero(), &vac, n), 0.0);
        }
        assert_abs_diff_eq!(
            photon_number(&alpha_only(0.1, 0.0), &vac, 1e4),
            100.0,
            epsilon = 1e-10
        );
        let r: f64 = 1.0;
        let sq = Mat4::from_diagonal(&nalgebra::Vector4::new(
            (2.0 * r).exp(),
            1.0,
            (-2.0 * r).exp(),
            1.0,
        )) * 0.5;
        assert_abs_diff_eq!(
            photon_number(&MeanField::zero(), &sq, 1e6),
            ((2.0 * r).cosh() - 1.0) / 2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            photon_number(&MeanField::zero(), &sq, 1e6),
            1.381_097_845_541_8,
            epsilon = 1e-9
        );
    }

    #[test]
    fn mandel_values() {
        let vac = Mat4::identity() * 0.5;
        let s = photon_variance_and_mandel(&alpha_only(0.3, -0.2), &vac, 1e6);
        assert_abs_diff_eq!(s.rho_infinity, 1.0, epsilon = 1e-14);
        assert!(s.mean_field_dominated);

        let mut w = vac;
        w[(0, 0)] = 0.8;
        let s = photon_variance_and_mandel(&alpha_only(0.4, 0.0), &w, 1e6);
        assert_abs_diff_eq!(s.rho_infinity, 1.6, epsilon = 1e-14);

        let a = 0.3 / 2f64.sqrt();
        let mut w = vac;
        w[(0, 2)] = 0.25;
        w[(2, 0)] = 0.25;
        let s = photon_variance_and_mandel(&alpha_only(a, a), &w, 1e6);
        assert_abs_diff_eq!(s.rho_infinity, 1.5, epsilon = 1e-12);

        let tiny = photon_variance_and_mandel(&alpha_only(1e-4, 0.0), &vac, 100.0);
        assert!(!tiny.mean_field_dominated);
    }

    #[test]
    fn energy_of_vacuum_and_thermal_states() {
        let p = DriveProtocol::constant(1.3, 0.7, 0.4);
        let n = 1e5;
        let e = mean_energy(&MeanField::zero(), &(Mat4::identity() * 0.5), &p, 0.0, n).unwrap();
        assert_abs_diff_eq!(e, -n * 0.7 / 2.0, epsilon = 1e-9);

        let free = DriveProtocol::constant(1.3, 0.7, 0.0);
        let nbar = 0.8;
        let e = mean_energy(
            &MeanField::zero(),
            &(Mat4::identity() * (nbar + 0.5)),
            &free,
            0.0,
            n,
        )
        .unwrap();
        assert_abs_diff_eq!(e, -n * 0.7 / 2.0 + (1.3 + 0.7) * nbar, epsilon = 1e-9);
    }

    #[test]
    fn ground_state_branches() {
        let crit = ground_state_energy_per_atom(&Parameters::new(1.0, 1.0, 0.5));
        assert_eq!(crit.e_per_atom, -0.5);
        assert_eq!(crit.phase, Phase::Normal);
        let sr = ground_state_energy_per_atom(&Parameters::new(1.0, 1.0, 1.0 / 2f64.sqrt()));
        assert_abs_diff_eq!(sr.e_per_atom, -0.625, epsilon = 1e-12);
        assert_eq!(sr.phase, Phase::SuperRadiant);
        // mu -> 0: e -> -g^2 / omega_a
        let g = 1e3;
        let strong = ground_state_energy_per_atom(&Parameters::new(1.0, 1.0, g));
        assert_abs_diff_eq!(strong.e_per_atom / (-g * g), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn friction_limit_values() {
        assert_eq!(inner_friction_limit(1.0, 1.2), 0.0);
        assert_abs_diff_eq!(inner_friction_limit(1.0, 0.5), 0.25, epsilon = 1e-15);
        assert!(inner_friction_limit(1.0, 1.0 - 1e-9) < 1e-17);
        let mut prev = 0.0;
        for k in 1..100 {
            let v = inner_friction_limit(0.8, 1.0 - k as f64 * 0.0099);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn squeezing_of_vacuum_and_round_trip() {
        let fit = optimal_squeezing(&(Mat4::identity() * 0.5));
        assert_eq!(fit.r_opt, 0.0);
        assert_abs_diff_eq!(fit.fidelity, 1.0, epsilon = 1e-14);
        assert!(!fit.impure && !fit.not_unimodal);

        let fit = optimal_squeezing(&two_mode_squeezed(1.3));
        assert_abs_diff_eq!(fit.r_opt, 1.3, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.fidelity, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn squeezed_covariance_is_pure_and_physical() {
        let w = two_mode_squeezed(0.7);
        assert_abs_diff_eq!(w.determinant(), 1.0 / 16.0, epsilon = 1e-12);
        assert!(crate::fluctuations::uncertainty_min_eigenvalue(&w) > -1e-12);
        let fit = optimal_squeezing(&(Mat4::identity() * 0.9));
        assert!(fit.impure);
    }

    #[test]
    fn sr_windows_closed_form_cases() {
        // mu0 = 0.9
        let g = (1.0f64 / (4.0 * 0.9)).sqrt();
        let p = DriveProtocol::sinusoidal(1.0, 1.0, 0.5, 0.2, g);
        let win = sr_entry_times(&p, 2).unwrap();
        assert_abs_diff_eq!(win.lambda_c, 1.0 / 0.9 - 1.0, epsilon = 1e-12);

        // mu_min exactly 1: tangency at eta t = 3 pi / 2
        let g = (0.5f64 / 4.0).sqrt();
        let p = DriveProtocol::sinusoidal(1.0, 1.0, 0.5, 0.5, g);
        let win = sr_entry_times(&p, 3).unwrap();
        assert_eq!(win.intervals.len(), 3);
        for (k, (a, b)) in win.intervals.iter().enumerate() {
            assert_eq!(a, b);
            assert_abs_diff_eq!(*a * 0.5, 1.5 * PI + 2.0 * PI * k as f64, epsilon = 1e-12);
        }

        // always super-radiant
        let p = DriveProtocol::sinusoidal(1.0, 1.0, 0.5, 0.5, 1.0);
        let win = sr_entry_times(&p, 2).unwrap();
        assert_eq!(win.intervals, vec![(0.0, 2.0 * 2.0 * PI / 0.5)]);

        // never
        let p = DriveProtocol::sinusoidal(1.0, 1.0, 0.5, 0.5, 0.3);
        assert!(matches!(
            sr_entry_times(&p, 1),
            Err(DickeError::NoSrWindow { .. })
        ));
    }
}
