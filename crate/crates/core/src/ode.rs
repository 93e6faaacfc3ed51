//! Explicit Runge-Kutta integration over fixed-size real state vectors.
//!
//! Two schemes are provided: the Dormand-Prince 5(4) embedded pair with
//! step-size control, and the classical fixed-step fourth-order method for
//! bit-reproducible runs. Both land exactly on the requested sample times.

use crate::error::{DickeError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Dormand-Prince 5(4) with per-step error control.
    Adaptive {
        rel_tol: f64,
        abs_tol: f64,
        max_step: f64,
    },
    /// Classical RK4 with constant step `dt` (shortened only to hit sample times).
    FixedStep { dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self::adaptive(1e-10, 1e-12)
    }
}

impl IntegratorConfig {
    pub fn adaptive(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            method: Method::Adaptive {
                rel_tol,
                abs_tol,
                max_step: f64::INFINITY,
            },
            max_steps: 50_000_000,
        }
    }

    pub fn fixed(dt: f64) -> Self {
        Self {
            method: Method::FixedStep { dt },
            max_steps: 50_000_000,
        }
    }

    /// Tolerances used for monodromy matrices.
    pub fn tight() -> Self {
        Self::adaptive(1e-12, 1e-14)
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        if let Method::Adaptive { max_step, .. } = &mut self.method {
            *max_step = h;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::Adaptive {
                rel_tol,
                abs_tol,
                max_step,
            } => {
                if !(rel_tol > 0.0 && rel_tol.is_finite()) {
                    return Err(DickeError::InvalidArgument(format!("rel_tol = {rel_tol}")));
                }
                if !(abs_tol > 0.0 && abs_tol.is_finite()) {
                    return Err(DickeError::InvalidArgument(format!("abs_tol = {abs_tol}")));
                }
                if !(max_step > 0.0) {
                    return Err(DickeError::InvalidArgument(format!(
                        "max_step = {max_step}"
                    )));
                }
            }
            Method::FixedStep { dt } => {
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(DickeError::InvalidArgument(format!("dt = {dt}")));
                }
            }
        }
        Ok(())
    }
}

/// Step bookkeeping for one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// Largest normalized error estimate among accepted steps (adaptive only;
    /// values `<= 1` mean the tolerance was met).
    pub max_error_estimate: f64,
}

/// Result of a driver call: the statistics are always available, `stop`
/// holds the reason if the integration ended before the last sample.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub stats: StepStats,
    pub stop: Option<DickeError>,
}

impl Outcome {
    pub fn into_result(self) -> Result<StepStats> {
        match self.stop {
            None => Ok(self.stats),
            Some(e) => Err(e),
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn combine<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        let ch = c * h;
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += ch * ki;
        }
    }
    out
}

fn all_finite<const D: usize>(y: &[f64; D]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn error_norm<const D: usize>(
    y: &[f64; D],
    y_new: &[f64; D],
    err: &[f64; D],
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..D {
        let sc = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
        let r = err[i] / sc;
        acc += r * r;
    }
    (acc / D as f64).sqrt()
}

fn check_samples(t0: f64, samples: &[f64]) -> Result<()> {
    let mut prev = t0;
    for &s in samples {
        if !(s > prev) || !s.is_finite() {
            return Err(DickeError::InvalidArgument(format!(
                "sample times must be finite and strictly increasing after t0 = {t0} (got {s} after {prev})"
            )));
        }
        prev = s;
    }
    Ok(())
}

/// Integrates `y' = rhs(t, y)` from `t0`, calling `observe` at `t0` and then
/// at each entry of `samples` (strictly increasing, all `> t0`).
///
/// An error from `rhs` inside a trial step of the adaptive scheme rejects
/// the step; it becomes fatal only if the step size collapses.
pub fn integrate<const D: usize, F, O>(
    mut rhs: F,
    t0: f64,
    y0: [f64; D],
    samples: &[f64],
    config: &IntegratorConfig,
    mut observe: O,
) -> Outcome
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D]>,
    O: FnMut(f64, &[f64; D]),
{
    let mut stats = StepStats::default();
    let fail = |stats: StepStats, e: DickeError| Outcome {
        stats,
        stop: Some(e),
    };
    if let Err(e) = config.validate().and_then(|_| check_samples(t0, samples)) {
        return fail(stats, e);
    }
    if !all_finite(&y0) {
        return fail(stats, DickeError::NonFinite { t: t0 });
    }
    observe(t0, &y0);
    if samples.is_empty() {
        return Outcome { stats, stop: None };
    }
    let stop = match config.method {
        Method::Adaptive {
            rel_tol,
            abs_tol,
            max_step,
        } => dopri5(
            &mut rhs,
            t0,
            y0,
            samples,
            rel_tol,
            abs_tol,
            max_step,
            config.max_steps,
            &mut stats,
            &mut observe,
        ),
        Method::FixedStep { dt } => rk4(
            &mut rhs,
            t0,
            y0,
            samples,
            dt,
            config.max_steps,
            &mut stats,
            &mut observe,
        ),
    };
    Outcome {
        stats,
        stop: stop.err(),
    }
}

fn initial_step<const D: usize, F>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64; D],
    f0: &[f64; D],
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    stats: &mut StepStats,
) -> f64
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D]>,
{
    let zero = [0.0; D];
    let sc_norm = |v: &[f64; D]| error_norm(y0, y0, v, rel_tol, abs_tol);
    let d0 = sc_norm(y0);
    let d1 = sc_norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(max_step);
    let y1 = combine(y0, h0, &[(1.0, f0)]);
    stats.rhs_evals += 1;
    let d2 = match rhs(t0 + h0, &y1) {
        Ok(f1) => {
            let mut diff = zero;
            for i in 0..D {
                diff[i] = f1[i] - f0[i];
            }
            sc_norm(&diff) / h0
        }
        Err(_) => return h0 * 1e-3,
    };
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1).min(max_step)
}

#[allow(clippy::too_many_arguments)]
fn dopri5<const D: usize, F, O>(
    rhs: &mut F,
    t0: f64,
    y0: [f64; D],
    samples: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    max_steps: usize,
    stats: &mut StepStats,
    observe: &mut O,
) -> Result<()>
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D]>,
    O: FnMut(f64, &[f64; D]),
{
    let mut t = t0;
    let mut y = y0;
    stats.rhs_evals += 1;
    let mut k1 = rhs(t, &y)?;
    let mut h = initial_step(rhs, t, &y, &k1, rel_tol, abs_tol, max_step, stats);
    let mut last_rejected = false;
    let mut next = 0;

    while next < samples.len() {
        if stats.accepted + stats.rejected >= max_steps {
            return Err(DickeError::TooManySteps { t, max_steps });
        }
        let target = samples[next];
        let min_h = 1e-14 * t.abs().max(1.0);
        if h < min_h {
            return Err(DickeError::StepSizeUnderflow { t, h });
        }
        let (step, lands) = if t + h * (1.0 + 1e-12) >= target {
            (target - t, true)
        } else {
            (h, false)
        };

        let trial = (|| -> Result<([f64; D], [f64; D], [f64; D])> {
            let k2 = rhs(t + C2 * step, &combine(&y, step, &[(A21, &k1)]))?;
            let k3 = rhs(t + C3 * step, &combine(&y, step, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = rhs(
                t + C4 * step,
                &combine(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            )?;
            let k5 = rhs(
                t + C5 * step,
                &combine(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = rhs(
                t + step,
                &combine(
                    &y,
                    step,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            )?;
            let y_new = combine(
                &y,
                step,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = rhs(t + step, &y_new)?;
            let mut err = [0.0; D];
            for i in 0..D {
                err[i] = step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            Ok((y_new, k7, err))
        })();
        stats.rhs_evals += 6;

        let (y_new, k7, err) = match trial {
            Ok(v) => v,
            Err(e) => {
                stats.rejected += 1;
                last_rejected = true;
                h = step * 0.25;
                if h < min_h {
                    return Err(e);
                }
                continue;
            }
        };
        let err_norm = error_norm(&y, &y_new, &err, rel_tol, abs_tol);
        if !err_norm.is_finite() {
            stats.rejected += 1;
            h = step * 0.25;
            last_rejected = true;
            continue;
        }
        if err_norm <= 1.0 {
            if !all_finite(&y_new) {
                return Err(DickeError::NonFinite { t: t + step });
            }
            stats.accepted += 1;
            stats.max_error_estimate = stats.max_error_estimate.max(err_norm);
            t = if lands { target } else { t + step };
            y = y_new;
            k1 = k7;
            let mut fac = if err_norm == 0.0 {
                5.0
            } else {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            let proposal = (step * fac).min(max_step);
            // a step shortened to hit a sample says little about the natural scale
            h = if lands { proposal.max(h) } else { proposal };
            h = h.min(max_step);
            if lands {
                observe(t, &y);
                next += 1;
            }
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h = step * (0.9 * err_norm.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn rk4<const D: usize, F, O>(
    rhs: &mut F,
    t0: f64,
    y0: [f64; D],
    samples: &[f64],
    dt: f64,
    max_steps: usize,
    stats: &mut StepStats,
    observe: &mut O,
) -> Result<()>
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D]>,
    O: FnMut(f64, &[f64; D]),
{
    let mut t = t0;
    let mut y = y0;
    for &target in samples {
        while t < target {
            if stats.accepted >= max_steps {
                return Err(DickeError::TooManySteps { t, max_steps });
            }
            let (h, lands) = if t + dt * (1.0 + 1e-12) >= target {
                (target - t, true)
            } else {
                (dt, false)
            };
            let k1 = rhs(t, &y)?;
            let k2 = rhs(t + 0.5 * h, &combine(&y, h, &[(0.5, &k1)]))?;
            let k3 = rhs(t + 0.5 * h, &combine(&y, h, &[(0.5, &k2)]))?;
            let k4 = rhs(t + h, &combine(&y, h, &[(1.0, &k3)]))?;
            stats.rhs_evals += 4;
            y = combine(
                &y,
                h,
                &[
                    (1.0 / 6.0, &k1),
                    (1.0 / 3.0, &k2),
                    (1.0 / 3.0, &k3),
                    (1.0 / 6.0, &k4),
                ],
            );
            if !all_finite(&y) {
                return Err(DickeError::NonFinite { t: t + h });
            }
            stats.accepted += 1;
            t = if lands { target } else { t + h };
        }
        observe(t, &y);
    }
    Ok(())
}

/// `n + 1` equally spaced times on `[0, t_end]`, excluding 0.
pub fn uniform_samples(t_end: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| t_end * k as f64 / n as f64).collect()
}
