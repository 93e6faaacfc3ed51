//! Ready-made configurations for the stability diagram and the reference
//! trajectories.

use std::f64::consts::PI;

use crate::config::{
    AxisConfig, AxisName, CovarianceConfig, InitialConfig, IntegratorSettings, MethodName,
    OutputConfig, ProtocolConfig, RunConfig, RunSettings, SweepConfig, SCHEMA_VERSION,
};

pub const NAMES: [&str; 5] = ["fig1a", "fig1b", "fig1c", "fig1d", "fig2"];

/// Slow drive used by the trajectory presets: `omega_a = 11 eta`.
pub const SLOW_ETA: f64 = 1.0 / 11.0;

fn tight() -> IntegratorSettings {
    IntegratorSettings {
        method: MethodName::Adaptive,
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        max_step: None,
        dt: None,
    }
}

fn base(eta: f64, g: f64) -> RunConfig {
    RunConfig {
        schema_version: SCHEMA_VERSION,
        protocol: ProtocolConfig {
            omega_a: 1.0,
            lambda0: 1.0,
            lambda: 0.5,
            eta,
            g,
        },
        n_atoms: 1e6,
        initial: InitialConfig::default(),
        integrator: tight(),
        run: RunSettings::default(),
        sweep: None,
        output: OutputConfig::default(),
        workers: None,
    }
}

/// Slow-drive trajectory at coupling `2g/eta = ratio`, starting from
/// `alpha = 1e-2`, up to `t = 60/eta`.
pub fn slow_trajectory(ratio: f64) -> RunConfig {
    let mut cfg = base(SLOW_ETA, 0.5 * ratio * SLOW_ETA);
    cfg.initial.epsilon = Some(1e-2);
    cfg.run = RunSettings {
        t_end: 60.0 / SLOW_ETA,
        sample_dt: Some(60.0 / SLOW_ETA / 2000.0),
        stride: 1,
    };
    cfg
}

/// Drive cycle started at the `sr+` point with vacuum fluctuations, three periods.
pub fn fig2() -> RunConfig {
    let eta = 0.1;
    let mut cfg = base(eta, 0.55);
    cfg.initial = InitialConfig {
        point: Some("sr+".into()),
        covariance: CovarianceConfig::Vacuum,
        ..InitialConfig::default()
    };
    let period = 2.0 * PI / eta;
    cfg.run = RunSettings {
        t_end: 3.0 * period,
        sample_dt: Some(period / 200.0),
        stride: 1,
    };
    cfg
}

/// 160 x 160 stability grid over `eta/omega_a in [0.05, 2.5]`, `g/omega_a in [0, 1]`.
pub fn fig1a() -> RunConfig {
    let mut cfg = base(SLOW_ETA, 0.5);
    cfg.integrator = IntegratorSettings::default();
    cfg.sweep = Some(SweepConfig {
        frequency: AxisConfig {
            axis: AxisName::EtaOverOmegaA,
            min: 0.05,
            max: 2.5,
            points: 160,
        },
        coupling: AxisConfig {
            axis: AxisName::GOverOmegaA,
            min: 0.0,
            max: 1.0,
            points: 160,
        },
    });
    cfg
}

pub fn preset(name: &str) -> Option<RunConfig> {
    match name {
        "fig1a" => Some(fig1a()),
        "fig1b" => Some(slow_trajectory(9.0)),
        "fig1c" => Some(slow_trajectory(12.5)),
        "fig1d" => Some(slow_trajectory(14.0)),
        "fig2" => Some(fig2()),
        _ => None,
    }
}
