//! Run configuration: a TOML document describing the drive, the initial
//! state, the integrator, the output sampling and an optional sweep.

use std::path::{Path, PathBuf};

use dicke_core::fluctuations::{check_covariance, thermal, vacuum};
use dicke_core::{Axis, Complex64};
use dicke_core::{
    AxisKind, DriveProtocol, GridSpec, IntegratorConfig, Mat4, MeanField, Method, PointKind,
    SweepTemplate,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// A rejected configuration. `field` is the dotted path of the offending key.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub protocol: ProtocolConfig,
    #[serde(default = "default_n_atoms")]
    pub n_atoms: f64,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default)]
    pub run: RunSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_n_atoms() -> f64 {
    1e6
}

/// `omega_b(t) = omega_a (lambda0 + lambda sin(eta t))` with constant `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub omega_a: f64,
    pub lambda0: f64,
    pub lambda: f64,
    pub eta: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// Real coherent amplitude of the cavity; atoms start in their ground state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// `[re, im]`; must be given together with `beta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<[f64; 2]>,
    /// `"normal"`, `"sr+"` or `"sr-"`: a stationary point of the parameters at `t = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
    #[serde(default)]
    pub covariance: CovarianceConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CovarianceConfig {
    #[default]
    Vacuum,
    Thermal {
        nbar: f64,
    },
    Explicit {
        matrix: [[f64; 4]; 4],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Adaptive,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    pub method: MethodName,
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            method: MethodName::Adaptive,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
            dt: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    pub t_end: f64,
    /// Spacing of the output samples; defaults to `t_end / 1000`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<f64>,
    /// Write every `stride`-th sample.
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            sample_dt: None,
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    /// One of `eta`, `eta/omega_a`, `g`, `g/omega_a`, `2g/eta`.
    pub axis: AxisName,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AxisName {
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "eta/omega_a")]
    EtaOverOmegaA,
    #[serde(rename = "g")]
    G,
    #[serde(rename = "g/omega_a")]
    GOverOmegaA,
    #[serde(rename = "2g/eta")]
    TwoGOverEta,
}

impl From<AxisName> for AxisKind {
    fn from(a: AxisName) -> Self {
        match a {
            AxisName::Eta => AxisKind::Eta,
            AxisName::EtaOverOmegaA => AxisKind::EtaOverOmegaA,
            AxisName::G => AxisKind::G,
            AxisName::GOverOmegaA => AxisKind::GOverOmegaA,
            AxisName::TwoGOverEta => AxisKind::TwoGOverEta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub frequency: AxisConfig,
    pub coupling: AxisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(
            field,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn finite(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| {
            let field = e
                .message()
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "config".into());
            ConfigError::new(field, e.message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Checks every physical precondition; nothing is integrated before
    /// this passes.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::new(
                "schema_version",
                format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        let p = &self.protocol;
        positive("protocol.omega_a", p.omega_a)?;
        positive("protocol.lambda0", p.lambda0)?;
        finite("protocol.lambda", p.lambda)?;
        if p.lambda < 0.0 {
            return Err(ConfigError::new("protocol.lambda", "must be >= 0"));
        }
        if p.lambda >= p.lambda0 {
            return Err(ConfigError::new(
                "protocol.lambda",
                format!(
                    "must be below lambda0 = {} so that omega_b stays positive",
                    p.lambda0
                ),
            ));
        }
        positive("protocol.eta", p.eta)?;
        positive("protocol.g", p.g)?;
        if !(self.n_atoms >= 1.0 && self.n_atoms.is_finite()) {
            return Err(ConfigError::new(
                "n_atoms",
                format!("must be >= 1, got {}", self.n_atoms),
            ));
        }
        self.initial_mean_field()?;
        self.initial_covariance()?;
        self.integrator_config()?;
        positive("run.t_end", self.run.t_end)?;
        if let Some(dt) = self.run.sample_dt {
            positive("run.sample_dt", dt)?;
            if dt > self.run.t_end {
                return Err(ConfigError::new("run.sample_dt", "exceeds run.t_end"));
            }
        }
        if self.run.stride == 0 {
            return Err(ConfigError::new("run.stride", "must be >= 1"));
        }
        if let Some(s) = &self.sweep {
            self.grid_spec_of(s)?;
        }
        if self.workers == Some(0) {
            return Err(ConfigError::new("workers", "must be >= 1"));
        }
        Ok(())
    }

    pub fn protocol(&self) -> DriveProtocol {
        let p = &self.protocol;
        DriveProtocol::sinusoidal(p.omega_a, p.lambda0, p.lambda, p.eta, p.g)
    }

    pub fn initial_mean_field(&self) -> Result<MeanField, ConfigError> {
        let init = &self.initial;
        let given = [
            init.epsilon.is_some(),
            init.alpha.is_some() || init.beta.is_some(),
            init.point.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if given > 1 {
            return Err(ConfigError::new(
                "initial",
                "give only one of epsilon, alpha/beta or point",
            ));
        }
        let mf = if let Some(point) = &init.point {
            let kind = match point.as_str() {
                "normal" => PointKind::Normal,
                "sr+" => PointKind::SuperRadiantPlus,
                "sr-" => PointKind::SuperRadiantMinus,
                other => {
                    return Err(ConfigError::new(
                        "initial.point",
                        format!("unknown point {other:?} (expected normal, sr+ or sr-)"),
                    ))
                }
            };
            let params = self.protocol().evaluate(0.0);
            let sp = params
                .stationary_points()
                .into_iter()
                .find(|sp| sp.kind == kind)
                .ok_or_else(|| {
                    ConfigError::new(
                        "initial.point",
                        format!("{point} does not exist at t = 0 (mu(0) >= 1)"),
                    )
                })?;
            MeanField::new(sp.alpha, sp.beta)
        } else if init.alpha.is_some() || init.beta.is_some() {
            let a = init
                .alpha
                .ok_or_else(|| ConfigError::new("initial.alpha", "required with initial.beta"))?;
            let b = init
                .beta
                .ok_or_else(|| ConfigError::new("initial.beta", "required with initial.alpha"))?;
            for (name, v) in [("initial.alpha", a), ("initial.beta", b)] {
                if !(v[0].is_finite() && v[1].is_finite()) {
                    return Err(ConfigError::new(name, "must be finite"));
                }
            }
            MeanField::new(Complex64::new(a[0], a[1]), Complex64::new(b[0], b[1]))
        } else {
            let eps = init.epsilon.unwrap_or(1e-2);
            finite("initial.epsilon", eps)?;
            MeanField::coherent(eps)
        };
        if mf.gamma() <= dicke_core::meanfield::GAMMA_FLOOR {
            return Err(ConfigError::new(
                if init.point.is_some() {
                    "initial.point"
                } else {
                    "initial.beta"
                },
                format!("|beta|^2 = {} leaves no room below 1", mf.beta.norm_sqr()),
            ));
        }
        Ok(mf)
    }

    pub fn initial_covariance(&self) -> Result<Mat4, ConfigError> {
        let w = match &self.initial.covariance {
            CovarianceConfig::Vacuum => vacuum(),
            CovarianceConfig::Thermal { nbar } => {
                if !(*nbar >= 0.0 && nbar.is_finite()) {
                    return Err(ConfigError::new(
                        "initial.covariance.nbar",
                        format!("must be >= 0, got {nbar}"),
                    ));
                }
                thermal(*nbar)
            }
            CovarianceConfig::Explicit { matrix } => Mat4::from_fn(|i, j| matrix[i][j]),
        };
        check_covariance(&w, 1e-9)
            .map_err(|e| ConfigError::new("initial.covariance", e.to_string()))?;
        Ok(w)
    }

    pub fn integrator_config(&self) -> Result<IntegratorConfig, ConfigError> {
        let s = &self.integrator;
        let cfg = match s.method {
            MethodName::Adaptive => {
                positive("integrator.rel_tol", s.rel_tol)?;
                positive("integrator.abs_tol", s.abs_tol)?;
                let c = IntegratorConfig::adaptive(s.rel_tol, s.abs_tol);
                match s.max_step {
                    Some(h) => {
                        positive("integrator.max_step", h)?;
                        c.with_max_step(h)
                    }
                    None => c,
                }
            }
            MethodName::Fixed => {
                let dt = s.dt.ok_or_else(|| {
                    ConfigError::new("integrator.dt", "required for method = \"fixed\"")
                })?;
                positive("integrator.dt", dt)?;
                IntegratorConfig::fixed(dt)
            }
        };
        Ok(cfg)
    }

    pub fn sample_times(&self) -> Vec<f64> {
        let dt = self.run.sample_dt.unwrap_or(self.run.t_end / 1000.0);
        let n = ((self.run.t_end / dt).round() as usize).max(1);
        dicke_core::ode::uniform_samples(self.run.t_end, n)
    }

    pub fn template(&self) -> SweepTemplate {
        SweepTemplate {
            omega_a: self.protocol.omega_a,
            lambda0: self.protocol.lambda0,
            lambda: self.protocol.lambda,
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec, ConfigError> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| ConfigError::new("sweep", "a stability run needs a [sweep] table"))?;
        self.grid_spec_of(s)
    }

    fn grid_spec_of(&self, s: &SweepConfig) -> Result<GridSpec, ConfigError> {
        for (name, a) in [
            ("sweep.frequency", &s.frequency),
            ("sweep.coupling", &s.coupling),
        ] {
            finite(&format!("{name}.min"), a.min)?;
            finite(&format!("{name}.max"), a.max)?;
            if a.points == 0 {
                return Err(ConfigError::new(format!("{name}.points"), "must be >= 1"));
            }
        }
        if !matches!(s.frequency.axis, AxisName::Eta | AxisName::EtaOverOmegaA) {
            return Err(ConfigError::new(
                "sweep.frequency.axis",
                "must be \"eta\" or \"eta/omega_a\"",
            ));
        }
        if matches!(s.coupling.axis, AxisName::Eta | AxisName::EtaOverOmegaA) {
            return Err(ConfigError::new(
                "sweep.coupling.axis",
                "must be \"g\", \"g/omega_a\" or \"2g/eta\"",
            ));
        }
        if s.frequency.min.min(s.frequency.max) <= 0.0 {
            return Err(ConfigError::new(
                "sweep.frequency.min",
                "drive frequency must be positive",
            ));
        }
        if s.coupling.min.min(s.coupling.max) < 0.0 {
            return Err(ConfigError::new(
                "sweep.coupling.min",
                "coupling must be >= 0",
            ));
        }
        let axis = |a: &AxisConfig| Axis::new(a.axis.into(), a.min, a.max, a.points);
        let spec = GridSpec {
            frequency: axis(&s.frequency),
            coupling: axis(&s.coupling),
        };
        spec.validate()
            .map_err(|e| ConfigError::new("sweep", e.to_string()))?;
        Ok(spec)
    }

    /// `max(|alpha0|, |beta0|)`.
    pub fn delta(&self) -> f64 {
        self.initial_mean_field()
            .map(|m| m.delta())
            .unwrap_or(f64::NAN)
    }

    pub fn is_fixed_step(&self) -> bool {
        matches!(
            self.integrator_config().map(|c| c.method),
            Ok(Method::FixedStep { .. })
        )
    }
}
