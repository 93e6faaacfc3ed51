//! Run orchestration: trajectories with fluctuations and observables, and
//! stability sweeps.

use std::path::PathBuf;

use dicke_core::floquet::reference_couplings;
use dicke_core::observables::ObservablesRecord;
use dicke_core::{
    floquet, stability_sweep, validity_times, CellStatus, DickeError, JointTrajectory,
    StabilityGrid, TrajectoryStatus, Validity,
};
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, RunConfig, SCHEMA_VERSION};
use crate::output::{num, OutputSet, Table};

pub const WORKERS_ENV: &str = "DICKE_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error in {0}")]
    Config(#[from] ConfigError),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{failed} of {total} sweep cells failed")]
    PartialSweep { failed: usize, total: usize },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Integration(_) | RunError::Io(_) => 2,
            RunError::PartialSweep { .. } => 3,
        }
    }
}

impl From<DickeError> for RunError {
    fn from(e: DickeError) -> Self {
        RunError::Integration(e.to_string())
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub fixed_step: Option<f64>,
    pub tol: Option<(f64, Option<f64>)>,
    pub stride: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), ConfigError> {
        use crate::config::MethodName;
        if let Some(dir) = &self.out {
            cfg.output.dir = dir.clone();
        }
        if let Some(k) = self.workers {
            cfg.workers = Some(k);
        }
        if let Some(dt) = self.fixed_step {
            cfg.integrator.method = MethodName::Fixed;
            cfg.integrator.dt = Some(dt);
        }
        if let Some((rel, abs)) = self.tol {
            cfg.integrator.method = MethodName::Adaptive;
            cfg.integrator.rel_tol = rel;
            cfg.integrator.abs_tol = abs.unwrap_or(rel * 1e-2);
        }
        if let Some(k) = self.stride {
            cfg.run.stride = k;
        }
        cfg.validate()
    }
}

/// `--workers`/config value, else the environment override, else the
/// available parallelism.
pub fn resolve_workers(cfg: &RunConfig) -> Result<usize, ConfigError> {
    if let Some(k) = cfg.workers {
        return Ok(k);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(ConfigError::new(
                WORKERS_ENV,
                format!("expected a positive integer, got {v:?}"),
            )),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResults {
    pub status: String,
    /// Instability rate of the linearization around the normal point.
    pub gamma_star: f64,
    pub max_real_exponent: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_lin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
    pub max_symplectic_defect: f64,
    pub max_purity_defect: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validity_exceeded_at: Option<f64>,
    pub samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityResults {
    pub cells: usize,
    pub stable: usize,
    pub unstable: usize,
    pub marginal: usize,
    pub failed: usize,
}

/// Written next to the CSVs; `config` re-parses into the run's configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary<R> {
    pub schema_version: u32,
    pub generator: String,
    pub results: R,
    pub config: RunConfig,
}

impl<R: Serialize> RunSummary<R> {
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("summary serializes")
    }
}

fn generator() -> String {
    format!("dicke {}", env!("CARGO_PKG_VERSION"))
}

pub struct TrajectoryRun {
    pub config: RunConfig,
    pub trajectory: JointTrajectory,
    pub validity: Vec<Validity>,
    pub observables: Vec<ObservablesRecord>,
    pub summary: RunSummary<TrajectoryResults>,
}

pub fn run_trajectory(cfg: &RunConfig) -> Result<TrajectoryRun, RunError> {
    cfg.validate()?;
    let protocol = cfg.protocol();
    let integrator = cfg.integrator_config()?;
    let mf0 = cfg.initial_mean_field()?;
    let w0 = cfg.initial_covariance()?;
    let samples = cfg.sample_times();

    let linear = floquet(&protocol, &integrator)?;
    let trajectory = dicke_core::integrate_joint(mf0, &w0, &protocol, &samples, &integrator)?;
    if let TrajectoryStatus::BetaBoundary { t } = trajectory.status {
        return Err(RunError::Integration(format!(
            "|beta|^2 reached 1 at t = {t}; the bosonic expansion breaks down there"
        )));
    }
    let validity = trajectory.validity(cfg.n_atoms);
    let start = trajectory.samples[0];
    let observables = trajectory
        .samples
        .iter()
        .zip(&validity)
        .map(|(s, v)| ObservablesRecord::compute(s, &start, &w0, &protocol, cfg.n_atoms, *v))
        .collect::<Result<Vec<_>, _>>()?;

    let delta = mf0.delta();
    let times = if delta > 0.0 && delta < 1.0 {
        Some(validity_times(linear.gamma_star, delta, cfg.n_atoms)?)
    } else {
        None
    };
    let finite = |x: f64| x.is_finite().then_some(x);
    let exceeded = validity.iter().find_map(|v| match v {
        Validity::Exceeded { t_max_observed } => Some(*t_max_observed),
        Validity::Valid => None,
    });
    let results = TrajectoryResults {
        status: "completed".into(),
        gamma_star: linear.gamma_star,
        max_real_exponent: linear.max_real_exponent,
        tau_star: times.and_then(|t| finite(t.tau_star)),
        t_lin: times.and_then(|t| finite(t.t_lin)),
        t_max: times.and_then(|t| finite(t.t_max)),
        regime: times.map(|t| format!("{:?}", t.regime)),
        max_symplectic_defect: trajectory.max_symplectic_defect(),
        max_purity_defect: trajectory.max_purity_defect(),
        validity_exceeded_at: exceeded,
        samples: trajectory.samples.len(),
        accepted_steps: trajectory.stats.accepted,
        rejected_steps: trajectory.stats.rejected,
        warnings: protocol.warnings(),
    };
    Ok(TrajectoryRun {
        config: cfg.clone(),
        summary: RunSummary {
            schema_version: SCHEMA_VERSION,
            generator: generator(),
            results,
            config: cfg.clone(),
        },
        trajectory,
        validity,
        observables,
    })
}

fn protocol_metadata(table: Table, cfg: &RunConfig) -> Table {
    let p = &cfg.protocol;
    table
        .meta("schema_version", SCHEMA_VERSION)
        .meta("generator", generator())
        .meta("omega_a", num(p.omega_a))
        .meta("lambda0", num(p.lambda0))
        .meta("lambda", num(p.lambda))
        .meta("eta", num(p.eta))
        .meta("g", num(p.g))
}

fn flag(v: &Validity) -> String {
    if v.is_valid() { "1" } else { "0" }.to_string()
}

impl TrajectoryRun {
    pub fn outputs(&self) -> OutputSet {
        let cfg = &self.config;
        let stride = cfg.run.stride;
        let rows = || {
            self.trajectory
                .samples
                .iter()
                .zip(&self.validity)
                .zip(&self.observables)
                .step_by(stride)
        };

        let mut traj = protocol_metadata(
            Table::new(&["t", "alpha_re", "alpha_im", "beta_re", "beta_im"]),
            cfg,
        );
        for ((s, _), _) in rows() {
            let m = s.mean_field;
            traj.push(vec![
                num(s.t),
                num(m.alpha.re),
                num(m.alpha.im),
                num(m.beta.re),
                num(m.beta.im),
            ]);
        }

        let mut header = vec!["t".to_string()];
        for i in 0..4 {
            for j in i..4 {
                header.push(format!("W{}{}", i + 1, j + 1));
            }
        }
        header.extend(["phi_max_abs".to_string(), "valid_flag".to_string()]);
        let mut fluct =
            protocol_metadata(Table::new(&header), cfg).meta("n_atoms", num(cfg.n_atoms));
        for ((s, v), _) in rows() {
            let w = &s.fluct.w;
            let mut row = vec![num(s.t)];
            for i in 0..4 {
                for j in i..4 {
                    row.push(num(w[(i, j)]));
                }
            }
            row.push(num(s.fluct.phi.amax()));
            row.push(flag(v));
            fluct.push(row);
        }

        let mut obs = protocol_metadata(
            Table::new(&[
                "t",
                "n_a",
                "sigma2_a",
                "rho",
                "rho_inf",
                "work",
                "w_fric",
                "w_fric_limit",
                "r_opt",
                "fidelity",
                "valid_flag",
            ]),
            cfg,
        )
        .meta("n_atoms", num(cfg.n_atoms));
        for ((_, v), o) in rows() {
            obs.push(vec![
                num(o.t),
                num(o.n_a),
                num(o.sigma2_a),
                num(o.rho),
                num(o.rho_infinity),
                num(o.work),
                num(o.w_fric),
                num(o.w_fric_per_atom_limit),
                num(o.r_opt),
                num(o.fidelity),
                flag(v),
            ]);
        }

        let mut set = OutputSet::new();
        set.add("trajectory.csv", traj.render());
        set.add("fluctuations.csv", fluct.render());
        set.add("observables.csv", obs.render());
        set.add("summary.toml", self.summary.to_toml_string().into_bytes());
        set
    }
}

pub struct StabilityRun {
    pub config: RunConfig,
    pub grid: StabilityGrid,
    pub summary: RunSummary<StabilityResults>,
}

pub fn run_stability(cfg: &RunConfig, workers: usize) -> Result<StabilityRun, RunError> {
    cfg.validate()?;
    let spec = cfg.grid_spec()?;
    let integrator = cfg.integrator_config()?;
    let grid = stability_sweep(&spec, &cfg.template(), &integrator, workers)?;
    let count = |s: CellStatus| grid.cells.iter().filter(|c| c.status == s).count();
    let results = StabilityResults {
        cells: grid.cells.len(),
        stable: count(CellStatus::Stable),
        unstable: count(CellStatus::Unstable),
        marginal: count(CellStatus::Marginal),
        failed: count(CellStatus::Failed),
    };
    Ok(StabilityRun {
        config: cfg.clone(),
        summary: RunSummary {
            schema_version: SCHEMA_VERSION,
            generator: generator(),
            results,
            config: cfg.clone(),
        },
        grid,
    })
}

impl StabilityRun {
    pub fn outputs(&self) -> OutputSet {
        let cfg = &self.config;
        let spec = &self.grid.spec;
        let base = |t: Table| {
            protocol_metadata(t, cfg)
                .meta("frequency_axis", spec.frequency.kind.name())
                .meta("coupling_axis", spec.coupling.kind.name())
        };
        let mut grid = base(Table::new(&["eta", "g", "gamma_star", "status"]));
        for c in &self.grid.cells {
            grid.push(vec![
                num(c.eta),
                num(c.g),
                num(c.gamma_star),
                c.status.as_str().into(),
            ]);
        }

        let refs = reference_couplings(&self.grid.template);
        let mut overlay = base(Table::new(&["eta", "g_mu0", "g_mu_min", "g_mu_max"]))
            .meta("g_mu0", "static critical coupling, mu0 = 1")
            .meta("g_mu_min", "mu(t) > 1 at all times below this coupling")
            .meta("g_mu_max", "mu(t) < 1 at all times above this coupling");
        for i in 0..spec.frequency.points {
            let (eta, _) = self.grid.template.cell_parameters(spec, i, 0);
            overlay.push(vec![
                num(eta),
                num(refs[0].1),
                num(refs[1].1),
                num(refs[2].1),
            ]);
        }

        let mut set = OutputSet::new();
        set.add("grid.csv", grid.render());
        set.add("overlay.csv", overlay.render());
        set.add("summary.toml", self.summary.to_toml_string().into_bytes());
        set
    }
}
