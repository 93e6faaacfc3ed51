use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dicke_cli::config::ConfigError;
use dicke_cli::run::{resolve_workers, RunError};
use dicke_cli::{presets, run_stability, run_trajectory, Overrides, RunConfig};
use dicke_core::observables::ground_state_energy_per_atom;
use dicke_core::Parameters;

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (config schema 1)");

#[derive(Parser)]
#[command(name = "dicke", version = VERSION, about = "Driven Dicke model trajectories and stability diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate mean fields and fluctuations and write CSVs plus a summary.
    Simulate(RunArgs),
    /// Sweep the instability rate over a frequency x coupling grid.
    Stability(RunArgs),
    /// Leading-order ground-state energy per atom.
    GsEnergy {
        #[arg(long)]
        omega_a: f64,
        #[arg(long)]
        omega_b: f64,
        #[arg(long)]
        g: f64,
    },
    /// Parse and check a configuration without running it.
    ValidateConfig(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in configuration: fig1a, fig1b, fig1c, fig1d or fig2.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory, overriding `output.dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep worker threads (default: config, then DICKE_WORKERS, then all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Use fixed-step RK4 with this step.
    #[arg(long, value_name = "DT")]
    fixed_step: Option<f64>,
    /// Adaptive tolerances `REL[,ABS]`.
    #[arg(long, value_name = "REL[,ABS]", value_parser = parse_tol)]
    tol: Option<(f64, Option<f64>)>,
    /// Keep every K-th output sample.
    #[arg(long, value_name = "K")]
    stride: Option<usize>,
}

fn parse_tol(s: &str) -> Result<(f64, Option<f64>), String> {
    let mut parts = s.split(',');
    let rel = parts
        .next()
        .unwrap_or("")
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("relative tolerance: {e}"))?;
    let abs = match parts.next() {
        Some(a) => Some(
            a.trim()
                .parse::<f64>()
                .map_err(|e| format!("absolute tolerance: {e}"))?,
        ),
        None => None,
    };
    if parts.next().is_some() {
        return Err("expected REL or REL,ABS".into());
    }
    Ok((rel, abs))
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::new(
                    "--preset",
                    "give either --config or --preset",
                ))
            }
            (Some(path), None) => RunConfig::load(path)?,
            (None, Some(name)) => presets::preset(name).ok_or_else(|| {
                ConfigError::new(
                    "--preset",
                    format!(
                        "unknown preset {name:?}; choose one of {}",
                        presets::NAMES.join(", ")
                    ),
                )
            })?,
            (None, None) => {
                return Err(ConfigError::new(
                    "--config",
                    "a config file or --preset is required",
                ))
            }
        };
        Overrides {
            out: self.out.clone(),
            workers: self.workers,
            fixed_step: self.fixed_step,
            tol: self.tol,
            stride: self.stride,
        }
        .apply(&mut cfg)?;
        Ok(cfg)
    }
}

fn simulate(args: &RunArgs) -> Result<(), RunError> {
    let cfg = args.load()?;
    let run = run_trajectory(&cfg)?;
    let paths = run.outputs().commit(&cfg.output.dir)?;
    let r = &run.summary.results;
    eprintln!(
        "{} samples, gamma* = {}, max symplectic defect = {:e}",
        r.samples, r.gamma_star, r.max_symplectic_defect
    );
    if let Some(t) = r.validity_exceeded_at {
        eprintln!("warning: 1/N expansion left its validity range at t = {t}");
    }
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

fn stability(args: &RunArgs) -> Result<(), RunError> {
    let cfg = args.load()?;
    let workers = resolve_workers(&cfg)?;
    let run = run_stability(&cfg, workers)?;
    let paths = run.outputs().commit(&cfg.output.dir)?;
    let r = &run.summary.results;
    eprintln!(
        "{} cells: {} stable, {} unstable, {} marginal, {} failed",
        r.cells, r.stable, r.unstable, r.marginal, r.failed
    );
    for p in paths {
        println!("{}", p.display());
    }
    if r.failed > 0 {
        return Err(RunError::PartialSweep {
            failed: r.failed,
            total: r.cells,
        });
    }
    Ok(())
}

fn gs_energy(omega_a: f64, omega_b: f64, g: f64) -> Result<(), RunError> {
    for (name, v) in [("--omega-a", omega_a), ("--omega-b", omega_b), ("--g", g)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ConfigError::new(name, format!("must be positive, got {v}")).into());
        }
    }
    let p = Parameters::new(omega_a, omega_b, g);
    let e = ground_state_energy_per_atom(&p);
    println!("mu = {}", p.mu().map_err(RunError::from)?);
    println!("phase = {:?}", e.phase);
    println!("e_per_atom = {:?}", e.e_per_atom);
    Ok(())
}

fn validate(args: &RunArgs) -> Result<(), RunError> {
    let cfg = args.load()?;
    print!("{}", cfg.to_toml_string());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are configuration errors
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Stability(a) => stability(a),
        Command::GsEnergy {
            omega_a,
            omega_b,
            g,
        } => gs_energy(*omega_a, *omega_b, *g),
        Command::ValidateConfig(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
