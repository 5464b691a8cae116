use std::path::{Path, PathBuf};

use animfa::responses::PolynomialSpec;
use animfa::{Builtin, FunctionalResponsePair, IntegratorConfig, ModelParams};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "animfa",
    version,
    about = "Adaptive SIS mean-field model: equilibria, dynamics, basins and slow-fast analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Disease-free and endemic equilibria with their stability
    Equilibria,
    /// Integrate one trajectory from (--y0, --z0)
    Simulate,
    /// Orbits from a grid of starting points
    PhasePortrait,
    /// Separatrix and Lyapunov regions of attraction in a bistable regime
    Basin,
    /// Equilibrium counts and classes over a (tau, omega) grid
    Sweep,
    /// Entry-exit map of the slow passage along y = 0
    EntryExit,
    /// Basic reproduction number
    R0,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Equilibria => "equilibria",
            Command::Simulate => "simulate",
            Command::PhasePortrait => "phase-portrait",
            Command::Basin => "basin",
            Command::Sweep => "sweep",
            Command::EntryExit => "entry-exit",
            Command::R0 => "r0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Built-in pair (rlad, linear_break, asis, aid) or a JSON file {"fbr": [...], "fcr": [...]};
    /// entry-exit defaults to linear_break
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// JSON file with any of the options below; flags take precedence
    #[arg(long, global = true, value_name = "JSON")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Sets zeta = omega and xi = 1; excludes --zeta/--xi
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true)]
    pub zeta: Option<f64>,
    #[arg(long, global = true)]
    pub xi: Option<f64>,
    /// Time-scale separation of the network rates (simulate, entry-exit)
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub y0: Option<f64>,
    #[arg(long, global = true)]
    pub z0: Option<f64>,
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    #[arg(long, global = true)]
    pub atol: Option<f64>,
    /// Grid points per axis (phase-portrait, basin, sweep)
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Worker threads; defaults to the number of logical CPUs
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file (basin: output directory)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Sweep range for tau, as LO:HI
    #[arg(long = "tau-range", global = true, value_name = "LO:HI")]
    pub tau_range: Option<String>,
    /// Sweep range for omega, as LO:HI
    #[arg(long = "omega-range", global = true, value_name = "LO:HI")]
    pub omega_range: Option<String>,
    /// Comma-separated entry points for entry-exit
    #[arg(long = "z-in", global = true, value_name = "LIST")]
    pub z_in: Option<String>,
    /// Prevalence threshold of the slab around y = 0
    #[arg(long = "y-thresh", global = true)]
    pub y_thresh: Option<f64>,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<String>,
    tau: Option<f64>,
    omega: Option<f64>,
    zeta: Option<f64>,
    xi: Option<f64>,
    epsilon: Option<f64>,
    y0: Option<f64>,
    z0: Option<f64>,
    t_end: Option<f64>,
    rtol: Option<f64>,
    atol: Option<f64>,
    grid: Option<usize>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
    tau_range: Option<[f64; 2]>,
    omega_range: Option<[f64; 2]>,
    z_in: Option<Vec<f64>>,
    y_thresh: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    Builtin(Builtin),
    Polynomial(PathBuf),
}

impl ModelSource {
    pub fn label(&self) -> String {
        match self {
            ModelSource::Builtin(b) => b.name().to_string(),
            ModelSource::Polynomial(p) => p.display().to_string(),
        }
    }
}

/// Fully resolved options for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelSource,
    pub responses: FunctionalResponsePair,
    pub tau: Option<f64>,
    pub omega: Option<f64>,
    pub zeta: Option<f64>,
    pub xi: Option<f64>,
    pub epsilon: Option<f64>,
    pub y0: Option<f64>,
    pub z0: Option<f64>,
    pub t_end: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub grid: Option<usize>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub tau_range: Option<(f64, f64)>,
    pub omega_range: Option<(f64, f64)>,
    pub z_in: Option<Vec<f64>>,
    pub y_thresh: Option<f64>,
}

fn parse_range(flag: &str, text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Config(format!("--{flag} expects LO:HI with 0 < LO <= HI, got '{text}'"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    check_range(flag, (lo, hi)).map_err(|_| bad())
}

fn check_range(flag: &str, (lo, hi): (f64, f64)) -> Result<(f64, f64), CliError> {
    if lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi {
        Ok((lo, hi))
    } else {
        Err(CliError::Config(format!(
            "{flag} must satisfy 0 < LO <= HI, got [{lo}, {hi}]"
        )))
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("--z-in: '{s}' is not a number")))
        })
        .collect()
}

fn load_model(name: &str, base_dir: Option<&Path>) -> Result<(ModelSource, FunctionalResponsePair), CliError> {
    if let Ok(b) = name.parse::<Builtin>() {
        return Ok((ModelSource::Builtin(b), FunctionalResponsePair::builtin(b)));
    }
    let mut path = PathBuf::from(name);
    if path.is_relative() && !path.exists() {
        if let Some(dir) = base_dir {
            path = dir.join(path);
        }
    }
    let text = std::fs::read_to_string(&path).map_err(|e| {
        CliError::Config(format!(
            "--model '{name}' is neither a built-in (rlad, linear_break, asis, aid) nor a readable file: {e}"
        ))
    })?;
    let spec: PolynomialSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let pair =
        FunctionalResponsePair::from_spec(&spec).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok((ModelSource::Polynomial(path), pair))
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let c = &cli.common;
        let (file, base_dir) = match &c.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                let file: FileConfig =
                    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                (file, path.parent().map(Path::to_path_buf))
            }
            None => (FileConfig::default(), None),
        };

        let model_name = c
            .model
            .clone()
            .or(file.model)
            .or_else(|| (cli.command == Command::EntryExit).then(|| "linear_break".to_string()))
            .ok_or_else(|| CliError::Config("--model is required".into()))?;
        let (model, responses) = load_model(&model_name, base_dir.as_deref())?;

        let tau_range = match (&c.tau_range, file.tau_range) {
            (Some(t), _) => Some(parse_range("tau-range", t)?),
            (None, Some([a, b])) => Some(check_range("tau_range", (a, b))?),
            _ => None,
        };
        let omega_range = match (&c.omega_range, file.omega_range) {
            (Some(t), _) => Some(parse_range("omega-range", t)?),
            (None, Some([a, b])) => Some(check_range("omega_range", (a, b))?),
            _ => None,
        };
        let z_in = match (&c.z_in, file.z_in) {
            (Some(t), _) => Some(parse_list(t)?),
            (None, list) => list,
        };

        let cfg = RunConfig {
            command: cli.command,
            model,
            responses,
            tau: c.tau.or(file.tau),
            omega: c.omega.or(file.omega),
            zeta: c.zeta.or(file.zeta),
            xi: c.xi.or(file.xi),
            epsilon: c.epsilon.or(file.epsilon),
            y0: c.y0.or(file.y0),
            z0: c.z0.or(file.z0),
            t_end: c.t_end.or(file.t_end),
            rtol: c.rtol.or(file.rtol),
            atol: c.atol.or(file.atol),
            grid: c.grid.or(file.grid),
            jobs: c.jobs.or(file.jobs),
            out: c.out.clone().or(file.out),
            format: c.format.or(file.format),
            tau_range,
            omega_range,
            z_in,
            y_thresh: c.y_thresh.or(file.y_thresh),
        };
        cfg.check_exclusions()?;
        Ok(cfg)
    }

    fn check_exclusions(&self) -> Result<(), CliError> {
        if self.omega.is_some() && (self.zeta.is_some() || self.xi.is_some()) {
            return Err(CliError::Config(
                "give either --omega or --zeta with --xi, not both".into(),
            ));
        }
        if self.zeta.is_some() != self.xi.is_some() {
            return Err(CliError::Config("--zeta and --xi must be given together".into()));
        }
        if self.epsilon.is_some() && !matches!(self.command, Command::Simulate | Command::EntryExit) {
            return Err(CliError::Config(format!(
                "--epsilon applies only to simulate and entry-exit, not {}",
                self.command.name()
            )));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        if self.grid.is_some_and(|g| g < 2) {
            return Err(CliError::Config("--grid must be at least 2".into()));
        }
        Ok(())
    }

    pub fn require_tau(&self) -> Result<f64, CliError> {
        self.tau.ok_or_else(|| CliError::Config("--tau is required".into()))
    }

    /// `(zeta, xi)`: from `--zeta/--xi`, else `(omega, 1)`, else `(1, 1)`.
    pub fn network_rates(&self) -> (f64, f64) {
        match (self.omega, self.zeta, self.xi) {
            (Some(w), _, _) => (w, 1.0),
            (None, Some(z), Some(x)) => (z, x),
            _ => (1.0, 1.0),
        }
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let tau = self.require_tau()?;
        self.params_at(tau, None)
    }

    /// Parameters at `tau`, with `omega` overriding the configured network rates.
    pub fn params_at(&self, tau: f64, omega: Option<f64>) -> Result<ModelParams, CliError> {
        let (zeta, xi) = match omega {
            Some(w) => (w, 1.0),
            None => self.network_rates(),
        };
        ModelParams::new(tau, zeta, xi).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn integrator(&self, default_t_end: f64) -> Result<IntegratorConfig, CliError> {
        let d = IntegratorConfig::default();
        let cfg = IntegratorConfig {
            rtol: self.rtol.unwrap_or(d.rtol),
            atol: self.atol.unwrap_or(d.atol),
            t_end: self.t_end.unwrap_or(default_t_end),
            ..d
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn format_or(&self, default: Format, allowed: &[Format]) -> Result<Format, CliError> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(CliError::Config(format!(
                "{} does not support --format {:?}",
                self.command.name(),
                f
            )))
        }
    }
}
