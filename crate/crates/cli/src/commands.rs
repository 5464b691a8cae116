use std::path::Path;

use animfa::dynamics::{integrate_many, Trajectory};
use animfa::equilibria::{all_equilibria, r0, r0_aid};
use animfa::geometry::{estimate_roa, separatrix, simulated_basin_labels, unit_grid, RegionOfAttraction, Separatrix};
use animfa::output::{self, fmt_f64, EntryExitRow};
use animfa::slowfast::{entry_exit, simulate_slowfast_with, SlowFastParams, DEFAULT_Y_THRESH};
use animfa::stability::{classify_equilibrium, dfe_case_analysis, Classification, StabilityReport};
use animfa::{
    integrate, Builtin, Equilibrium, FunctionalResponsePair, IntegratorConfig, LinkDensity, ModelParams, State,
    Terminal, R0,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Command, Format, ModelSource, RunConfig};
use crate::error::CliError;
use crate::svg::Canvas;

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        Command::Equilibria => equilibria(cfg),
        Command::Simulate => simulate(cfg),
        Command::PhasePortrait => phase_portrait(cfg),
        Command::Basin => basin(cfg),
        Command::Sweep => sweep(cfg),
        Command::EntryExit => entry_exit_table(cfg),
        Command::R0 => reproduction_number(cfg),
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ParamsDoc {
    tau: f64,
    omega: f64,
    zeta: f64,
    xi: f64,
}

impl From<&ModelParams> for ParamsDoc {
    fn from(p: &ModelParams) -> Self {
        ParamsDoc {
            tau: p.tau(),
            omega: p.omega(),
            zeta: p.zeta(),
            xi: p.xi(),
        }
    }
}

#[derive(Serialize)]
struct EquilibriumDoc {
    kind: animfa::EquilibriumKind,
    y: f64,
    z: LinkDensity,
    multiplicity: animfa::roots::Multiplicity,
    /// Absent for a free link density unless `--z0` picks a point.
    stability: Option<StabilityReport>,
}

#[derive(Serialize)]
struct EquilibriaDoc {
    model: String,
    params: ParamsDoc,
    r0: R0,
    #[serde(skip_serializing_if = "Option::is_none")]
    r0_aid: Option<f64>,
    dfe_case: u8,
    equilibria: Vec<EquilibriumDoc>,
}

fn stability_of(
    p: &ModelParams,
    fr: &FunctionalResponsePair,
    eq: &Equilibrium,
    z0: Option<f64>,
) -> Option<StabilityReport> {
    match (eq.z, z0) {
        (LinkDensity::Value(_), _) => Some(classify_equilibrium(p, fr, eq, 0.0)),
        (LinkDensity::Free, Some(z)) => Some(classify_equilibrium(p, fr, eq, z)),
        (LinkDensity::Free, None) => None,
    }
}

fn is_aid(cfg: &RunConfig) -> bool {
    cfg.model == ModelSource::Builtin(Builtin::Aid)
}

fn equilibria(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.params()?;
    let fr = &cfg.responses;
    let format = cfg.format_or(Format::Json, &[Format::Json, Format::Csv])?;
    let eqs = all_equilibria(&p, fr);
    let docs: Vec<EquilibriumDoc> = eqs
        .iter()
        .map(|e| EquilibriumDoc {
            kind: e.kind,
            y: e.y,
            z: e.z,
            multiplicity: e.multiplicity,
            stability: stability_of(&p, fr, e, cfg.z0),
        })
        .collect();
    let text = match format {
        Format::Csv => {
            let mut s = String::from("kind,y,z,classification\n");
            for d in &docs {
                let kind = match d.kind {
                    animfa::EquilibriumKind::Dfe => "DFE",
                    animfa::EquilibriumKind::Endemic => "EE",
                };
                let z = d.z.value().map(fmt_f64).unwrap_or_else(|| "free_variable".into());
                let class = d.stability.map_or("undetermined", |r| r.classification.name());
                s.push_str(&format!("{kind},{},{z},{class}\n", fmt_f64(d.y)));
            }
            s
        }
        _ => output::to_json(&EquilibriaDoc {
            model: cfg.model.label(),
            params: ParamsDoc::from(&p),
            r0: r0(&p, fr),
            r0_aid: is_aid(cfg).then(|| r0_aid(&p)),
            dfe_case: dfe_case_analysis(&p, fr).case.number(),
            equilibria: docs,
        })?,
    };
    emit(cfg, &text)
}

fn start_state(cfg: &RunConfig) -> Result<State, CliError> {
    let (Some(y0), Some(z0)) = (cfg.y0, cfg.z0) else {
        return Err(CliError::Config("--y0 and --z0 are required".into()));
    };
    State::new(y0, z0).map_err(|e| CliError::Config(e.to_string()))
}

fn draw_equilibria(canvas: &mut Canvas, p: &ModelParams, fr: &FunctionalResponsePair) {
    for e in all_equilibria(p, fr) {
        if let Some(s) = e.state() {
            let stable = classify_equilibrium(p, fr, &e, 0.0).classification.is_stable();
            canvas.equilibrium(s.to_array(), stable);
        }
    }
}

fn orbit_points(traj: &Trajectory) -> Vec<[f64; 2]> {
    traj.samples.iter().map(|s| [s.y, s.z]).collect()
}

#[derive(Serialize)]
struct SimulationDoc {
    terminal: &'static str,
    converged_to: Option<Equilibrium>,
    end: animfa::Sample,
    steps: usize,
    clamp_events: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    z_in: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    measured_exit: Option<f64>,
}

fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.params()?;
    let fr = &cfg.responses;
    let s0 = start_state(cfg)?;
    let format = cfg.format_or(Format::Csv, &[Format::Csv, Format::Json, Format::Svg])?;

    let (traj, z_in, measured_exit) = match cfg.epsilon {
        Some(eps) => {
            let sf = SlowFastParams::new(p, eps).map_err(|e| CliError::Config(e.to_string()))?;
            let mut icfg = cfg.integrator(100.0 / eps)?;
            if cfg.rtol.is_none() && cfg.atol.is_none() {
                icfg.rtol = 1e-10;
                icfg.atol = 1e-24;
            }
            let y_thresh = cfg.y_thresh.unwrap_or(DEFAULT_Y_THRESH);
            let run =
                simulate_slowfast_with(&sf, fr, &s0, &icfg, y_thresh).map_err(|e| CliError::Config(e.to_string()))?;
            (run.trajectory, run.z_in, run.measured_exit)
        }
        None => {
            let icfg = cfg.integrator(100.0)?;
            let traj = integrate(&p, fr, &s0, &icfg).map_err(|e| CliError::Config(e.to_string()))?;
            (traj, None, None)
        }
    };

    let text = match format {
        Format::Csv => output::trajectory_csv(&traj.samples),
        Format::Json => output::to_json(&SimulationDoc {
            terminal: traj.terminal.name(),
            converged_to: match traj.terminal {
                Terminal::Converged(e) => Some(e),
                _ => None,
            },
            end: traj.end,
            steps: traj.steps,
            clamp_events: traj.clamp_events,
            z_in,
            measured_exit,
        })?,
        Format::Svg => {
            let mut canvas = Canvas::new();
            canvas.polyline(&orbit_points(&traj), "steelblue", 1.5);
            draw_equilibria(&mut canvas, &p, fr);
            canvas.start(s0.to_array());
            canvas.finish()
        }
    };
    emit(cfg, &text)?;
    if traj.terminal == Terminal::StepFailure {
        return Err(CliError::Integration(format!(
            "step size underflow at t = {} ({}, {})",
            traj.end.t, traj.end.y, traj.end.z
        )));
    }
    Ok(())
}

fn first_saddle(p: &ModelParams, fr: &FunctionalResponsePair, eqs: &[Equilibrium]) -> Option<Equilibrium> {
    eqs.iter()
        .copied()
        .find(|e| e.state().is_some() && classify_equilibrium(p, fr, e, 0.0).classification == Classification::Saddle)
}

fn phase_portrait(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.params()?;
    let fr = &cfg.responses;
    let format = cfg.format_or(Format::Svg, &[Format::Svg, Format::Csv])?;
    let n = cfg.grid.unwrap_or(6);
    let icfg = cfg.integrator(200.0)?;
    let starts: Vec<State> = (0..n)
        .flat_map(|iz| {
            (0..n).map(move |iy| State::new((iy as f64 + 0.5) / n as f64, (iz as f64 + 0.5) / n as f64).unwrap())
        })
        .collect();
    let runs = integrate_many(&p, fr, &starts, &icfg).map_err(|e| CliError::Config(e.to_string()))?;

    let text = match format {
        Format::Csv => {
            let mut s = String::from("orbit,t,y,z\n");
            for (k, traj) in runs.iter().enumerate() {
                for x in &traj.samples {
                    s.push_str(&format!("{k},{},{},{}\n", fmt_f64(x.t), fmt_f64(x.y), fmt_f64(x.z)));
                }
            }
            s
        }
        _ => {
            let mut canvas = Canvas::new();
            for traj in &runs {
                canvas.polyline(&orbit_points(traj), "steelblue", 1.0);
            }
            let eqs = all_equilibria(&p, fr);
            if let Some(saddle) = first_saddle(&p, fr, &eqs) {
                let sep = separatrix(&p, fr, &saddle)?;
                canvas.polyline(&sep.polyline, "deepskyblue", 2.5);
            }
            for s in &starts {
                canvas.start(s.to_array());
            }
            draw_equilibria(&mut canvas, &p, fr);
            canvas.finish()
        }
    };
    emit(cfg, &text)?;
    if runs.iter().any(|t| t.terminal == Terminal::StepFailure) {
        return Err(CliError::Integration(
            "step size underflow in at least one orbit".into(),
        ));
    }
    Ok(())
}

fn basin_svg(
    p: &ModelParams,
    fr: &FunctionalResponsePair,
    sep: Option<&Separatrix>,
    roas: &[RegionOfAttraction],
) -> String {
    let mut canvas = Canvas::new();
    for roa in roas {
        canvas.polygon(&roa.level_curve(roa.c_star, 720), "darkorange", "orange");
    }
    if let Some(sep) = sep {
        canvas.polyline(&sep.polyline, "deepskyblue", 2.5);
    }
    draw_equilibria(&mut canvas, p, fr);
    canvas.finish()
}

fn basin(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.params()?;
    let fr = &cfg.responses;
    let format = cfg.format_or(Format::Json, &[Format::Json, Format::Csv, Format::Svg])?;
    let eqs = all_equilibria(&p, fr);
    let stable: Vec<Equilibrium> = eqs
        .iter()
        .copied()
        .filter(|e| e.state().is_some() && classify_equilibrium(&p, fr, e, 0.0).classification.is_stable())
        .collect();
    if stable.len() < 2 {
        return Err(CliError::Regime(format!(
            "basin needs at least two stable equilibria, found {}",
            stable.len()
        )));
    }
    let roas = stable
        .iter()
        .map(|e| estimate_roa(&p, fr, e))
        .collect::<Result<Vec<_>, _>>()?;
    let sep = first_saddle(&p, fr, &eqs).map(|s| separatrix(&p, fr, &s)).transpose()?;

    if let Some(sep) = &sep {
        let n = cfg.grid.unwrap_or(21);
        let grid: Vec<State> = unit_grid(n)
            .into_iter()
            .filter(|s| s.y() > 0.0 && s.y() < 1.0 && s.z() > 0.0 && s.z() < 1.0)
            .collect();
        let icfg = cfg.integrator(1e4)?;
        let labels = simulated_basin_labels(&p, fr, &grid, &stable, &icfg)?;
        let attractors: Vec<State> = stable.iter().map(|e| e.state().unwrap()).collect();
        let agree = grid
            .iter()
            .zip(&labels)
            .filter(|(s, l)| l.is_some() && sep.attractor_side(s.to_array(), &attractors) == **l)
            .count();
        eprintln!(
            "separatrix side agrees with simulation at {agree}/{} grid points",
            grid.len()
        );
    }

    let sep_csv = sep
        .as_ref()
        .map(output::separatrix_csv)
        .unwrap_or_else(|| "y,z\n".into());
    let roa_json = output::to_json(&roas)?;
    let svg = basin_svg(&p, fr, sep.as_ref(), &roas);

    match &cfg.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write_file(dir, "separatrix.csv", &sep_csv)?;
            write_file(dir, "roa.json", &roa_json)?;
            write_file(dir, "basin.svg", &svg)?;
            Ok(())
        }
        None => emit(
            cfg,
            match format {
                Format::Csv => &sep_csv,
                Format::Svg => &svg,
                Format::Json => &roa_json,
            },
        ),
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.format_or(Format::Csv, &[Format::Csv])?;
    let (Some((t0, t1)), Some((w0, w1))) = (cfg.tau_range, cfg.omega_range) else {
        return Err(CliError::Config("sweep needs --tau-range and --omega-range".into()));
    };
    let n = cfg.grid.unwrap_or(21);
    let fr = &cfg.responses;
    let cells: Vec<(f64, f64)> = axis(t0, t1, n)
        .into_iter()
        .flat_map(|t| axis(w0, w1, n).into_iter().map(move |w| (t, w)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(tau, omega)| -> Result<String, CliError> {
            let p = cfg.params_at(tau, Some(omega))?;
            let eqs = all_equilibria(&p, fr);
            let dfe_class = dfe_case_analysis(&p, fr).verdict.name();
            let ee: Vec<&str> = eqs[1..]
                .iter()
                .map(|e| classify_equilibrium(&p, fr, e, 0.0).classification.name())
                .collect();
            let r0 = match r0(&p, fr) {
                R0::Value(v) => fmt_f64(v),
                R0::NotApplicable => "not_applicable".into(),
            };
            Ok(format!(
                "{},{},{r0},{},{dfe_class},{}\n",
                fmt_f64(tau),
                fmt_f64(omega),
                ee.len(),
                ee.join(";")
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut text = String::from("tau,omega,r0,num_ee,dfe_class,ee_classes\n");
    text.extend(rows);
    emit(cfg, &text)
}

fn entry_exit_table(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.format_or(Format::Csv, &[Format::Csv])?;
    let tau = cfg.require_tau()?;
    if tau.is_nan() || tau <= 1.0 {
        return Err(CliError::Config(format!("entry-exit needs tau > 1, got {tau}")));
    }
    let z_ins = cfg
        .z_in
        .clone()
        .unwrap_or_else(|| (0..10).map(|k| k as f64 / (10.0 * tau)).collect());
    if let Some(bad) = z_ins.iter().find(|&&z| !(0.0..1.0 / tau).contains(&z)) {
        return Err(CliError::Config(format!(
            "z_in = {bad} must lie in [0, 1/tau) = [0, {})",
            1.0 / tau
        )));
    }
    let measured = match cfg.epsilon {
        Some(eps) => {
            let sf = SlowFastParams::new(cfg.params()?, eps).map_err(|e| CliError::Config(e.to_string()))?;
            let y_thresh = cfg.y_thresh.unwrap_or(DEFAULT_Y_THRESH);
            let icfg = IntegratorConfig {
                rtol: cfg.rtol.unwrap_or(1e-10),
                atol: cfg.atol.unwrap_or(1e-24),
                convergence_eps: None,
                ..cfg.integrator(10.0 / eps)?
            };
            z_ins
                .par_iter()
                .map(|&z| {
                    let s0 = State::new(y_thresh, z).map_err(|e| CliError::Config(e.to_string()))?;
                    let run = simulate_slowfast_with(&sf, &cfg.responses, &s0, &icfg, y_thresh)
                        .map_err(|e| CliError::Config(e.to_string()))?;
                    if run.trajectory.terminal == Terminal::StepFailure {
                        return Err(CliError::Integration(format!("step size underflow from z_in = {z}")));
                    }
                    Ok(run.measured_exit)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        None => vec![None; z_ins.len()],
    };
    let rows = z_ins
        .iter()
        .zip(measured)
        .map(|(&z_in, m)| {
            Ok(EntryExitRow {
                tau,
                z_in,
                z_out_predicted: entry_exit(tau, z_in).map_err(|e| CliError::Config(e.to_string()))?,
                z_out_measured: m,
                epsilon: cfg.epsilon,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    emit(cfg, &output::entry_exit_csv(&rows))
}

#[derive(Serialize)]
struct R0Doc {
    model: String,
    params: ParamsDoc,
    r0: R0,
    #[serde(skip_serializing_if = "Option::is_none")]
    r0_aid: Option<f64>,
}

fn reproduction_number(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.format_or(Format::Json, &[Format::Json])?;
    let p = cfg.params()?;
    let doc = R0Doc {
        model: cfg.model.label(),
        params: ParamsDoc::from(&p),
        r0: r0(&p, &cfg.responses),
        r0_aid: is_aid(cfg).then(|| r0_aid(&p)),
    };
    emit(cfg, &output::to_json(&doc)?)
}
