//! Time integration of the model, convergence detection, and the logistic
//! closed form available when the link density is constant.

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibria::{all_equilibria, Equilibrium, EquilibriumKind, LinkDensity};
use crate::error::{Error, Result};
use crate::integrator::{self, Flow, SolverOptions, Status, Step};
use crate::model::{rhs, ModelParams, State, CLAMP_WINDOW};
use crate::responses::FunctionalResponsePair;
use crate::roots::Multiplicity;

/// Final states within this distance of an equilibrium are attributed to it.
pub const CONVERGENCE_MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub t_end: f64,
    /// Stop once `‖f(u)‖∞` drops below this; `None` integrates to `t_end`.
    pub convergence_eps: Option<f64>,
    /// Record these times (strictly increasing, within `[0, t_end]`) using
    /// dense output; `None` records every accepted step.
    pub sample_times: Option<Vec<f64>>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: 1.0,
            t_end: 100.0,
            convergence_eps: Some(1e-10),
            sample_times: None,
        }
    }
}

impl IntegratorConfig {
    pub fn with_t_end(t_end: f64) -> Self {
        IntegratorConfig {
            t_end,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return bad(format!(
                "rtol and atol must be positive (got {}, {})",
                self.rtol, self.atol
            ));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end must be positive and finite (got {})", self.t_end));
        }
        if !(self.max_step > 0.0) {
            return bad(format!("max_step must be positive (got {})", self.max_step));
        }
        if let Some(eps) = self.convergence_eps {
            if !(eps > 0.0) {
                return bad(format!("convergence_eps must be positive (got {eps})"));
            }
        }
        if let Some(times) = &self.sample_times {
            if times.windows(2).any(|w| !(w[1] > w[0])) {
                return bad("sample times must be strictly increasing".into());
            }
            if times.iter().any(|&t| !(0.0..=self.t_end).contains(&t)) {
                return bad("sample times must lie in [0, t_end]".into());
            }
        }
        Ok(())
    }

    pub(crate) fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            rtol: self.rtol,
            atol: self.atol,
            max_step: self.max_step,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Terminal {
    ReachedTEnd,
    Converged(Equilibrium),
    StepFailure,
}

impl Terminal {
    pub fn name(&self) -> &'static str {
        match self {
            Terminal::ReachedTEnd => "reached_t_end",
            Terminal::Converged(_) => "converged",
            Terminal::StepFailure => "step_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub terminal: Terminal,
    /// State where integration stopped (not necessarily a requested sample).
    pub end: Sample,
    pub steps: usize,
    pub clamp_events: usize,
}

impl Trajectory {
    pub fn end_state(&self) -> Option<State> {
        State::new(self.end.y, self.end.z).ok()
    }

    /// Whether every sample lies in `[−tol, 1 + tol]²`.
    pub fn stays_within(&self, tol: f64) -> bool {
        self.samples
            .iter()
            .chain(std::iter::once(&self.end))
            .all(|s| s.y >= -tol && s.y <= 1.0 + tol && s.z >= -tol && s.z <= 1.0 + tol)
    }
}

fn snap(v: f64) -> f64 {
    if (-CLAMP_WINDOW..0.0).contains(&v) {
        0.0
    } else if v > 1.0 && v <= 1.0 + CLAMP_WINDOW {
        1.0
    } else {
        v
    }
}

fn sample(t: f64, u: [f64; 2]) -> Sample {
    Sample {
        t,
        y: snap(u[0]),
        z: snap(u[1]),
    }
}

pub(crate) struct RawRun {
    pub samples: Vec<Sample>,
    pub end: Sample,
    pub status: Status,
    pub converged: bool,
    pub steps: usize,
    pub clamp_events: usize,
}

/// Shared driver: sampling, convergence test, and an extra per-step hook.
pub(crate) fn run_field<F, H>(field: F, u0: [f64; 2], cfg: &IntegratorConfig, mut hook: H) -> RawRun
where
    F: Fn([f64; 2]) -> [f64; 2],
    H: FnMut(&Step) -> Flow,
{
    let mut samples = Vec::new();
    let mut pending: &[f64] = cfg.sample_times.as_deref().unwrap_or(&[]);
    let dense = cfg.sample_times.is_some();
    if dense {
        while let Some((&t, rest)) = pending.split_first() {
            if t > 0.0 {
                break;
            }
            samples.push(sample(t, u0));
            pending = rest;
        }
    } else {
        samples.push(sample(0.0, u0));
    }

    let f0 = field(u0);
    let initially_at_rest = cfg
        .convergence_eps
        .is_some_and(|eps| f0[0].abs().max(f0[1].abs()) < eps);
    if initially_at_rest {
        return RawRun {
            samples,
            end: sample(0.0, u0),
            status: Status::Stopped,
            converged: true,
            steps: 0,
            clamp_events: 0,
        };
    }

    let mut converged = false;
    let opts = cfg.solver_options();
    let outcome = integrator::solve(&field, 0.0, u0, cfg.t_end, &opts, |step| {
        if dense {
            while let Some((&t, rest)) = pending.split_first() {
                if t > step.t1 {
                    break;
                }
                let u = if t == step.t1 { step.u1 } else { step.interpolate(t) };
                samples.push(sample(t, u));
                pending = rest;
            }
        } else {
            samples.push(sample(step.t1, step.u1));
        }
        if hook(step) == Flow::Stop {
            return Flow::Stop;
        }
        if let Some(eps) = cfg.convergence_eps {
            if step.f1[0].abs().max(step.f1[1].abs()) < eps {
                converged = true;
                return Flow::Stop;
            }
        }
        Flow::Continue
    });
    RawRun {
        samples,
        end: sample(outcome.t, outcome.u),
        status: outcome.status,
        converged,
        steps: outcome.accepted,
        clamp_events: outcome.clamp_events,
    }
}

/// Attribute a resting state to one of `eqs`, or describe it directly.
fn resting_equilibrium(end: &Sample, eqs: &[Equilibrium]) -> Equilibrium {
    let state = State::new(end.y, end.z).ok();
    if let Some(s) = state {
        if let Some(eq) = nearest_within(&s, eqs, CONVERGENCE_MATCH_TOL) {
            return eq;
        }
    }
    let kind = if end.y.abs() < CONVERGENCE_MATCH_TOL {
        EquilibriumKind::Dfe
    } else {
        EquilibriumKind::Endemic
    };
    Equilibrium {
        y: if kind == EquilibriumKind::Dfe { 0.0 } else { end.y },
        z: LinkDensity::Value(end.z),
        kind,
        multiplicity: Multiplicity::Simple,
        r0_at_params: None,
    }
}

fn nearest_within(s: &State, eqs: &[Equilibrium], tol: f64) -> Option<Equilibrium> {
    eqs.iter()
        .map(|e| (e.distance_to(s), e))
        .filter(|(d, _)| *d <= tol)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, e)| *e)
}

pub(crate) fn finish(run: RawRun, p: &ModelParams, fr: &FunctionalResponsePair) -> Trajectory {
    let terminal = if run.converged {
        Terminal::Converged(resting_equilibrium(&run.end, &all_equilibria(p, fr)))
    } else {
        match run.status {
            Status::Finished | Status::Stopped => Terminal::ReachedTEnd,
            Status::StepUnderflow | Status::MaxStepsExceeded => Terminal::StepFailure,
        }
    };
    Trajectory {
        samples: run.samples,
        terminal,
        end: run.end,
        steps: run.steps,
        clamp_events: run.clamp_events,
    }
}

/// Integrate from `s0` with adaptive Dormand–Prince 5(4).
pub fn integrate(
    p: &ModelParams,
    fr: &FunctionalResponsePair,
    s0: &State,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let run = run_field(|u| rhs(p, fr, u), s0.to_array(), cfg, |_| Flow::Continue);
    Ok(finish(run, p, fr))
}

/// Integrate many initial conditions in parallel; output order follows input order.
pub fn integrate_many(
    p: &ModelParams,
    fr: &FunctionalResponsePair,
    starts: &[State],
    cfg: &IntegratorConfig,
) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    Ok(starts
        .par_iter()
        .map(|s0| {
            let run = run_field(|u| rhs(p, fr, u), s0.to_array(), cfg, |_| Flow::Continue);
            finish(run, p, fr)
        })
        .collect())
}

/// The equilibrium (within `1e-6`) at which a trajectory came to rest.
pub fn detect_convergence_target(traj: &Trajectory, eqs: &[Equilibrium]) -> Option<Equilibrium> {
    if traj.terminal == Terminal::StepFailure {
        return None;
    }
    let s = traj.end_state()?;
    nearest_within(&s, eqs, CONVERGENCE_MATCH_TOL)
}

/// Logistic curve `y∞ / (1 + exp(−K(t − t0)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogisticCurve {
    pub y_inf: f64,
    pub rate: f64,
    pub t_peak: f64,
}

impl LogisticCurve {
    fn with_rate(p: &ModelParams, y0: f64, rate: f64) -> Result<Self> {
        let tau = p.tau();
        let omega = p.omega();
        if tau <= 1.0 + omega {
            return Err(Error::Domain(format!(
                "logistic solution needs tau > 1 + omega (tau = {tau}, omega = {omega})"
            )));
        }
        let y_inf = 1.0 - (1.0 + omega) / tau;
        if !(y0 > 0.0 && y0 < y_inf) {
            return Err(Error::Domain(format!("y0 = {y0} must lie in (0, {y_inf})")));
        }
        Ok(LogisticCurve {
            y_inf,
            rate,
            t_peak: (y_inf / y0 - 1.0).ln() / rate,
        })
    }

    /// Growth rate `K = τ − 1`, as the closed form is usually quoted.
    pub fn as_published(p: &ModelParams, y0: f64) -> Result<Self> {
        Self::with_rate(p, y0, p.tau() - 1.0)
    }

    /// Growth rate `K = τ/(1 + ω) − 1`, which solves the prevalence equation
    /// exactly when `z ≡ 1/(1 + ω)`.
    pub fn exact(p: &ModelParams, y0: f64) -> Result<Self> {
        Self::with_rate(p, y0, p.tau() / (1.0 + p.omega()) - 1.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.y_inf / (1.0 + (-self.rate * (t - self.t_peak)).exp())
    }
}

/// Logistic prevalence for constant link density, with `K = τ − 1`.
///
/// This reproduces the commonly quoted formula; it solves the model exactly
/// only in the limit `ω → 0`. See [`LogisticCurve::exact`] for the rate that
/// matches the dynamics for every `ω`.
pub fn logistic_solution(p: &ModelParams, y0: f64, t: f64) -> Result<f64> {
    Ok(LogisticCurve::as_published(p, y0)?.eval(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{dfe, endemic_equilibria};
    use crate::responses::Builtin;

    fn pair(b: Builtin) -> FunctionalResponsePair {
        FunctionalResponsePair::builtin(b)
    }

    #[test]
    fn y_axis_is_invariant() {
        let p = ModelParams::new(3.0, 1.0, 1.0).unwrap();
        let fr = pair(Builtin::LinearBreak);
        let traj = integrate(&p, &fr, &State::new(0.0, 0.2).unwrap(), &IntegratorConfig::default()).unwrap();
        assert!(traj.samples.iter().all(|s| s.y == 0.0));
        // z' = ξ(1 − z) on the axis
        for s in &traj.samples {
            assert!((s.z - (1.0 - 0.8 * (-s.t).exp())).abs() < 1e-7);
        }
        match traj.terminal {
            Terminal::Converged(eq) => assert_eq!(eq, dfe(&p, &fr)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn linear_break_converges_to_endemic_state() {
        let p = ModelParams::new(5.4, 1.0, 1.0).unwrap();
        let fr = pair(Builtin::LinearBreak);
        let ee = endemic_equilibria(&p, &fr)[0];
        for &(y0, z0) in &[(0.01, 0.1), (0.9, 0.9), (0.5, 0.05), (0.99, 0.01)] {
            let traj = integrate(
                &p,
                &fr,
                &State::new(y0, z0).unwrap(),
                &IntegratorConfig::with_t_end(1e4),
            )
            .unwrap();
            match traj.terminal {
                Terminal::Converged(eq) => {
                    assert_eq!(eq, ee);
                    assert!(ee.distance_to(&traj.end_state().unwrap()) < 1e-8);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn exact_logistic_matches_integration() {
        let p = ModelParams::new(4.0, 1.0, 1.0).unwrap();
        let fr = pair(Builtin::Rlad);
        let curve = LogisticCurve::exact(&p, 0.01).unwrap();
        let times: Vec<f64> = (0..100).map(|i| 10.0 * i as f64 / 99.0).collect();
        let cfg = IntegratorConfig {
            t_end: 10.0,
            convergence_eps: None,
            sample_times: Some(times),
            ..IntegratorConfig::default()
        };
        let traj = integrate(&p, &fr, &State::new(0.01, 0.5).unwrap(), &cfg).unwrap();
        assert_eq!(traj.samples.len(), 100);
        let err = traj
            .samples
            .iter()
            .map(|s| (s.y - curve.eval(s.t)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn logistic_examples() {
        let p = ModelParams::with_omega(4.0, 1.0).unwrap();
        let c = LogisticCurve::as_published(&p, 0.01).unwrap();
        assert_eq!(c.y_inf, 0.5);
        assert!((c.t_peak - 49f64.ln() / 3.0).abs() < 1e-15);
        assert!((c.t_peak - 1.29726).abs() < 5e-5);
        assert!((logistic_solution(&p, 0.01, c.t_peak).unwrap() - 0.25).abs() < 1e-15);
        assert!((logistic_solution(&p, 0.01, 1e3).unwrap() - 0.5).abs() < 1e-15);
        assert!(logistic_solution(&p, 0.6, 1.0).is_err());
        assert!(logistic_solution(&ModelParams::with_omega(2.0, 1.0).unwrap(), 0.01, 1.0).is_err());
    }

    #[test]
    fn convergence_target_lookup() {
        let p = ModelParams::new(3.0, 1.0, 1.0).unwrap();
        let fr = pair(Builtin::Aid);
        let mut eqs = vec![dfe(&p, &fr)];
        eqs.extend(endemic_equilibria(&p, &fr));
        let fake = |y: f64, z: f64| Trajectory {
            samples: vec![],
            terminal: Terminal::ReachedTEnd,
            end: Sample { t: 1.0, y, z },
            steps: 0,
            clamp_events: 0,
        };
        let hit = detect_convergence_target(&fake(0.5 + 1e-9, 2.0 / 3.0 - 1e-9), &eqs).unwrap();
        assert!((hit.y - 0.5).abs() < 1e-12);
        assert!(detect_convergence_target(&fake(0.3, 0.5), &eqs).is_none());
    }

    #[test]
    fn config_validation() {
        let cfg = IntegratorConfig {
            rtol: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = IntegratorConfig {
            sample_times: Some(vec![0.0, 2.0, 1.0]),
            ..IntegratorConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn tighter_tolerance_reduces_error() {
        let p = ModelParams::new(4.0, 1.0, 1.0).unwrap();
        let fr = pair(Builtin::Rlad);
        let curve = LogisticCurve::exact(&p, 0.01).unwrap();
        let err_at = |tol: f64| {
            let cfg = IntegratorConfig {
                rtol: tol,
                atol: tol * 1e-2,
                t_end: 10.0,
                convergence_eps: None,
                ..IntegratorConfig::default()
            };
            let traj = integrate(&p, &fr, &State::new(0.01, 0.5).unwrap(), &cfg).unwrap();
            traj.samples
                .iter()
                .map(|s| (s.y - curve.eval(s.t)).abs())
                .fold(0.0, f64::max)
        };
        let coarse = err_at(1e-5);
        let fine = err_at(5e-6);
        let finer = err_at(1e-8);
        assert!(fine < coarse, "{fine} vs {coarse}");
        assert!(finer < fine);
    }
}
