//! Slow-network limit: network rates scaled by a small `ε`, the critical
//! manifold of the fast prevalence dynamics, the reduced flow on each
//! branch, and the entry-exit map for the delayed loss of stability along
//! `y = 0`.

use serde::Serialize;

use crate::dynamics::{finish, run_field, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::integrator::{Flow, Step};
use crate::model::{rhs, ModelParams, State};
use crate::responses::FunctionalResponsePair;

/// `|τz − 1|` below this marks a non-hyperbolic point of the critical manifold.
pub const NONHYPERBOLIC_TOL: f64 = 1e-9;
/// Prevalence threshold delimiting the slab around `y = 0`.
pub const DEFAULT_Y_THRESH: f64 = 1e-3;
/// Time accuracy of slab crossings on the dense output.
pub const CROSSING_TIME_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowFastParams {
    base: ModelParams,
    epsilon: f64,
}

impl SlowFastParams {
    pub fn new(base: ModelParams, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidRate {
                name: "epsilon",
                value: epsilon,
            });
        }
        Ok(SlowFastParams { base, epsilon })
    }

    pub fn base(&self) -> &ModelParams {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Parameters of the fast-time system: `ζ → ζε`, `ξ → ξε`.
    pub fn scaled(&self) -> ModelParams {
        self.base
            .scale_network_rates(self.epsilon)
            .expect("epsilon and base rates are positive")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `y = 0`.
    Trivial,
    /// `y = (τz − 1)/(τz)`.
    Endemic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldStability {
    Attracting,
    Repelling,
    Nonhyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalManifoldPoint {
    pub branch: Branch,
    pub z: f64,
    pub y: f64,
    pub eigenvalue: f64,
    pub stability: ManifoldStability,
}

fn tag(eigenvalue: f64, tau_z: f64) -> ManifoldStability {
    if (tau_z - 1.0).abs() < NONHYPERBOLIC_TOL {
        ManifoldStability::Nonhyperbolic
    } else if eigenvalue < 0.0 {
        ManifoldStability::Attracting
    } else {
        ManifoldStability::Repelling
    }
}

/// Fast subsystem: the prevalence equation with the link density frozen.
pub fn layer_field(p: &SlowFastParams, s: &State) -> (f64, f64) {
    let (y, z) = (s.y(), s.z());
    (-y + p.base.tau() * y * (1.0 - y) * z, 0.0)
}

/// Both branches of the critical manifold over `z_grid`. The endemic branch
/// is included where `τz ≥ 1`.
pub fn critical_manifold(p: &SlowFastParams, z_grid: &[f64]) -> Result<Vec<CriticalManifoldPoint>> {
    let tau = p.base.tau();
    let mut out = Vec::with_capacity(2 * z_grid.len());
    for &z in z_grid {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::Domain(format!("z = {z} lies outside [0, 1]")));
        }
        let tz = tau * z;
        let lambda = tz - 1.0;
        out.push(CriticalManifoldPoint {
            branch: Branch::Trivial,
            z,
            y: 0.0,
            eigenvalue: lambda,
            stability: tag(lambda, tz),
        });
        if tz >= 1.0 {
            out.push(CriticalManifoldPoint {
                branch: Branch::Endemic,
                z,
                y: (tz - 1.0) / tz,
                eigenvalue: -lambda,
                stability: tag(-lambda, tz),
            });
        }
    }
    Ok(out)
}

/// Slow flow `dz/ds` on a branch of the critical manifold, `s = εt`.
pub fn reduced_field(p: &SlowFastParams, fr: &FunctionalResponsePair, branch: Branch, z: f64) -> Result<f64> {
    let b = &p.base;
    let y = match branch {
        Branch::Trivial => 0.0,
        Branch::Endemic => {
            let tz = b.tau() * z;
            if tz <= 1.0 {
                return Err(Error::Domain(format!("endemic branch needs tau*z > 1 (got {tz})")));
            }
            (tz - 1.0) / tz
        }
    };
    Ok(-b.zeta() * z * fr.fbr.eval(y) + b.xi() * (1.0 - z) * fr.fcr.eval(y))
}

/// Antiderivative of `(τz − 1)/(1 − z)`.
fn entry_exit_potential(tau: f64, z: f64) -> f64 {
    -tau * z - (tau - 1.0) * (-z).ln_1p()
}

/// Exit point `z_out ∈ (1/τ, 1)` of an orbit entering the neighbourhood of
/// `y = 0` at `z_in`, defined by `∫_{z_in}^{z_out} (τz − 1)/(1 − z) dz = 0`.
pub fn entry_exit(tau: f64, z_in: f64) -> Result<f64> {
    if !(tau > 1.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("entry-exit needs tau > 1 (got {tau})")));
    }
    let z_turn = 1.0 / tau;
    if !(0.0..z_turn).contains(&z_in) {
        return Err(Error::Domain(format!(
            "z_in = {z_in} must lie in [0, 1/tau) = [0, {z_turn})"
        )));
    }
    let target = entry_exit_potential(tau, z_in);
    let phi = |z: f64| entry_exit_potential(tau, z) - target;
    let (mut lo, mut hi) = (z_turn, 1.0 - 1e-12);
    if phi(lo) >= 0.0 {
        return Ok(lo);
    }
    if phi(hi) < 0.0 {
        return Err(Error::Domain(format!(
            "exit point for tau = {tau}, z_in = {z_in} is within 1e-12 of 1"
        )));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlowFastRun {
    pub trajectory: Trajectory,
    /// Link density where the orbit entered the slab `y < y_thresh` with `z < 1/τ`.
    pub z_in: Option<f64>,
    /// Link density where it next left the slab.
    pub measured_exit: Option<f64>,
}

/// Integrate the ε-scaled system and record the slab passage, with the default threshold.
pub fn simulate_slowfast(
    p: &SlowFastParams,
    fr: &FunctionalResponsePair,
    s0: &State,
    cfg: &IntegratorConfig,
) -> Result<SlowFastRun> {
    simulate_slowfast_with(p, fr, s0, cfg, DEFAULT_Y_THRESH)
}

/// As [`simulate_slowfast`] with an explicit slab threshold. A start inside
/// the slab with `z < 1/τ` counts as an entry at `z(0)`.
pub fn simulate_slowfast_with(
    p: &SlowFastParams,
    fr: &FunctionalResponsePair,
    s0: &State,
    cfg: &IntegratorConfig,
    y_thresh: f64,
) -> Result<SlowFastRun> {
    cfg.validate()?;
    if !(y_thresh > 0.0 && y_thresh < 1.0) {
        return Err(Error::Config(format!("y_thresh must lie in (0, 1), got {y_thresh}")));
    }
    let scaled = p.scaled();
    let z_turn = 1.0 / scaled.tau();
    let mut inside = s0.y() < y_thresh;
    let mut z_in = (inside && s0.z() < z_turn).then_some(s0.z());
    let mut measured_exit = None;

    let hook = |step: &Step| {
        if measured_exit.is_some() {
            return Flow::Continue;
        }
        let now_inside = step.u1[0] < y_thresh;
        if now_inside != inside {
            let u = crossing(step, y_thresh);
            if now_inside {
                if z_in.is_none() && u[1] < z_turn {
                    z_in = Some(u[1]);
                }
            } else if z_in.is_some() {
                measured_exit = Some(u[1]);
            }
            inside = now_inside;
        }
        Flow::Continue
    };
    let run = run_field(|u| rhs(&scaled, fr, u), s0.to_array(), cfg, hook);
    let trajectory = finish(run, &scaled, fr);
    Ok(SlowFastRun {
        trajectory,
        z_in,
        measured_exit,
    })
}

/// State where `y` crosses `y_thresh` within `step`, by bisection in time.
fn crossing(step: &Step, y_thresh: f64) -> [f64; 2] {
    let below0 = step.u0[0] < y_thresh;
    let (mut a, mut b) = (step.t0, step.t1);
    while b - a > CROSSING_TIME_TOL {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (step.interpolate(m)[0] < y_thresh) == below0 {
            a = m;
        } else {
            b = m;
        }
    }
    step.interpolate(0.5 * (a + b))
}
