//! Dormand–Prince 5(4) integrator for autonomous planar systems, with
//! proportional-integral step control and the standard fourth-order
//! continuous extension for dense output. Fields are autonomous, so the
//! stage nodes `c_i` never enter.

use crate::model::CLAMP_WINDOW;

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

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Smallest admissible step before the integration is declared failed.
pub const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
    /// Snap accepted states lying within `CLAMP_WINDOW` outside `[0,1]²` back onto it.
    pub clamp_unit_square: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: f64::INFINITY,
            initial_step: None,
            max_steps: 5_000_000,
            clamp_unit_square: true,
        }
    }
}

/// An accepted step with its interpolant.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub t0: f64,
    pub t1: f64,
    pub u0: [f64; 2],
    pub u1: [f64; 2],
    /// Field evaluated at `u1`.
    pub f1: [f64; 2],
    rcont: [[f64; 2]; 5],
}

impl Step {
    /// Dense output at `t ∈ [t0, t1]`.
    pub fn interpolate(&self, t: f64) -> [f64; 2] {
        let h = self.t1 - self.t0;
        let theta = (t - self.t0) / h;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] = r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Reached the requested end time.
    Finished,
    /// The observer asked to stop.
    Stopped,
    /// Step size fell below `MIN_STEP`.
    StepUnderflow,
    MaxStepsExceeded,
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome {
    pub status: Status,
    pub t: f64,
    pub u: [f64; 2],
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub clamp_events: usize,
}

fn clamp_coord(v: &mut f64) -> bool {
    if *v < 0.0 && *v >= -CLAMP_WINDOW {
        *v = 0.0;
        true
    } else if *v > 1.0 && *v <= 1.0 + CLAMP_WINDOW {
        *v = 1.0;
        true
    } else {
        false
    }
}

#[inline]
fn axpy(u: [f64; 2], h: f64, terms: &[(f64, &[f64; 2])]) -> [f64; 2] {
    let mut out = u;
    for i in 0..2 {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

fn error_norm(err: [f64; 2], u0: [f64; 2], u1: [f64; 2], opts: &SolverOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        let sc = opts.atol + opts.rtol * u0[i].abs().max(u1[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / 2.0).sqrt()
}

fn initial_step<F: Fn([f64; 2]) -> [f64; 2]>(f: &F, u0: [f64; 2], f0: [f64; 2], opts: &SolverOptions) -> f64 {
    let sc = |i: usize| opts.atol + opts.rtol * u0[i].abs();
    let norm = |v: [f64; 2]| ((v[0] / sc(0)).powi(2) + (v[1] / sc(1)).powi(2)).sqrt() / 2f64.sqrt();
    let d0 = norm(u0);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(opts.max_step);
    let u1 = [u0[0] + h0 * f0[0], u0[1] + h0 * f0[1]];
    let f1 = f(u1);
    let d2 = norm([f1[0] - f0[0], f1[1] - f0[1]]) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.max_step)
}

/// Integrate `du/dt = f(u)` from `(t0, u0)` to `t_end`, calling `observer`
/// after every accepted step.
pub fn solve<F, O>(f: F, t0: f64, u0: [f64; 2], t_end: f64, opts: &SolverOptions, mut observer: O) -> Outcome
where
    F: Fn([f64; 2]) -> [f64; 2],
    O: FnMut(&Step) -> Flow,
{
    const SAFE: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const FAC_MIN: f64 = 0.2;
    const FAC_MAX: f64 = 10.0;
    const STABILITY_LIMIT: f64 = 2.5;

    let mut t = t0;
    let mut u = u0;
    let mut k1 = f(u);
    let mut evaluations = 1;
    let mut h = opts
        .initial_step
        .unwrap_or_else(|| {
            evaluations += 1;
            initial_step(&f, u, k1, opts)
        })
        .min(opts.max_step);
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut accepted = 0;
    let mut rejected = 0;
    let mut clamp_events = 0;

    let outcome = |status, t, u, accepted, rejected, evaluations, clamp_events| Outcome {
        status,
        t,
        u,
        accepted,
        rejected,
        evaluations,
        clamp_events,
    };

    if t_end <= t0 {
        return outcome(Status::Finished, t, u, 0, 0, evaluations, 0);
    }

    loop {
        if accepted + rejected >= opts.max_steps {
            return outcome(
                Status::MaxStepsExceeded,
                t,
                u,
                accepted,
                rejected,
                evaluations,
                clamp_events,
            );
        }
        if h < MIN_STEP {
            return outcome(
                Status::StepUnderflow,
                t,
                u,
                accepted,
                rejected,
                evaluations,
                clamp_events,
            );
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let k2 = f(axpy(u, h, &[(A21, &k1)]));
        let k3 = f(axpy(u, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(axpy(u, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(axpy(u, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let u6 = axpy(u, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let k6 = f(u6);
        let u1 = axpy(u, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(u1);
        evaluations += 6;

        let mut err = [0.0; 2];
        for i in 0..2 {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = error_norm(err, u, u1, opts);
        let fac11 = err.powf(EXPO1);

        if err <= 1.0 && err.is_finite() {
            let fac = (fac11 / fac_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = (h / fac).min(opts.max_step);
            // Keep h·|λ| inside the real stability interval (about 3.3), with
            // |λ| estimated from the last two stages. Near a stable
            // equilibrium below `atol` the error test alone would let the
            // solution hover instead of decaying.
            let stiff_num = (k7[0] - k6[0]).powi(2) + (k7[1] - k6[1]).powi(2);
            let stiff_den = (u1[0] - u6[0]).powi(2) + (u1[1] - u6[1]).powi(2);
            if stiff_den > 0.0 && stiff_num > 0.0 {
                let lambda = (stiff_num / stiff_den).sqrt();
                h_new = h_new.min(STABILITY_LIMIT / lambda);
            }
            if last_rejected {
                h_new = h_new.min(h);
            }
            fac_old = err.max(1e-4);

            let t1 = if last { t_end } else { t + h };
            let mut rcont = [[0.0; 2]; 5];
            for i in 0..2 {
                let ydiff = u1[i] - u[i];
                let bspl = h * k1[i] - ydiff;
                rcont[0][i] = u[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k7[i] - bspl;
                rcont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }

            let mut u_next = u1;
            let mut f_next = k7;
            if opts.clamp_unit_square {
                let c0 = clamp_coord(&mut u_next[0]);
                let c1 = clamp_coord(&mut u_next[1]);
                if c0 || c1 {
                    clamp_events += 1;
                    f_next = f(u_next);
                    evaluations += 1;
                }
            }

            let step = Step {
                t0: t,
                t1,
                u0: u,
                u1: u_next,
                f1: f_next,
                rcont,
            };
            accepted += 1;
            t = t1;
            u = u_next;
            k1 = f_next;
            last_rejected = false;

            if observer(&step) == Flow::Stop {
                return outcome(Status::Stopped, t, u, accepted, rejected, evaluations, clamp_events);
            }
            if last {
                return outcome(Status::Finished, t, u, accepted, rejected, evaluations, clamp_events);
            }
            h = h_new;
        } else {
            let shrink = if err.is_finite() {
                (fac11 / SAFE).min(1.0 / FAC_MIN)
            } else {
                10.0
            };
            h /= shrink;
            rejected += 1;
            last_rejected = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_clamp() -> SolverOptions {
        SolverOptions {
            clamp_unit_square: false,
            ..SolverOptions::default()
        }
    }

    #[test]
    fn exponential_decay() {
        let out = solve(
            |u| [-u[0], -2.0 * u[1]],
            0.0,
            [1.0, 1.0],
            3.0,
            &no_clamp(),
            |_| Flow::Continue,
        );
        assert_eq!(out.status, Status::Finished);
        assert_eq!(out.t, 3.0);
        assert!((out.u[0] - (-3f64).exp()).abs() < 1e-8);
        assert!((out.u[1] - (-6f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn dense_output_is_accurate() {
        let mut worst = 0.0_f64;
        solve(
            |u| [u[1], -u[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            &SolverOptions {
                rtol: 1e-10,
                atol: 1e-12,
                ..no_clamp()
            },
            |s| {
                for k in 1..10 {
                    let t = s.t0 + (s.t1 - s.t0) * k as f64 / 10.0;
                    let v = s.interpolate(t);
                    worst = worst.max((v[0] - t.sin()).abs()).max((v[1] - t.cos()).abs());
                }
                Flow::Continue
            },
        );
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn observer_can_stop() {
        let mut n = 0;
        let out = solve(
            |u| [1.0, u[0]],
            0.0,
            [0.0, 0.0],
            100.0,
            &no_clamp(),
            |_| {
                n += 1;
                if n == 3 {
                    Flow::Stop
                } else {
                    Flow::Continue
                }
            },
        );
        assert_eq!(out.status, Status::Stopped);
        assert_eq!(out.accepted, 3);
    }

    #[test]
    fn decays_below_atol_at_large_max_step() {
        let opts = SolverOptions {
            max_step: 1.0,
            ..SolverOptions::default()
        };
        let out = solve(
            |u| [-8.0 * u[0], -0.5 * u[1]],
            0.0,
            [1e-11, 0.5],
            200.0,
            &opts,
            |_| Flow::Continue,
        );
        assert_eq!(out.status, Status::Finished);
        assert!(out.u[0].abs() < 1e-30, "{out:?}");
    }

    #[test]
    fn blow_up_underflows() {
        let out = solve(
            |u| [u[0] * u[0], 0.0],
            0.0,
            [1.0, 0.0],
            2.0,
            &no_clamp(),
            |_| Flow::Continue,
        );
        assert!(matches!(out.status, Status::StepUnderflow | Status::MaxStepsExceeded));
        assert!(out.t < 1.0 + 1e-6, "{out:?}");
    }

    #[test]
    fn max_step_respected() {
        solve(
            |_| [0.0, 0.0],
            0.0,
            [0.5, 0.5],
            10.0,
            &SolverOptions {
                max_step: 0.25,
                ..SolverOptions::default()
            },
            |s| {
                assert!(s.t1 - s.t0 <= 0.25 + 1e-15);
                Flow::Continue
            },
        );
    }
}
