//! Quadratic Lyapunov estimates of regions of attraction and separatrices
//! (stable manifolds of saddles) for bistable parameter regimes.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::dynamics::{integrate_many, IntegratorConfig, Terminal, CONVERGENCE_MATCH_TOL};
use crate::equilibria::Equilibrium;
use crate::error::{Error, Result};
use crate::integrator::{self, Flow, SolverOptions};
use crate::linalg::{solve3, Mat2};
use crate::model::{rhs, ModelParams, State};
use crate::responses::FunctionalResponsePair;
use crate::stability::{jacobian, SADDLE_DET_TOL, ZERO_EIGEN_TOL};

/// Offset from the saddle along the stable eigenvector when seeding a separatrix.
pub const SEPARATRIX_SEED: f64 = 1e-6;
/// Maximum arc length traced per separatrix branch.
pub const SEPARATRIX_MAX_ARC: f64 = 10.0;

/// Unique symmetric `P` with `P·J + Jᵀ·P = −I`.
pub fn solve_lyapunov_2x2(j: &Mat2) -> Result<Mat2> {
    let ev = j.eigenvalues();
    if !(ev[0].re < -ZERO_EIGEN_TOL && ev[1].re < -ZERO_EIGEN_TOL) {
        return Err(Error::NotHurwitz {
            re1: ev[0].re,
            re2: ev[1].re,
        });
    }
    let [[a, b], [c, d]] = j.0;
    // Unknowns (P11, P12, P22); the (2,1) equation duplicates (1,2).
    let m = [[2.0 * a, 2.0 * c, 0.0], [b, a + d, c], [0.0, 2.0 * b, 2.0 * d]];
    let not_hurwitz = Error::NotHurwitz {
        re1: ev[0].re,
        re2: ev[1].re,
    };
    let Some([p11, p12, p22]) = solve3(m, [-1.0, 0.0, -1.0]) else {
        return Err(not_hurwitz);
    };
    if !(p11 > 0.0 && p11 * p22 - p12 * p12 > 0.0) {
        return Err(not_hurwitz);
    }
    Ok(Mat2::new(p11, p12, p12, p22))
}

/// `‖P·J + Jᵀ·P + I‖∞` (entrywise maximum).
pub fn lyapunov_residual(p: &Mat2, j: &Mat2) -> f64 {
    p.mul(j).add(&j.transpose().mul(p)).add(&Mat2::IDENTITY).max_abs()
}

#[derive(Debug, Clone, Copy)]
pub struct RoaOptions {
    /// Uniformly spaced angles sampled on each level curve.
    pub boundary_samples: usize,
    /// Bisection on `c` stops at this width relative to the upper bracket.
    pub rel_width: f64,
    /// Levels `k/n · c`, `k = 1..=n`, that must all certify for `c` to count.
    pub nested_levels: usize,
}

impl Default for RoaOptions {
    fn default() -> Self {
        RoaOptions {
            boundary_samples: 720,
            rel_width: 1e-4,
            nested_levels: 64,
        }
    }
}

/// Sublevel set `{V̂ ≤ c_star} ∩ [0,1]²` of `V̂(u) = (u − center)ᵀ P (u − center)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionOfAttraction {
    #[serde(rename = "P")]
    pub p: Mat2,
    pub c_star: f64,
    #[serde(serialize_with = "state_as_pair")]
    pub center: State,
}

fn state_as_pair<S: Serializer>(s: &State, ser: S) -> std::result::Result<S::Ok, S::Error> {
    s.to_array().serialize(ser)
}

fn in_unit_square(u: [f64; 2]) -> bool {
    const SLACK: f64 = 1e-12;
    u.iter().all(|&v| (-SLACK..=1.0 + SLACK).contains(&v))
}

impl RegionOfAttraction {
    pub fn v_hat(&self, u: [f64; 2]) -> f64 {
        let c = self.center.to_array();
        self.p.quad_form([u[0] - c[0], u[1] - c[1]])
    }

    pub fn contains(&self, s: &State) -> bool {
        self.v_hat(s.to_array()) <= self.c_star
    }

    /// Points of the level curve `{V̂ = c}` at `n` uniformly spaced angles,
    /// whether or not they lie in the unit square.
    pub fn level_curve(&self, c: f64, n: usize) -> Vec<[f64; 2]> {
        ellipse_points(&self.p, self.center.to_array(), c, n)
    }
}

/// `center + √c · L⁻ᵀ (cos θ, sin θ)` where `P = L·Lᵀ`.
fn ellipse_points(p: &Mat2, center: [f64; 2], c: f64, n: usize) -> Vec<[f64; 2]> {
    let l11 = p.get(0, 0).sqrt();
    let l21 = p.get(1, 0) / l11;
    let l22 = (p.get(1, 1) - l21 * l21).sqrt();
    let r = c.max(0.0).sqrt();
    (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n as f64;
            let (s, co) = theta.sin_cos();
            let w1 = co / l11 - s * l21 / (l11 * l22);
            let w2 = s / l22;
            [center[0] + r * w1, center[1] + r * w2]
        })
        .collect()
}

struct Certifier<'a> {
    params: &'a ModelParams,
    fr: &'a FunctionalResponsePair,
    p: Mat2,
    center: [f64; 2],
    opts: RoaOptions,
}

impl Certifier<'_> {
    /// `dV̂/dt < 0` at every sampled point of `{V̂ = c}` inside the square,
    /// with at least one such point.
    fn level(&self, c: f64) -> bool {
        let mut seen = false;
        for u in ellipse_points(&self.p, self.center, c, self.opts.boundary_samples) {
            if !in_unit_square(u) {
                continue;
            }
            seen = true;
            let d = [u[0] - self.center[0], u[1] - self.center[1]];
            let pd = self.p.apply(d);
            let f = rhs(self.params, self.fr, u);
            if !(2.0 * (pd[0] * f[0] + pd[1] * f[1]) < 0.0) {
                return false;
            }
        }
        seen
    }

    fn nested(&self, c: f64) -> bool {
        let n = self.opts.nested_levels.max(1);
        (1..=n).into_par_iter().all(|k| self.level(c * k as f64 / n as f64))
    }
}

/// Region of attraction of a stable equilibrium with the default sampling.
pub fn estimate_roa(p: &ModelParams, fr: &FunctionalResponsePair, eq: &Equilibrium) -> Result<RegionOfAttraction> {
    estimate_roa_with(p, fr, eq, &RoaOptions::default())
}

/// Largest certified level `c_star`, found by bisection on `[0, c_max]`
/// where `c_max` is the level through the farthest corner of the square.
/// A free link density at the equilibrium is a domain error.
pub fn estimate_roa_with(
    params: &ModelParams,
    fr: &FunctionalResponsePair,
    eq: &Equilibrium,
    opts: &RoaOptions,
) -> Result<RegionOfAttraction> {
    let center = eq
        .state()
        .ok_or_else(|| Error::Domain("equilibrium has a free link density".into()))?;
    let j = jacobian(params, fr, &center);
    let p = solve_lyapunov_2x2(&j)?;
    let cert = Certifier {
        params,
        fr,
        p,
        center: center.to_array(),
        opts: *opts,
    };
    let probe = RegionOfAttraction { p, c_star: 0.0, center };
    let c_max = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
        .into_iter()
        .map(|u| probe.v_hat(u))
        .fold(0.0, f64::max);

    let c_star = if cert.nested(c_max) {
        c_max
    } else {
        let (mut lo, mut hi) = (0.0, c_max);
        for _ in 0..200 {
            if hi - lo <= opts.rel_width * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if cert.nested(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Ok(RegionOfAttraction { c_star, ..probe })
}

/// Stable manifold of a saddle, clipped to the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct Separatrix {
    /// Ordered from one end through the saddle to the other.
    pub polyline: Vec<[f64; 2]>,
    pub saddle: Equilibrium,
}

/// Trace the stable manifold of `saddle` by integrating the reversed field
/// from both sides of the saddle.
pub fn separatrix(p: &ModelParams, fr: &FunctionalResponsePair, saddle: &Equilibrium) -> Result<Separatrix> {
    let s = saddle
        .state()
        .ok_or_else(|| Error::Domain("equilibrium has a free link density".into()))?;
    let j = jacobian(p, fr, &s);
    let determinant = j.det();
    if determinant >= -SADDLE_DET_TOL {
        return Err(Error::NotSaddle { determinant });
    }
    let ev = j.eigenvalues();
    let stable = if ev[0].re < 0.0 { ev[0].re } else { ev[1].re };
    let v = j.real_eigenvector(stable);
    let u0 = s.to_array();

    let mut branches = Vec::with_capacity(2);
    for sign in [1.0, -1.0] {
        let seed = [
            u0[0] + sign * SEPARATRIX_SEED * v[0],
            u0[1] + sign * SEPARATRIX_SEED * v[1],
        ];
        branches.push(if in_unit_square(seed) {
            trace_branch(p, fr, seed)
        } else {
            Vec::new()
        });
    }
    let mut polyline: Vec<[f64; 2]> = branches[0].iter().rev().copied().collect();
    polyline.push(u0);
    polyline.extend_from_slice(&branches[1]);
    Ok(Separatrix {
        polyline,
        saddle: *saddle,
    })
}

fn trace_branch(p: &ModelParams, fr: &FunctionalResponsePair, seed: [f64; 2]) -> Vec<[f64; 2]> {
    let opts = SolverOptions {
        rtol: 1e-10,
        atol: 1e-12,
        max_step: 0.02,
        clamp_unit_square: false,
        max_steps: 200_000,
        ..SolverOptions::default()
    };
    let mut points = vec![seed];
    let mut arc = 0.0;
    integrator::solve(
        |u| {
            let f = rhs(p, fr, u);
            [-f[0], -f[1]]
        },
        0.0,
        seed,
        1e4,
        &opts,
        |step| {
            if !in_unit_square(step.u1) {
                // Locate the boundary crossing on the interpolant.
                let (mut a, mut b) = (step.t0, step.t1);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if in_unit_square(step.interpolate(m)) {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                let u = step.interpolate(a);
                points.push([u[0].clamp(0.0, 1.0), u[1].clamp(0.0, 1.0)]);
                return Flow::Stop;
            }
            let last = points[points.len() - 1];
            arc += (step.u1[0] - last[0]).hypot(step.u1[1] - last[1]);
            points.push(step.u1);
            if arc > SEPARATRIX_MAX_ARC || step.f1[0].abs().max(step.f1[1].abs()) < 1e-13 {
                Flow::Stop
            } else {
                Flow::Continue
            }
        },
    );
    points
}

/// Position along the square's boundary, counterclockwise from `(0,0)`, in `[0, 4)`.
fn perimeter_coord(u: [f64; 2]) -> f64 {
    let [y, z] = [u[0].clamp(0.0, 1.0), u[1].clamp(0.0, 1.0)];
    let d = [z, 1.0 - y, 1.0 - z, y];
    let edge = (0..4).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
    match edge {
        0 => y,
        1 => 1.0 + z,
        2 => 2.0 + (1.0 - y),
        _ => (3.0 + (1.0 - z)) % 4.0,
    }
}

fn perimeter_point(s: f64) -> [f64; 2] {
    let s = s.rem_euclid(4.0);
    match s {
        s if s < 1.0 => [s, 0.0],
        s if s < 2.0 => [1.0, s - 1.0],
        s if s < 3.0 => [3.0 - s, 1.0],
        s => [0.0, 4.0 - s],
    }
}

impl Separatrix {
    /// The polyline closed into a polygon by walking counterclockwise along
    /// the square's boundary from its last point back to its first.
    pub fn closing_polygon(&self) -> Vec<[f64; 2]> {
        let mut poly = self.polyline.clone();
        let (Some(&first), Some(&last)) = (self.polyline.first(), self.polyline.last()) else {
            return poly;
        };
        let s_end = perimeter_coord(last);
        let mut s_start = perimeter_coord(first);
        if s_start <= s_end {
            s_start += 4.0;
        }
        poly.push(perimeter_point(s_end));
        let mut corner = s_end.floor() + 1.0;
        while corner < s_start {
            poly.push(perimeter_point(corner));
            corner += 1.0;
        }
        poly.push(perimeter_point(s_start));
        poly
    }

    /// Which side of the separatrix `u` lies on: `true` inside the closing polygon.
    pub fn side(&self, u: [f64; 2]) -> bool {
        point_in_polygon(u, &self.closing_polygon())
    }

    /// Index of the attractor on the same side as `u`, or `None` when that
    /// side holds no attractor or more than one. Attractors on the boundary
    /// are nudged towards the centre of the square before testing.
    pub fn attractor_side(&self, u: [f64; 2], attractors: &[State]) -> Option<usize> {
        let poly = self.closing_polygon();
        let here = point_in_polygon(u, &poly);
        let mut hits = attractors.iter().enumerate().filter(|(_, a)| {
            let [y, z] = a.to_array();
            let nudged = [y + 1e-3 * (0.5 - y), z + 1e-3 * (0.5 - z)];
            point_in_polygon(nudged, &poly) == here
        });
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }
}

fn point_in_polygon(u: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > u[1]) != (b[1] > u[1]) {
            let x = a[0] + (u[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if u[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Uniform `n × n` grid over the closed unit square, row-major in `z`.
pub fn unit_grid(n: usize) -> Vec<State> {
    let n = n.max(2);
    let step = |i: usize| i as f64 / (n - 1) as f64;
    (0..n)
        .flat_map(|iz| (0..n).map(move |iy| State::new(step(iy), step(iz)).unwrap()))
        .collect()
}

/// Index into `attractors` of the equilibrium each start converges to, by simulation.
pub fn simulated_basin_labels(
    p: &ModelParams,
    fr: &FunctionalResponsePair,
    starts: &[State],
    attractors: &[Equilibrium],
    cfg: &IntegratorConfig,
) -> Result<Vec<Option<usize>>> {
    let runs = integrate_many(p, fr, starts, cfg)?;
    Ok(runs
        .iter()
        .map(|traj| {
            let end = traj.end_state()?;
            attractors
                .iter()
                .position(|a| a.distance_to(&end) <= CONVERGENCE_MATCH_TOL)
                .filter(|_| matches!(traj.terminal, Terminal::Converged(_)))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::all_equilibria;
    use crate::responses::Builtin;
    use crate::stability::classify_equilibrium;

    fn aid3() -> (ModelParams, FunctionalResponsePair) {
        (
            ModelParams::new(3.0, 1.0, 1.0).unwrap(),
            FunctionalResponsePair::builtin(Builtin::Aid),
        )
    }

    #[test]
    fn lyapunov_examples() {
        let j = Mat2::new(-1.0, 0.0, 2.0, -1.0);
        let p = solve_lyapunov_2x2(&j).unwrap();
        let want = Mat2::new(1.5, 0.5, 0.5, 0.5);
        assert!(
            p.add(&Mat2::new(-1.5, -0.5, -0.5, -0.5)).max_abs() < 1e-12,
            "{p:?} vs {want:?}"
        );
        assert!(lyapunov_residual(&p, &j) < 1e-12);

        let p = solve_lyapunov_2x2(&Mat2::new(-1.0, 0.0, 0.0, -1.0)).unwrap();
        assert_eq!(p, Mat2::new(0.5, 0.0, 0.0, 0.5));

        assert!(matches!(
            solve_lyapunov_2x2(&Mat2::new(0.0, 1.0, -1.0, 0.0)),
            Err(Error::NotHurwitz { .. })
        ));
    }

    #[test]
    fn ellipse_points_lie_on_level() {
        let roa = RegionOfAttraction {
            p: Mat2::new(1.5, 0.5, 0.5, 0.5),
            c_star: 0.1,
            center: State::new(0.3, 0.4).unwrap(),
        };
        for u in roa.level_curve(0.07, 37) {
            assert!((roa.v_hat(u) - 0.07).abs() < 1e-14);
        }
    }

    #[test]
    fn roa_at_aid_dfe() {
        let (p, fr) = aid3();
        let eqs = all_equilibria(&p, &fr);
        let roa = estimate_roa(&p, &fr, &eqs[0]).unwrap();
        assert!(roa.c_star > 0.0);
        let cert = Certifier {
            params: &p,
            fr: &fr,
            p: roa.p,
            center: roa.center.to_array(),
            opts: RoaOptions::default(),
        };
        assert!(cert.level(roa.c_star));
        assert!(cert.level(roa.c_star / 2.0));
    }

    #[test]
    fn separatrix_of_aid_saddle() {
        let (p, fr) = aid3();
        let eqs = all_equilibria(&p, &fr);
        let saddle = eqs
            .iter()
            .find(|e| classify_equilibrium(&p, &fr, e, 0.0).determinant < 0.0)
            .unwrap();
        let sep = separatrix(&p, &fr, saddle).unwrap();
        assert!(sep.polyline.iter().all(|&u| in_unit_square(u)));
        let s = saddle.state().unwrap();
        assert!(sep.polyline.iter().any(|u| (u[0] - s.y()).hypot(u[1] - s.z()) < 1e-6));
        let stable_node = &eqs[0];
        assert!(matches!(separatrix(&p, &fr, stable_node), Err(Error::NotSaddle { .. })));
    }

    #[test]
    fn perimeter_round_trip() {
        for s in [0.0, 0.25, 1.0, 1.5, 2.0, 2.75, 3.0, 3.5] {
            assert!((perimeter_coord(perimeter_point(s)) - s).abs() < 1e-15, "{s}");
        }
    }

    #[test]
    fn polygon_membership() {
        let square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(point_in_polygon([0.5, 0.5], &square));
        assert!(!point_in_polygon([1.5, 0.5], &square));
    }
}
