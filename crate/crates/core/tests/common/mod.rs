//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's own solvers.

#![allow(dead_code)]

use animfa::Builtin;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// `(fbr(y), fcr(y))` written out by hand.
pub fn responses(b: Builtin, y: f64) -> (f64, f64) {
    match b {
        Builtin::Rlad => (1.0, 1.0),
        Builtin::LinearBreak => (y, 1.0),
        Builtin::Asis => (2.0 * y * (1.0 - y), (1.0 - y) * (1.0 - y)),
        Builtin::Aid => ((1.0 - y) * (1.0 - y), 2.0 * y * (1.0 - y)),
    }
}

/// Vector field with `ζ = ω`, `ξ = 1` unless given explicitly.
pub fn field(b: Builtin, tau: f64, zeta: f64, xi: f64, y: f64, z: f64) -> [f64; 2] {
    let (fb, fc) = responses(b, y);
    [-y + tau * y * (1.0 - y) * z, -zeta * z * fb + xi * (1.0 - z) * fc]
}

/// Endemic equilibria from the quadratic/linear reductions of each pair,
/// keeping `0 < y < 1` and `z = 1/(τ(1 − y)) ≤ 1`.
pub fn closed_form_endemic(b: Builtin, tau: f64, omega: f64) -> Vec<(f64, f64)> {
    let ys: Vec<f64> = match b {
        Builtin::Rlad => vec![1.0 - (1.0 + omega) / tau],
        Builtin::LinearBreak => vec![(tau - 1.0) / (tau + omega)],
        // τx² + (2ω − 1)x − 2ω = 0 in x = 1 − y.
        Builtin::Asis => {
            let (qa, qb, qc) = (tau, 2.0 * omega - 1.0, -2.0 * omega);
            let d = qb * qb - 4.0 * qa * qc;
            vec![1.0 - (-qb + d.sqrt()) / (2.0 * qa)]
        }
        // 2τy² − (2τ + ω − 2)y + ω = 0.
        Builtin::Aid => {
            let (qa, qb, qc) = (2.0 * tau, -(2.0 * tau + omega - 2.0), omega);
            let d = qb * qb - 4.0 * qa * qc;
            if d < 0.0 {
                vec![]
            } else {
                vec![(-qb - d.sqrt()) / (2.0 * qa), (-qb + d.sqrt()) / (2.0 * qa)]
            }
        }
    };
    ys.into_iter()
        .filter(|&y| y > 0.0 && y < 1.0)
        .map(|y| (y, 1.0 / (tau * (1.0 - y))))
        .filter(|&(_, z)| z <= 1.0)
        .collect()
}

/// Adaptive Simpson quadrature.
pub fn integrate_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Exit point from quadrature of `(τz − 1)/(1 − z)` and bisection on the upper limit.
pub fn entry_exit_by_quadrature(tau: f64, z_in: f64) -> f64 {
    let g = |z: f64| (tau * z - 1.0) / (1.0 - z);
    let turn = 1.0 / tau;
    let debt = integrate_simpson(&g, z_in, turn, 1e-15);
    let (mut lo, mut hi) = (turn, 1.0 - 1e-9);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if debt + integrate_simpson(&g, turn, mid, 1e-15) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Logistic `y∞ / (1 + exp(−K(t − t0)))`.
pub fn logistic(y_inf: f64, k: f64, t0: f64, t: f64) -> f64 {
    y_inf / (1.0 + (-k * (t - t0)).exp())
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}
