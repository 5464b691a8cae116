mod common;

use animfa::equilibria::endemic_equilibria;
use animfa::slowfast::{
    critical_manifold, entry_exit, reduced_field, simulate_slowfast, Branch, ManifoldStability, SlowFastParams,
};
use animfa::{Builtin, FunctionalResponsePair, IntegratorConfig, ModelParams, State, Terminal};

fn linear_break() -> FunctionalResponsePair {
    FunctionalResponsePair::builtin(Builtin::LinearBreak)
}

fn slow(tau: f64, eps: f64) -> SlowFastParams {
    SlowFastParams::new(ModelParams::new(tau, 1.0, 1.0).unwrap(), eps).unwrap()
}

fn tight(t_end: f64) -> IntegratorConfig {
    IntegratorConfig {
        rtol: 1e-10,
        atol: 1e-24,
        t_end,
        ..IntegratorConfig::default()
    }
}

#[test]
fn slow_equilibria_coincide_with_full_equilibria() {
    for b in Builtin::ALL {
        let fr = FunctionalResponsePair::builtin(b);
        for (tau, zeta, xi) in [(3.0, 1.0, 1.0), (5.4, 1.0, 1.0), (2.0, 0.5, 1.5), (8.0, 3.0, 0.7)] {
            let base = ModelParams::new(tau, zeta, xi).unwrap();
            let sf = SlowFastParams::new(base, 0.01).unwrap();
            for eq in endemic_equilibria(&base, &fr) {
                let z = eq.z.value().unwrap();
                if tau * z > 1.0 {
                    let dz = reduced_field(&sf, &fr, Branch::Endemic, z).unwrap();
                    assert!(dz.abs() < 1e-10, "{b:?} tau={tau} z={z} dz={dz}");
                }
            }
        }
    }
}

#[test]
fn trivial_branch_changes_stability_once() {
    let sf = slow(3.0, 0.01);
    let grid = common::linspace(0.0, 1.0, 1001);
    let tags: Vec<ManifoldStability> = critical_manifold(&sf, &grid)
        .unwrap()
        .into_iter()
        .filter(|q| q.branch == Branch::Trivial && q.stability != ManifoldStability::Nonhyperbolic)
        .map(|q| q.stability)
        .collect();
    let flips = tags.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(flips, 1);
    assert_eq!(tags[0], ManifoldStability::Attracting);
}

#[test]
fn endemic_branch_reduction_of_linear_break() {
    let sf = slow(3.0, 0.01);
    let z_star = (1.0 + 3.0) / (3.0 * 1.0 + 3.0);
    assert!(
        reduced_field(&sf, &linear_break(), Branch::Endemic, z_star)
            .unwrap()
            .abs()
            < 1e-12
    );
    assert!(reduced_field(&sf, &linear_break(), Branch::Endemic, 0.5).unwrap() > 0.0);
    assert!(reduced_field(&sf, &linear_break(), Branch::Endemic, 0.9).unwrap() < 0.0);
}

#[test]
fn quadrature_oracle_agrees() {
    for tau in [1.5, 3.0, 6.0] {
        for frac in [0.0, 0.3, 0.6, 0.9] {
            let z_in = frac / tau;
            let a = entry_exit(tau, z_in).unwrap();
            let b = common::entry_exit_by_quadrature(tau, z_in);
            assert!((a - b).abs() < 1e-8, "tau={tau} z_in={z_in}: {a} vs {b}");
        }
    }
}

#[test]
fn slow_passage_then_endemic_state() {
    let sf = slow(3.0, 0.01);
    let run = simulate_slowfast(&sf, &linear_break(), &State::new(0.2, 0.1).unwrap(), &tight(3000.0)).unwrap();
    let z_in = run.z_in.expect("orbit enters the slab");
    let z_out = run.measured_exit.expect("orbit leaves the slab");
    assert!(z_in < 1.0 / 3.0 && z_out > 1.0 / 3.0);
    assert!((z_out - entry_exit(3.0, z_in).unwrap()).abs() < 0.01);
    let end = run.trajectory.end;
    assert!(
        (end.y - 0.5).abs() < 1e-6 && (end.z - 2.0 / 3.0).abs() < 1e-6,
        "{end:?}"
    );
    assert!(matches!(run.trajectory.terminal, Terminal::Converged(_)));
}

#[test]
fn start_above_turning_point_has_no_exit() {
    let sf = slow(3.0, 0.01);
    let run = simulate_slowfast(&sf, &linear_break(), &State::new(0.2, 0.6).unwrap(), &tight(3000.0)).unwrap();
    assert!(run.measured_exit.is_none());
    let end = run.trajectory.end;
    assert!((end.y - 0.5).abs() < 1e-6 && (end.z - 2.0 / 3.0).abs() < 1e-6);
}

#[test]
fn exits_approach_prediction_as_epsilon_shrinks() {
    let s0 = State::new(0.01, 0.0).unwrap();
    let mut gaps = Vec::new();
    for eps in [0.05, 0.02, 0.01, 0.005] {
        let cfg = IntegratorConfig {
            convergence_eps: None,
            ..tight(10.0 / eps)
        };
        let run = simulate_slowfast(&slow(3.0, eps), &linear_break(), &s0, &cfg).unwrap();
        let predicted = entry_exit(3.0, run.z_in.unwrap()).unwrap();
        gaps.push((run.measured_exit.unwrap() - predicted).abs());
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[3] < 0.05);
}
