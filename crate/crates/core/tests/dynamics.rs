mod common;

use animfa::dynamics::{detect_convergence_target, integrate_many, logistic_solution, LogisticCurve};
use animfa::equilibria::all_equilibria;
use animfa::{integrate, Builtin, FunctionalResponsePair, IntegratorConfig, ModelParams, State, Terminal};

fn pair(b: Builtin) -> FunctionalResponsePair {
    FunctionalResponsePair::builtin(b)
}

#[test]
fn link_density_decouples_for_constant_responses() {
    let (tau, zeta, xi) = (2.5, 0.8, 1.7);
    let p = ModelParams::new(tau, zeta, xi).unwrap();
    let omega = zeta / xi;
    let z0 = 0.9;
    let times = common::linspace(0.0, 8.0, 81);
    let cfg = IntegratorConfig {
        rtol: 1e-11,
        atol: 1e-13,
        convergence_eps: None,
        t_end: 8.0,
        sample_times: Some(times),
        ..IntegratorConfig::default()
    };
    let traj = integrate(&p, &pair(Builtin::Rlad), &State::new(0.3, z0).unwrap(), &cfg).unwrap();
    let z_inf = 1.0 / (1.0 + omega);
    for s in &traj.samples {
        let want = z_inf + (z0 - z_inf) * (-(zeta + xi) * s.t).exp();
        assert!((s.z - want).abs() < 1e-8, "t={} z={} want {want}", s.t, s.z);
    }
}

#[test]
fn linear_break_converges_to_unique_endemic_state() {
    let p = ModelParams::with_omega(5.4, 1.0).unwrap();
    let fr = pair(Builtin::LinearBreak);
    let eqs = all_equilibria(&p, &fr);
    let starts: Vec<State> = [(0.1, 0.1), (0.9, 0.9), (0.05, 0.95), (0.95, 0.05), (0.5, 0.5)]
        .iter()
        .map(|&(y, z)| State::new(y, z).unwrap())
        .collect();
    for traj in integrate_many(&p, &fr, &starts, &IntegratorConfig::with_t_end(1e4)).unwrap() {
        let Terminal::Converged(eq) = traj.terminal else {
            panic!("{:?}", traj.terminal);
        };
        assert!((eq.y - 0.6875).abs() < 1e-9);
        assert!((eq.z.value().unwrap() - 6.4 / 10.8).abs() < 1e-9);
        let end = traj.end_state().unwrap();
        assert!(eq.distance_to(&end) < 1e-8);
        assert_eq!(detect_convergence_target(&traj, &eqs), Some(eqs[1]));
    }
}

#[test]
fn prevalence_axis_is_invariant() {
    for b in Builtin::ALL {
        let p = ModelParams::with_omega(3.0, 1.0).unwrap();
        let traj = integrate(
            &p,
            &pair(b),
            &State::new(0.0, 0.4).unwrap(),
            &IntegratorConfig::with_t_end(100.0),
        )
        .unwrap();
        assert!(traj.samples.iter().all(|s| s.y == 0.0));
        let eqs = all_equilibria(&p, &pair(b));
        assert_eq!(detect_convergence_target(&traj, &eqs).map(|e| e.y), Some(0.0));
    }
}

#[test]
fn asis_examples() {
    let fr = pair(Builtin::Asis);
    let cfg = IntegratorConfig::with_t_end(1e4);
    let s0 = State::new(0.3, 0.3).unwrap();
    let high = integrate(&ModelParams::with_omega(2.0, 1.0).unwrap(), &fr, &s0, &cfg).unwrap();
    assert!(
        (high.end.y - 0.219224).abs() < 1e-6 && (high.end.z - 0.640388).abs() < 1e-6,
        "{:?}",
        high.end
    );
    let low = integrate(&ModelParams::with_omega(0.8, 1.0).unwrap(), &fr, &s0, &cfg).unwrap();
    assert!(
        low.end.y.abs() < 1e-8 && (low.end.z - 1.0).abs() < 1e-8,
        "{:?}",
        low.end
    );
}

#[test]
fn published_and_exact_logistic_curves() {
    let p = ModelParams::with_omega(4.0, 1.0).unwrap();
    let t0 = 49f64.ln() / 3.0;
    assert!((logistic_solution(&p, 0.01, t0).unwrap() - 0.25).abs() < 1e-15);
    assert!(logistic_solution(&p, 0.01, 1e3).unwrap() > 0.5 - 1e-12);
    let exact = LogisticCurve::exact(&p, 0.01).unwrap();
    assert_eq!(exact.rate, 1.0);
    assert!(logistic_solution(&ModelParams::with_omega(1.5, 1.0).unwrap(), 0.01, 1.0).is_err());
}
