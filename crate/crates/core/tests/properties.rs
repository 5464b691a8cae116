mod common;

use animfa::equilibria::{all_equilibria, dfe, r0};
use animfa::geometry::{lyapunov_residual, solve_lyapunov_2x2};
use animfa::model::rhs;
use animfa::slowfast::entry_exit;
use animfa::stability::{classify_equilibrium, jacobian};
use animfa::{integrate, Builtin, FunctionalResponsePair, IntegratorConfig, Mat2, ModelParams, State};
use proptest::prelude::*;

fn builtin() -> impl Strategy<Value = Builtin> {
    prop::sample::select(Builtin::ALL.to_vec())
}

fn rate() -> impl Strategy<Value = f64> {
    0.1f64..10.0
}

fn unit() -> impl Strategy<Value = f64> {
    0.0f64..=1.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trajectories_stay_in_unit_square(b in builtin(), tau in rate(), zeta in rate(), xi in rate(), y in unit(), z in unit()) {
        let p = ModelParams::new(tau, zeta, xi).unwrap();
        let fr = FunctionalResponsePair::builtin(b);
        let traj = integrate(&p, &fr, &State::new(y, z).unwrap(), &IntegratorConfig::with_t_end(50.0)).unwrap();
        prop_assert!(traj.stays_within(1e-9));
        prop_assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn equilibria_are_rest_points(b in builtin(), tau in rate(), omega in rate()) {
        let p = ModelParams::with_omega(tau, omega).unwrap();
        let fr = FunctionalResponsePair::builtin(b);
        for eq in all_equilibria(&p, &fr) {
            let f = rhs(&p, &fr, eq.state_or(0.5).to_array());
            prop_assert!(f[0].abs().max(f[1].abs()) < 1e-9, "{eq:?} {f:?}");
        }
    }

    #[test]
    fn dfe_stability_tracks_r0(tau in rate(), omega in rate()) {
        let p = ModelParams::with_omega(tau, omega).unwrap();
        for b in [Builtin::Rlad, Builtin::LinearBreak, Builtin::Asis] {
            let fr = FunctionalResponsePair::builtin(b);
            let r = r0(&p, &fr).value().unwrap();
            prop_assume!((r - 1.0).abs() > 1e-6);
            let class = classify_equilibrium(&p, &fr, &dfe(&p, &fr), 0.5).classification;
            prop_assert_eq!(class.is_stable(), r < 1.0, "{:?} r0 = {}", b, r);
        }
    }

    #[test]
    fn lyapunov_residual_is_small(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, d in -5.0f64..5.0) {
        let j = Mat2::new(a, b, c, d);
        let ev = j.eigenvalues();
        prop_assume!(ev[0].re < -1e-3 && ev[1].re < -1e-3);
        let p = solve_lyapunov_2x2(&j).unwrap();
        prop_assert!(lyapunov_residual(&p, &j) < 1e-10 * (1.0 + p.max_abs()));
        prop_assert!(p.get(0, 0) > 0.0 && p.det() > 0.0);
        prop_assert_eq!(p.get(0, 1), p.get(1, 0));
    }

    #[test]
    fn entry_exit_lands_between_turning_point_and_one(tau in 1.2f64..10.0, frac in 0.0f64..0.999) {
        let z_in = frac / tau;
        let z_out = entry_exit(tau, z_in).unwrap();
        prop_assert!(z_out > 1.0 / tau && z_out < 1.0);
        let g = |z: f64| -tau * z - (tau - 1.0) * (-z).ln_1p();
        prop_assert!((g(z_out) - g(z_in)).abs() < 1e-9);
    }

    #[test]
    fn jacobian_matches_finite_differences(b in builtin(), tau in rate(), zeta in rate(), xi in rate(), y in 0.01f64..0.99, z in 0.01f64..0.99) {
        let p = ModelParams::new(tau, zeta, xi).unwrap();
        let fr = FunctionalResponsePair::builtin(b);
        let j = jacobian(&p, &fr, &State::new(y, z).unwrap());
        let h = 1e-6;
        let f = |y: f64, z: f64| common::field(b, tau, zeta, xi, y, z);
        for (col, (up, dn)) in [(f(y + h, z), f(y - h, z)), (f(y, z + h), f(y, z - h))].into_iter().enumerate() {
            for row in 0..2 {
                prop_assert!((j.get(row, col) - (up[row] - dn[row]) / (2.0 * h)).abs() < 1e-5);
            }
        }
    }
}

#[test]
fn integration_is_deterministic() {
    let p = ModelParams::new(3.0, 1.0, 1.0).unwrap();
    let fr = FunctionalResponsePair::builtin(Builtin::Aid);
    let s0 = State::new(0.4, 0.3).unwrap();
    let cfg = IntegratorConfig::with_t_end(100.0);
    let a = integrate(&p, &fr, &s0, &cfg).unwrap();
    let b = integrate(&p, &fr, &s0, &cfg).unwrap();
    assert_eq!(a, b);
}
