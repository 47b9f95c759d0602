use std::f64::consts::PI;

use proptest::prelude::*;
use quintic_duffing::error::Error;
use quintic_duffing::exact::solve_cn_coefficients;
use quintic_duffing::odeint::{advance, euler, integrate, integrate_delayed, HistoryPolicy, StepControl};
use quintic_duffing::oscillator::{OscillatorParams, State};

#[test]
fn harmonic_period_returns_to_start() {
    let p = OscillatorParams::unforced(-1.0, 0.0, 0.0);
    let s = advance(|t, x, v| p.accel(t, x, v), State::at_rest(1.0), 2.0 * PI, &StepControl::adaptive(1e-10, 1e-10)).unwrap();
    assert!((s.x - 1.0).abs() < 1e-8 && s.v.abs() < 1e-8);
    assert_eq!(s.t, 2.0 * PI);
}

#[test]
fn example_two_against_closed_form() {
    let sol = solve_cn_coefficients(-1.0f64, 2.0, 3.0, 1.0).unwrap();
    let p = OscillatorParams::unforced(-1.0, 2.0, 3.0);
    let t_end = 2.0 * sol.period().unwrap();
    let traj = integrate(|t, x, v| p.accel(t, x, v), State::at_rest(1.0), t_end, &StepControl::adaptive(1e-10, 1e-10)).unwrap();
    let worst = (0..=500)
        .map(|i| {
            let t = t_end * i as f64 / 500.0;
            (traj.interpolate(t).unwrap().x - sol.eval(t)).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn dense_output_agrees_with_landing_steps() {
    let p = OscillatorParams::driven(1.0, 1.0, 0.2, 0.1, 0.35, 1.4);
    let f = |t, x, v| p.accel(t, x, v);
    let tol = 1e-9;
    let ctrl = StepControl::adaptive(tol, tol);
    let traj = integrate(f, State::at_rest(0.1), 20.0, &ctrl).unwrap();
    for i in 1..40 {
        let t = 0.4937 * i as f64;
        let dense = traj.interpolate(t).unwrap();
        let direct = advance(f, State::at_rest(0.1), t, &ctrl).unwrap();
        assert!((dense.x - direct.x).abs() < 10.0 * tol * 20.0, "t = {t}: {}", (dense.x - direct.x).abs());
    }
}

#[test]
fn fixed_step_dense_output_is_fourth_order() {
    let p = OscillatorParams::unforced(-1.0, 0.0, 0.0);
    let err = |dt: f64| {
        let traj = integrate(|t, x, v| p.accel(t, x, v), State::at_rest(1.0), 5.0, &StepControl::fixed(dt)).unwrap();
        (0..100).map(|i| (traj.interpolate(0.0491 * i as f64).unwrap().x - (0.0491 * i as f64).cos()).abs()).fold(0.0, f64::max)
    };
    let ratio = err(0.1) / err(0.05);
    assert!(ratio > 12.0, "{ratio}");
}

#[test]
fn switched_off_feedback_is_bitwise_plain() {
    let p = OscillatorParams::driven(1.0, 1.0, 0.2, 0.1, 0.35, 1.4);
    let ctrl = StepControl::fixed(0.01);
    let plain = integrate(|t, x, v| p.accel(t, x, v), State::at_rest(0.0), 50.0, &ctrl).unwrap();
    let delayed = integrate_delayed(|t, x, v, vd| p.accel(t, x, v) + 0.0 * vd, State::at_rest(0.0), 3.7, HistoryPolicy::Zero, 50.0, &ctrl).unwrap();
    assert_eq!(plain.samples(), delayed.samples());
}

/// `u' = -u(t-1)`, `u = 1` on `[-1, 0]`: `u = 1 - t` on `[0, 1]`,
/// `u = 1 - t + (t-1)^2 / 2` on `[1, 2]`.
#[test]
fn method_of_steps_matches_hand_solution() {
    for ctrl in [StepControl::fixed(0.05), StepControl::adaptive(1e-12, 1e-12)] {
        let traj = integrate_delayed(|_, _, _, vd| -vd, State::new(0.0, 0.0, 1.0), 1.0, HistoryPolicy::ConstantInitial, 2.0, &ctrl).unwrap();
        for i in 0..=40 {
            let t = 0.05 * i as f64;
            let want = if t <= 1.0 { 1.0 - t } else { 1.0 - t + 0.5 * (t - 1.0).powi(2) };
            assert!((traj.interpolate(t).unwrap().v - want).abs() < 1e-6, "t = {t}");
        }
    }
}

#[test]
fn delay_longer_than_run_only_reads_policy() {
    let traj = integrate_delayed(|_, _, _, vd| vd, State::new(0.0f64, 0.0, 2.0), 10.0, HistoryPolicy::ConstantInitial, 3.0, &StepControl::fixed(0.01)).unwrap();
    // v' = 2 throughout.
    assert!((traj.last().unwrap().v - 8.0).abs() < 1e-12);
    let traj = integrate_delayed(|_, _, _, vd| vd, State::new(0.0, 0.0, 2.0), 10.0, HistoryPolicy::Zero, 3.0, &StepControl::fixed(0.01)).unwrap();
    assert_eq!(traj.last().unwrap().v, 2.0);
}

#[test]
fn reported_controller_runs_to_five_hundred() {
    let p = OscillatorParams::driven(1.0, 1.0, 0.2, 0.1, 0.35, 1.4);
    let (mu, tau) = (2.25311f64, 3.73093f64);
    let traj = integrate_delayed(|t, x, v, vd| p.accel(t, x, v) + mu * (vd - v), State::at_rest(0.0), tau, HistoryPolicy::Zero, 500.0, &StepControl::fixed(tau / 100.0)).unwrap();
    assert!((traj.last().unwrap().t - 500.0).abs() < tau / 100.0);
}

#[test]
fn bad_inputs_are_rejected() {
    let f = |_: f64, x: f64, _: f64| -x;
    assert!(integrate(f, State::at_rest(1.0), 1.0, &StepControl::fixed(0.0)).is_err());
    assert!(integrate(f, State::at_rest(1.0), 1.0, &StepControl::adaptive(0.0, 0.0)).is_err());
    assert!(integrate_delayed(|_, _, _, vd| vd, State::at_rest(0.0), 0.0, HistoryPolicy::Zero, 1.0, &StepControl::fixed(0.01)).is_err());
    assert!(integrate_delayed(|_, _, _, vd| vd, State::at_rest(0.0), 0.01, HistoryPolicy::Zero, 1.0, &StepControl::fixed(0.1)).is_err());
}

#[test]
fn blow_up_names_the_time() {
    let err = integrate(|_, x: f64, _| x * x * x, State::at_rest(1.0), 10.0, &StepControl::fixed(0.01)).unwrap_err();
    match err {
        Error::NonFinite { t, .. } => assert!(t > 1.0 && t < 2.0, "{t}"),
        other => panic!("{other:?}"),
    }
    let err = integrate(|_, x: f64, _| -x, State::at_rest(1.0), 100.0, &StepControl::adaptive(1e-10, 1e-10).with_max_steps(10)).unwrap_err();
    assert!(matches!(err, Error::MaxSteps { .. }), "{err:?}");
}

#[test]
fn euler_is_first_order() {
    let err = |dt: f64| {
        let n = (1.0 / dt).round() as usize;
        let traj = euler(|_, x, _| -x, State::at_rest(1.0), dt, n).unwrap();
        (traj.last().unwrap().x - 1f64.cos()).abs()
    };
    let ratio = err(0.01) / err(0.005);
    assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
}

#[test]
fn single_precision_rk4() {
    let s = advance(|_, x: f32, _| -x, State::at_rest(1.0f32), 1.0, &StepControl::fixed(0.01)).unwrap();
    assert!((s.x - 1f32.cos()).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conservative_energy_is_kept(a in -2.0f64..2.0, b in 0.0f64..2.0, c in 0.0f64..2.0, x0 in -1.0f64..1.0, v0 in -1.0f64..1.0) {
        let p = OscillatorParams::unforced(a, b, c);
        let traj = integrate(|t, x, v| p.accel(t, x, v), State::new(0.0, x0, v0), 30.0, &StepControl::adaptive(1e-11, 1e-11)).unwrap();
        let e = |s: &State<f64>| 0.5 * s.v * s.v + p.potential(s.x);
        let e0 = e(&traj.samples()[0]);
        let drift = traj.samples().iter().map(|s| (e(s) - e0).abs()).fold(0.0, f64::max);
        prop_assert!(drift < 1e-8, "{}", drift);
    }

    #[test]
    fn time_knots_increase(x0 in -1.5f64..1.5, gamma in 0.0f64..0.6) {
        let p = OscillatorParams::driven(1.0, 1.0, 0.0, 0.1, gamma, 1.4);
        let traj = integrate(|t, x, v| p.accel(t, x, v), State::at_rest(x0), 40.0, &StepControl::adaptive(1e-8, 1e-8)).unwrap();
        prop_assert!(traj.samples().windows(2).all(|w| w[1].t > w[0].t));
        prop_assert!(traj.samples().iter().all(|s| s.is_finite()));
    }
}
