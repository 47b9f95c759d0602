use proptest::prelude::*;
use quintic_duffing::exact::{closed_form_branches, eval_homoclinic, homoclinic_orbit, solve_cn_coefficients, HomoclinicKind, RootBranch};
use quintic_duffing::odeint::{integrate, StepControl};
use quintic_duffing::oscillator::{energy, equilibria, EquilibriumKind, OscillatorParams, State};

/// Central second difference; at h = 1e-5 roundoff alone is ~1e-5 for
/// |x| ~ 1, so the step is 1e-4.
fn defect(a: f64, b: f64, c: f64, x: impl Fn(f64) -> f64, t: f64) -> f64 {
    // Five-point stencil: the three-point one loses to truncation on the
    // sharp peaks near lambda = -1.
    let h = 1e-3;
    let xdd = (-x(t + 2.0 * h) + 16.0 * x(t + h) - 30.0 * x(t) + 16.0 * x(t - h) - x(t - 2.0 * h)) / (12.0 * h * h);
    let y = x(t);
    (xdd - a * y + b * y.powi(3) + c * y.powi(5)).abs()
}

#[test]
fn example_two_branch_is_among_closed_forms() {
    let branches = closed_form_branches(-1.0f64, 2.0, 3.0, 1.0);
    let want = 4.0 - 3.0 * 2f64.sqrt();
    assert!(branches.iter().any(|b| b.residual < 1e-8 && (b.solution.lambda - want).abs() < 1e-8));
}

#[test]
fn linear_equation_gives_only_the_cosine() {
    let branches = closed_form_branches(-1.0f64, 0.0, 0.0, 1.0);
    assert!(!branches.is_empty());
    for b in branches {
        let s = b.solution;
        assert!(s.lambda == 0.0 && s.mu == 0.0 && s.m == 0.0 && s.omega == 1.0, "{s:?}");
    }
}

#[test]
fn small_amplitude_tends_to_cosine() {
    let s = solve_cn_coefficients(-1.0f64, 1.0, 0.0, 1e-3).unwrap();
    assert!(s.m.abs() < 1e-5 && s.lambda.abs() < 1e-5 && s.mu.abs() < 1e-5);
    assert!((s.omega - 1.0).abs() < 1e-5);
}

#[test]
fn first_example_trajectory_matches_rk4() {
    let s = solve_cn_coefficients(1.0f64, 1.0, 1.0, 1.0).unwrap();
    let p = OscillatorParams::unforced(1.0, 1.0, 1.0);
    let traj = integrate(|t, x, v| p.accel(t, x, v), State::at_rest(1.0), 10.0, &StepControl::fixed(1e-3)).unwrap();
    for q in traj.samples().iter().step_by(50) {
        assert!((q.x - s.eval(q.t)).abs() < 1e-6, "t = {}", q.t);
    }
}

#[test]
fn cn_solutions_over_two_periods() {
    for (a, b, c, x0) in [(-1.0f64, 2.0, 3.0, 1.0), (-2.0, 1.0, 0.5, 0.7), (-1.0, 0.5, 0.0, 1.5), (1.0, 1.0, 1.0, 1.0)] {
        let s = solve_cn_coefficients(a, b, c, x0).unwrap();
        assert!(s.residuals(a, b, c).iter().all(|r| r.abs() < 1e-10), "{a} {b} {c} {x0}: {:?}", s.residuals(a, b, c));
        let (x, v) = s.state(0.0);
        assert!((x - x0).abs() < 1e-12 && v.abs() < 1e-12);
        let period = s.period().unwrap();
        assert!((s.eval(1.234 + period) - s.eval(1.234)).abs() < 1e-9);
        let p = OscillatorParams::unforced(a, b, c);
        let traj = integrate(|t, x, v| p.accel(t, x, v), State::at_rest(x0), 2.0 * period, &StepControl::adaptive(1e-12, 1e-12)).unwrap();
        for i in 0..=200 {
            let t = 2.0 * period * i as f64 / 200.0;
            assert!((traj.interpolate(t).unwrap().x - s.eval(t)).abs() < 1e-6);
            assert!(defect(a, b, c, |t| s.eval(t), t) < 1e-5);
        }
    }
}

#[test]
fn sech_reference_orbit() {
    let o = homoclinic_orbit(1.0f64, 1.0, 1.0, HomoclinicKind::Sech, RootBranch::Plus).unwrap();
    assert!((o.x0 - 1.06652).abs() < 1e-5);
    assert!((o.lambda + 0.30131).abs() < 5e-5);
    assert!((o.k - 1.0).abs() < 1e-15);
    let y: f64 = (-3.0 + 57f64.sqrt()) / 4.0;
    let lambda = (y - 2.0) / (4.0 - y);
    assert!((o.amplitude - y.sqrt() * (1.0 + lambda).sqrt()).abs() < 1e-14);
    assert!((o.amplitude - 0.89147).abs() < 1e-5);
    let (x, v) = eval_homoclinic(&o, 0.0);
    assert!((x - o.amplitude / (1.0 + o.lambda).sqrt()).abs() < 1e-14 && v == 0.0);
    assert!(eval_homoclinic(&o, 40.0).0.abs() < 1e-15);
}

#[test]
fn tanh_endpoints_are_saddles() {
    let o = homoclinic_orbit(-1.0f64, -3.0, 1.0, HomoclinicKind::Tanh, RootBranch::Minus).unwrap();
    let end = o.amplitude / (1.0 + o.lambda).sqrt();
    let eq = equilibria(&OscillatorParams::unforced(-1.0, -3.0, 1.0));
    assert!(eq.iter().any(|e| (e.x - end).abs() < 1e-8 && e.kind == EquilibriumKind::Saddle));
    assert!((eval_homoclinic(&o, 30.0).0 - end).abs() < 1e-12);
    let h = 1e-6;
    let fd = (eval_homoclinic(&o, h).0 - eval_homoclinic(&o, -h).0) / (2.0 * h);
    assert!((eval_homoclinic(&o, 0.0).1 - fd).abs() < 1e-8);
    assert!((fd - o.amplitude * o.k.sqrt()).abs() < 1e-8);
}

#[test]
fn guards_name_the_inequality() {
    let e = homoclinic_orbit(-1.0f64, 1.0, 1.0, HomoclinicKind::Sech, RootBranch::Plus).unwrap_err();
    assert!(e.to_string().contains('a'));
    assert!(homoclinic_orbit(1.0f64, 1.0, 0.0, HomoclinicKind::Sech, RootBranch::Plus).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sech_orbits_solve_the_equation_on_the_zero_level(a in 0.2f64..2.0, b in -2.0f64..2.0, c in 0.1f64..2.0, plus in any::<bool>()) {
        let branch = if plus { RootBranch::Plus } else { RootBranch::Minus };
        let Ok(o) = homoclinic_orbit(a, b, c, HomoclinicKind::Sech, branch) else { return Ok(()) };
        prop_assume!(o.lambda.abs() < 20.0);
        let p = OscillatorParams::unforced(a, b, c);
        for i in 0..200 {
            let t = (i as f64 - 100.0) * 0.04;
            prop_assert!(defect(a, b, c, |t| eval_homoclinic(&o, t).0, t) < 1e-5);
            let (x, v) = eval_homoclinic(&o, t);
            prop_assert!(energy(&p, &State::new(t, x, v)).abs() < 1e-10);
        }
    }

    #[test]
    fn tanh_orbits_solve_the_equation(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, plus in any::<bool>()) {
        let branch = if plus { RootBranch::Plus } else { RootBranch::Minus };
        let Ok(o) = homoclinic_orbit(a, b, c, HomoclinicKind::Tanh, branch) else { return Ok(()) };
        prop_assume!(o.lambda.abs() < 20.0 && o.k < 20.0);
        let p = OscillatorParams::unforced(a, b, c);
        let level = energy(&p, &State::new(0.0, eval_homoclinic(&o, 0.0).0, eval_homoclinic(&o, 0.0).1));
        for i in 0..200 {
            let t = (i as f64 - 100.0) * 0.03;
            prop_assert!(defect(a, b, c, |t| eval_homoclinic(&o, t).0, t) < 1e-5);
            let (x, v) = eval_homoclinic(&o, t);
            prop_assert!((energy(&p, &State::new(t, x, v)) - level).abs() < 1e-10);
        }
    }
}

#[test]
fn single_precision_orbit() {
    let o = homoclinic_orbit(1.0f32, 1.0, 1.0, HomoclinicKind::Sech, RootBranch::Plus).unwrap();
    assert!((o.x0 - 1.06652).abs() < 1e-4);
    let s = solve_cn_coefficients(-1.0f32, 2.0, 3.0, 1.0).unwrap();
    assert!((s.lambda - (4.0 - 3.0 * 2f32.sqrt())).abs() < 1e-4);
}
