use quintic_duffing::odeint::euler;
use quintic_duffing::oscillator::{OscillatorParams, State};
use quintic_duffing::sde::{ensemble_stats, euler_maruyama, euler_maruyama_serial, sde_drift, SdeConfig};

#[test]
fn zero_noise_is_deterministic_euler_bitwise() {
    let p = OscillatorParams::<f64>::driven(1.0, 1.0, 0.3, 0.1, 0.4, 1.3);
    let cfg = SdeConfig { dt: 1e-3, n_steps: 5000, sigma: 0.0, ensemble: 2, seed: 9 };
    let s0 = State::new(0.0, 0.2, -0.1);
    let paths = euler_maruyama(&p, &cfg, s0).unwrap();
    let det = euler(|t, x, v| sde_drift(&p, t, x, v), s0, cfg.dt, cfg.n_steps).unwrap();
    for path in &paths {
        assert_eq!(path.trajectory.samples(), det.samples());
    }
}

/// `dv = -theta v dt + theta cos(omega t) dt + sigma dW` once `a = b = c = 0`.
fn ou(theta: f64, omega: f64) -> OscillatorParams<f64> {
    OscillatorParams::new(0.0, 0.0, 0.0, 0.0, theta, omega, 1.0)
}

fn ou_mean(theta: f64, omega: f64, v0: f64, t: f64) -> f64 {
    let e = (-theta * t).exp();
    v0 * e + theta / (theta * theta + omega * omega) * (theta * (omega * t).cos() + omega * (omega * t).sin() - theta * e)
}

#[test]
fn ou_variance_within_three_standard_errors() {
    let (theta, sigma, n) = (0.5, 0.3, 10_000);
    let cfg = SdeConfig { dt: 1e-3, n_steps: 1000, sigma, ensemble: n, seed: 2024 };
    let paths = euler_maruyama(&ou(theta, 1.0), &cfg, State::at_rest(0.0)).unwrap();
    let m = ensemble_stats(&paths, 1.0).unwrap();
    let exact = sigma * sigma * (1.0 - (-2.0 * theta).exp()) / (2.0 * theta);
    let se = exact * (2.0 / (n as f64 - 1.0)).sqrt();
    assert!((m.var_v - exact).abs() < 3.0 * se, "{} vs {exact} (se {se})", m.var_v);
}

#[test]
fn serial_and_parallel_ensembles_match() {
    let p = OscillatorParams::<f64>::driven(1.0, 1.0, 0.1, 0.0, 0.5, 1.2);
    let cfg = SdeConfig { dt: 1e-2, n_steps: 300, sigma: 0.2, ensemble: 64, seed: 11 };
    let a = euler_maruyama(&p, &cfg, State::at_rest(0.1)).unwrap();
    let b = euler_maruyama_serial(&p, &cfg, State::at_rest(0.1)).unwrap();
    let c = euler_maruyama(&p, &cfg, State::at_rest(0.1)).unwrap();
    for ((x, y), z) in a.iter().zip(&b).zip(&c) {
        assert_eq!(x.trajectory.samples(), y.trajectory.samples());
        assert_eq!(x.trajectory.samples(), z.trajectory.samples());
    }
    assert_ne!(a[0].trajectory.samples(), a[1].trajectory.samples());
}

#[test]
fn weak_order_one_on_ou_mean() {
    let (theta, omega, v0) = (2.0, 1.0, 5.0);
    let dts = [0.1, 0.05, 0.025, 0.0125];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let n_steps = (1.0 / dt as f64).round() as usize;
            let cfg = SdeConfig { dt, n_steps, sigma: 0.1, ensemble: 10_000, seed: 5 };
            let paths = euler_maruyama(&ou(theta, omega), &cfg, State::new(0.0, 0.0, v0)).unwrap();
            (ensemble_stats(&paths, 1.0).unwrap().mean_v - ou_mean(theta, omega, v0, 1.0)).abs()
        })
        .collect();
    let lx: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / 4.0, ly.iter().sum::<f64>() / 4.0);
    let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 1.0).abs() <= 0.3, "slope {slope}, errors {errs:?}");
}

#[test]
fn single_precision_paths() {
    let p = OscillatorParams::<f32>::driven(-1.0, 0.5, 0.0, 0.0, 0.2, 1.0);
    let cfg = SdeConfig { dt: 1e-2f32, n_steps: 100, sigma: 0.1, ensemble: 8, seed: 1 };
    let paths = euler_maruyama(&p, &cfg, State::at_rest(0.0f32)).unwrap();
    let m = ensemble_stats(&paths, 1.0).unwrap();
    assert!(m.var_v > 0.0 && m.var_v.is_finite());
}
