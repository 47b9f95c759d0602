use quintic_duffing::chaos::{
    bifurcation_data, count_clusters, gamma_scan, lyapunov_max, poincare_map, poincare_map_restarted,
    strobe_control, LyapunovConfig, ScanConfig, ScanOutcome,
};
use quintic_duffing::odeint::StepControl;
use quintic_duffing::oscillator::{OscillatorParams, State};

fn base(gamma: f64, omega: f64) -> OscillatorParams<f64> {
    OscillatorParams::driven(1.0, 1.0, 0.0, 0.1, gamma, omega)
}

fn onset(omega: f64) -> f64 {
    let cfg = ScanConfig { gamma_lo: 0.05, gamma_hi: 0.9, ..ScanConfig::default() };
    match gamma_scan(&base(0.0, omega), &cfg).unwrap() {
        ScanOutcome::Onset(row) => row.gamma_c,
        other => panic!("{other:?}"),
    }
}

#[test]
fn onset_near_reference_values() {
    for (omega, want) in [(1.1, 0.173), (1.4, 0.340), (2.0, 0.684)] {
        let g = onset(omega);
        eprintln!("omega {omega}: gamma_c {g}");
        assert!((g - want).abs() <= 0.06, "omega {omega}: {g}");
    }
}

#[test]
fn lyapunov_sign_on_both_sides_of_onset() {
    let cfg = LyapunovConfig::default();
    let chaotic = lyapunov_max(&base(0.35, 1.4), State::at_rest(0.0), &cfg).unwrap();
    let regular = lyapunov_max(&base(0.10, 1.4), State::at_rest(0.0), &cfg).unwrap();
    eprintln!("{chaotic} {regular}");
    assert!(chaotic > 0.01 && regular <= 0.0);
}

#[test]
fn lyapunov_is_insensitive_to_renormalisation() {
    let p = base(0.35, 1.4);
    let cfg = LyapunovConfig::default();
    let reference = lyapunov_max(&p, State::at_rest(0.0), &cfg).unwrap();
    let halved = lyapunov_max(&p, State::at_rest(0.0), &LyapunovConfig { renorm_periods: 0.5, ..cfg }).unwrap();
    let big = lyapunov_max(&p, State::at_rest(0.0), &LyapunovConfig { offset: 1e-6, ..cfg }).unwrap();
    let small = lyapunov_max(&p, State::at_rest(0.0), &LyapunovConfig { offset: 1e-10, ..cfg }).unwrap();
    eprintln!("{reference} {halved} {big} {small}");
    for l in [halved, big, small] {
        assert!((l / reference - 1.0).abs() <= 0.2, "{reference} vs {l}");
    }
}

#[test]
fn strobe_points_regular_then_scattered() {
    let periodic = base(0.30, 1.4);
    let ctrl = strobe_control(&periodic, 200);
    // The approach to the period-1 orbit is slow at this amplitude.
    let s = poincare_map(&periodic, State::at_rest(0.0), 500, 1000, &ctrl).unwrap();
    let n_reg = count_clusters(&s.points, 1e-3);
    let chaotic = base(0.35, 1.4);
    let s = poincare_map(&chaotic, State::at_rest(0.0), 500, 100, &ctrl).unwrap();
    let n_chaos = count_clusters(&s.points, 1e-3);
    eprintln!("{n_reg} {n_chaos}");
    assert!(n_reg <= 8 && n_chaos > 100);
}

#[test]
fn restart_matches_continuation() {
    let p = base(0.30, 1.4);
    let ctrl = StepControl::adaptive(1e-10, 1e-10);
    let a = poincare_map(&p, State::at_rest(0.1), 20, 0, &ctrl).unwrap();
    let b = poincare_map_restarted(&p, State::at_rest(0.1), 20, 0, &ctrl).unwrap();
    let worst = a.points.iter().zip(&b.points).map(|(p, q)| (p.0 - q.0).abs().max((p.1 - q.1).abs())).fold(0.0, f64::max);
    eprintln!("{worst:e}");
    assert!(worst < 1e-9);
}

#[test]
fn period_doubling_in_sweep() {
    let gammas: Vec<f64> = (0..=14).map(|i| 0.20 + 0.01 * i as f64).collect();
    let p = base(0.0, 1.4);
    let ctrl = strobe_control(&p, 200);
    let data = bifurcation_data(&p, &gammas, State::at_rest(0.0), 64, 300, &ctrl).unwrap();
    let counts: Vec<usize> = data
        .iter()
        .map(|s| count_clusters(&s.p_values.iter().map(|&x| (x, 0.0)).collect::<Vec<_>>(), 1e-3))
        .collect();
    eprintln!("{counts:?}");
    assert_eq!(counts[0], 1);
    assert!(counts.windows(2).any(|w| w[1] >= 2 * w[0]));
}

#[test]
fn overdamped_has_no_onset() {
    let p = OscillatorParams::driven(1.0, 1.0, 0.0, 5.0, 0.0, 1.4);
    let cfg = ScanConfig { gamma_lo: 0.1, gamma_hi: 1.0, grid_step: 0.1, ..ScanConfig::default() };
    assert!(matches!(gamma_scan(&p, &cfg).unwrap(), ScanOutcome::NoOnset { .. }));
}

#[test]
fn scan_is_deterministic() {
    let cfg = ScanConfig { gamma_lo: 0.30, gamma_hi: 0.40, ..ScanConfig::default() };
    let a = gamma_scan(&base(0.0, 1.4), &cfg).unwrap();
    let b = gamma_scan(&base(0.0, 1.4), &cfg).unwrap();
    assert_eq!(a, b);
}
