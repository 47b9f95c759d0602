use std::f64::consts::PI;

use proptest::prelude::*;
use quintic_duffing::chaos::{gamma_scan, ScanConfig};
use quintic_duffing::exact::{homoclinic_orbit, HomoclinicKind, HomoclinicOrbit, RootBranch};
use quintic_duffing::melnikov::{
    chaos_threshold, chebyshev_fit_sech, chebyshev_fit_tanh, melnikov, melnikov_sech, melnikov_tanh, sech_damping_closed_form,
    tanh_damping_closed_form, wave_amplitude_quadrature,
};
use quintic_duffing::oscillator::OscillatorParams;

fn orbit(kind: HomoclinicKind, amplitude: f64, k: f64, lambda: f64) -> HomoclinicOrbit<f64> {
    HomoclinicOrbit {
        kind,
        x0: amplitude / (1.0 + lambda).sqrt(),
        lambda,
        k,
        amplitude,
    }
}

/// Simpson on `[-L, L]`, `L = 40 / sqrt(k)`.
fn simpson(f: impl Fn(f64) -> f64, k: f64) -> f64 {
    let l = 40.0 / k.sqrt();
    let n = 40_000;
    let h = 2.0 * l / n as f64;
    let mut s = f(-l) + f(l);
    for i in 1..n {
        s += f(-l + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn sech_damping_reference() {
    let o = orbit(HomoclinicKind::Sech, 1.0, 1.0, 1.0);
    let q = simpson(|t| 2.0 * (2.0 * t).sinh().powi(2) / ((2.0 * t).cosh() + 3.0).powi(3), 1.0);
    let i2 = sech_damping_closed_form(&o);
    assert!((i2 - q).abs() < 1e-6, "{i2} vs {q}");
    assert!((i2 - 0.29709).abs() < 1e-5);
}

#[test]
fn tanh_damping_reference() {
    let o = orbit(HomoclinicKind::Tanh, 1.0, 1.0, 1.0);
    let q = simpson(|t| (1.0 / t.cosh()).powi(4) / (1.0 + t.tanh().powi(2)).powi(3), 1.0);
    assert!((tanh_damping_closed_form(&o) - q).abs() < 1e-6);
}

#[test]
fn pure_damping_and_pure_forcing() {
    let o = homoclinic_orbit(1.0f64, 1.0, 1.0, HomoclinicKind::Sech, RootBranch::Plus).unwrap();
    let damped = melnikov_sech(&o, 0.0, 0.2, 1.3).unwrap();
    assert!(!damped.has_simple_zeros());
    assert!((0..100).all(|i| damped.eval(0.1 * i as f64) < 0.0));
    let forced = melnikov_sech(&o, 0.4, 0.0, 1.3).unwrap();
    assert!(forced.has_simple_zeros());
    for n in -3..=3 {
        assert!(forced.eval(n as f64 * PI / 1.3).abs() < 1e-14);
    }
}

#[test]
fn tanh_wave_term_vanishes_for_fast_forcing() {
    let o = orbit(HomoclinicKind::Tanh, 1.0, 1.0, 0.5);
    let slow = melnikov_tanh(&o, 1.0, 0.1, 1.0).unwrap();
    let fast = melnikov_tanh(&o, 1.0, 0.1, 60.0).unwrap();
    assert!(fast.wave_amplitude.abs() < 1e-30);
    assert!(fast.threshold_ratio > 1e20 * slow.threshold_ratio);
    assert!(!melnikov_tanh(&o, 0.0, 0.1, 1.0).unwrap().has_simple_zeros());
}

#[test]
fn threshold_is_linear_in_damping() {
    let o = homoclinic_orbit(1.0f64, 1.0, 0.2, HomoclinicKind::Sech, RootBranch::Plus).unwrap();
    let g1 = chaos_threshold(&o, 0.1, 1.4).unwrap();
    let g2 = chaos_threshold(&o, 0.2, 1.4).unwrap();
    assert!((g2 - 2.0 * g1).abs() < 1e-14);
    assert_eq!(chaos_threshold(&o, 0.0, 1.4).unwrap(), 0.0);
}

#[test]
fn threshold_has_the_order_of_the_simulated_onset() {
    let o = homoclinic_orbit(1.0f64, 1.0, 0.2, HomoclinicKind::Sech, RootBranch::Plus).unwrap();
    let predicted = chaos_threshold(&o, 0.1, 1.4).unwrap();
    let base = OscillatorParams::driven(1.0, 1.0, 0.2, 0.1, 0.0, 1.4);
    let cfg = ScanConfig { gamma_lo: 0.05, gamma_hi: 0.9, ..ScanConfig::default() };
    let simulated = gamma_scan(&base, &cfg).unwrap().onset().unwrap().gamma_c;
    eprintln!("melnikov {predicted}, scan {simulated}");
    let ratio = predicted / simulated;
    assert!(ratio > 0.2 && ratio < 5.0, "{predicted} vs {simulated}");
}

#[test]
fn fit_reference_lambdas() {
    let f = chebyshev_fit_sech(1.0f64).unwrap();
    assert!(f.max_error < 0.05);
    let g = chebyshev_fit_sech(-0.30131f64).unwrap();
    assert!(g.coefficients.iter().all(|c| c.is_finite()) && g.max_error.is_finite());
    let h = chebyshev_fit_tanh(1.0f64).unwrap();
    assert!(h.coefficients.iter().all(|c| c.is_finite()));
    assert!(chebyshev_fit_tanh(2.0 / 3f64.sqrt()).is_err());
}

/// Wave amplitude with the fitted integrand vs direct quadrature of the
/// exact one. Measured ratio |W - Q| / (max_error_visited * A sqrt(k) * pi / sqrt(k))
/// stays below 1 on these ranges; 3 is the frozen bound.
fn wave_error_ratio(o: &HomoclinicOrbit<f64>, omega: f64) -> f64 {
    let m = melnikov(o, 1.0, 0.0, omega).unwrap();
    let q = wave_amplitude_quadrature(o, omega).unwrap();
    let scale = m.fit.max_error_visited.max(1e-12) * o.amplitude * PI;
    (m.wave_amplitude - q).abs() / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zeros_iff_ratio_exceeded(lambda in 0.05f64..3.0, k in 0.3f64..3.0, omega in 0.3f64..3.0, gamma in 0.01f64..2.0, delta in 0.01f64..1.0) {
        let o = orbit(HomoclinicKind::Sech, (1.0 + lambda).sqrt(), k, lambda);
        let m = melnikov(&o, gamma, delta, omega).unwrap();
        let r = gamma / delta;
        prop_assume!((r / m.threshold_ratio - 1.0).abs() > 1e-6);
        let crosses = (0..2000)
            .map(|i| m.eval(2.0 * PI / omega * i as f64 / 2000.0))
            .any(|v| v > 0.0);
        prop_assert_eq!(crosses, r > m.threshold_ratio);
        prop_assert_eq!(m.has_simple_zeros(), r > m.threshold_ratio);
    }

    #[test]
    fn period_in_t0(lambda in 0.05f64..1.1, omega in 0.3f64..3.0, t0 in -20.0f64..20.0, tanh in any::<bool>()) {
        let kind = if tanh { HomoclinicKind::Tanh } else { HomoclinicKind::Sech };
        let m = melnikov(&orbit(kind, 1.0, 1.0, lambda), 0.7, 0.2, omega).unwrap();
        prop_assert!((m.eval(t0 + 2.0 * PI / omega) - m.eval(t0)).abs() < 1e-12);
        let peak = (0..4000).map(|i| m.eval(2.0 * PI / omega * i as f64 / 4000.0)).fold(f64::MIN, f64::max);
        prop_assert!((peak - (0.7 * m.wave_amplitude.abs() - 0.2 * m.damping_integral)).abs() < 1e-5);
    }

    #[test]
    fn sech_wave_amplitude_within_fit_bound(lambda in 0.05f64..2.0, k in 0.5f64..2.0, omega in 0.3f64..2.5) {
        let o = orbit(HomoclinicKind::Sech, (1.0 + lambda).sqrt(), k, lambda);
        prop_assert!(wave_error_ratio(&o, omega) < 3.0);
    }
}
