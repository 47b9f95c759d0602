//! Melnikov function along the sech- and tanh-type orbits of the
//! conservative oscillator, for the perturbation `gamma cos(omega t) - delta x'`.
//!
//! `M(t0) = gamma W phase(omega t0) - delta D` where `phase` is `sin` for
//! sech orbits and `cos` for tanh orbits. `D` is the exact integral of
//! `x'^2`; `W` uses a two-term Chebyshev fit of the orbit profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{eval_homoclinic, HomoclinicKind, HomoclinicOrbit};
use crate::quad;
use crate::scalar::Real;

/// Below this `lambda` the closed-form damping integrals lose accuracy and
/// quadrature is used instead.
const CLOSED_FORM_MIN_LAMBDA: f64 = 1e-4;

/// Two-term fit of the orbit profile.
///
/// Sech: `x / (1 + lambda x^2)^{3/2} ~ r x + s x^3`, coefficients `[r, s]`.
/// Tanh: `(1 - x) / (1 + lambda x)^{3/2} ~ 1 + rbar x + sbar x^2`,
/// coefficients `[1, rbar, sbar]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ChebyshevFit<T: Real> {
    pub kind: HomoclinicKind,
    pub lambda: T,
    pub coefficients: Vec<T>,
    /// Sup error on `[-1, 1]`; infinite if the target is singular there.
    pub max_error: T,
    /// Sup error on `[0, 1]`, the range the orbit actually visits.
    pub max_error_visited: T,
}

impl<T: Real> ChebyshevFit<T> {
    pub fn target(&self, x: T) -> T {
        let one = T::one();
        match self.kind {
            HomoclinicKind::Sech => x / (one + self.lambda * x * x).powf(T::lit(1.5)),
            HomoclinicKind::Tanh => (one - x) / (one + self.lambda * x).powf(T::lit(1.5)),
        }
    }

    pub fn approx(&self, x: T) -> T {
        let c = &self.coefficients;
        match self.kind {
            HomoclinicKind::Sech => c[0] * x + c[1] * x * x * x,
            HomoclinicKind::Tanh => c[0] + c[1] * x + c[2] * x * x,
        }
    }

    fn sup_error(&self, lo: T, hi: T) -> T {
        let n = 4000;
        let mut worst = T::zero();
        for i in 0..=n {
            let x = lo + (hi - lo) * T::from_count(i) / T::from_count(n);
            let e = (self.target(x) - self.approx(x)).abs();
            if !e.is_finite() {
                return T::infinity();
            }
            worst = worst.max(e);
        }
        worst
    }

    fn with_errors(mut self) -> Self {
        self.max_error = self.sup_error(-T::one(), T::one());
        self.max_error_visited = self.sup_error(T::zero(), T::one());
        self
    }
}

/// Fit for sech orbits. Requires `4 - (sqrt2 - 2) lambda > 0` and
/// `(2 + sqrt2) lambda + 4 > 0`.
pub fn chebyshev_fit_sech<T: Real>(lambda: T) -> Result<ChebyshevFit<T>> {
    let n = |v: f64| T::lit(v);
    let r2 = n(2.0).sqrt();
    let g1 = n(4.0) - (r2 - n(2.0)) * lambda;
    let g2 = (n(2.0) + r2) * lambda + n(4.0);
    if !(g1 > T::zero() && g2 > T::zero()) {
        return Err(Error::Guard(format!(
            "sech fit needs 4 - (sqrt2-2) lambda > 0 and (2+sqrt2) lambda + 4 > 0, lambda = {lambda}"
        )));
    }
    let sn2 = (T::PI() / n(8.0)).sin().powi(2);
    let cs2 = (T::PI() / n(8.0)).cos().powi(2);
    let rs = (lambda * sn2 + T::one()).sqrt();
    let rc = (lambda * cs2 + T::one()).sqrt();
    let den = g1.powf(n(1.5)) * g2.powf(n(1.5));
    let pre = n(64.0) * r2;
    let r = pre * (-sn2 * rs - lambda * sn2 * sn2 * rs + cs2 * rc + lambda * cs2 * cs2 * rc) / den;
    let s = pre * (lambda * sn2 * rs + rs - lambda * cs2 * rc - rc) / den;
    Ok(ChebyshevFit {
        kind: HomoclinicKind::Sech,
        lambda,
        coefficients: vec![r, s],
        max_error: T::zero(),
        max_error_visited: T::zero(),
    }
    .with_errors())
}

/// Fit for tanh orbits. Requires `2 - sqrt3 lambda > 0` and
/// `sqrt3 lambda + 2 > 0`.
pub fn chebyshev_fit_tanh<T: Real>(lambda: T) -> Result<ChebyshevFit<T>> {
    let n = |v: f64| T::lit(v);
    let r3 = n(3.0).sqrt();
    let g1 = r3 * lambda + n(2.0);
    let g2 = n(2.0) - r3 * lambda;
    if !(g1 > T::zero() && g2 > T::zero()) {
        return Err(Error::Guard(format!(
            "tanh fit needs |lambda| < 2/sqrt3, lambda = {lambda}"
        )));
    }
    let p = g1.powf(n(1.5));
    let q = g2.powf(n(1.5));
    let r2 = n(2.0).sqrt();
    let r6 = n(6.0).sqrt();
    let rbar = r2 / n(3.0) * (n(2.0) * r3 / p - n(3.0) / p - n(2.0) * r3 / q - n(3.0) / q);
    let sbar = n(2.0) / n(3.0) * (-r6 / p + n(2.0) * r2 / p + r6 / q + n(2.0) * r2 / q - n(2.0));
    Ok(ChebyshevFit {
        kind: HomoclinicKind::Tanh,
        lambda,
        coefficients: vec![T::one(), rbar, sbar],
        max_error: T::zero(),
        max_error_visited: T::zero(),
    }
    .with_errors())
}

/// Which harmonic of `omega t0` carries the forcing term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Sine,
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct MelnikovResult<T: Real> {
    pub orbit: HomoclinicOrbit<T>,
    pub gamma: T,
    pub delta: T,
    pub omega: T,
    pub phase: Phase,
    /// `W` in `M(t0) = gamma W phase(omega t0) - delta D`.
    pub wave_amplitude: T,
    /// `D = int x'^2 dt`.
    pub damping_integral: T,
    pub damping_by_quadrature: bool,
    pub fit: ChebyshevFit<T>,
    /// `D / |W|`: simple zeros exist when `gamma / delta` exceeds it.
    pub threshold_ratio: T,
}

impl<T: Real> MelnikovResult<T> {
    pub fn eval(&self, t0: T) -> T {
        let arg = self.omega * t0;
        let h = match self.phase {
            Phase::Sine => arg.sin(),
            Phase::Cosine => arg.cos(),
        };
        self.gamma * self.wave_amplitude * h - self.delta * self.damping_integral
    }

    /// `M` changes sign: the oscillatory part beats the damping.
    pub fn has_simple_zeros(&self) -> bool {
        (self.gamma * self.wave_amplitude).abs() > self.delta * self.damping_integral
    }
}

/// Closed-form `int x'^2 dt` along a sech orbit (`lambda > 0`).
pub fn sech_damping_closed_form<T: Real>(orbit: &HomoclinicOrbit<T>) -> T {
    let l = orbit.lambda;
    let one = T::one();
    let ll = l * (l + one);
    let num = T::lit(2.0) * (l + one).sqrt() * l.powf(T::lit(1.5)) + ll.sqrt() - (l / (l + one)).sqrt().atanh();
    orbit.amplitude * orbit.amplitude * orbit.k.sqrt() * num / (T::lit(4.0) * ll.powf(T::lit(1.5)))
}

/// Closed-form `int x'^2 dt` along a tanh orbit (`lambda > 0`).
pub fn tanh_damping_closed_form<T: Real>(orbit: &HomoclinicOrbit<T>) -> T {
    let l = orbit.lambda;
    let one = T::one();
    let three = T::lit(3.0);
    let sl = l.sqrt();
    let num = sl * (three * l + one) + (l + one) * (three * l - one) * sl.atan();
    orbit.amplitude * orbit.amplitude * orbit.k.sqrt() * num / (T::lit(4.0) * l.powf(T::lit(1.5)) * (l + one))
}

fn half_line<T: Real>(orbit: &HomoclinicOrbit<T>) -> T {
    T::lit(40.0) / orbit.k.sqrt()
}

/// `int x'^2 dt` by adaptive quadrature.
pub fn damping_quadrature<T: Real>(orbit: &HomoclinicOrbit<T>) -> Result<T> {
    let tol = T::lit(1e-13).max(T::epsilon() * T::lit(16.0));
    let half = quad::integrate(
        |t| {
            let v = eval_homoclinic(orbit, t).1;
            v * v
        },
        T::zero(),
        half_line(orbit),
        tol,
        tol,
    )?;
    Ok(T::lit(2.0) * half)
}

/// `W` from the unapproximated integrand by adaptive quadrature.
pub fn wave_amplitude_quadrature<T: Real>(orbit: &HomoclinicOrbit<T>, omega: T) -> Result<T> {
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    let two = T::lit(2.0);
    match orbit.kind {
        HomoclinicKind::Sech => Ok(-two
            * quad::integrate(
                |t| eval_homoclinic(orbit, t).1 * (omega * t).sin(),
                T::zero(),
                half_line(orbit),
                tol,
                tol,
            )?),
        HomoclinicKind::Tanh => Ok(two
            * quad::integrate(
                |t| eval_homoclinic(orbit, t).1 * (omega * t).cos(),
                T::zero(),
                half_line(orbit),
                tol,
                tol,
            )?),
    }
}

/// `W` from the Chebyshev fit.
pub fn wave_amplitude<T: Real>(orbit: &HomoclinicOrbit<T>, fit: &ChebyshevFit<T>, omega: T) -> T {
    let n = |v: f64| T::lit(v);
    let k = orbit.k;
    let sk = k.sqrt();
    let arg = T::PI() * omega / (n(2.0) * sk);
    let pw = T::PI() * omega;
    let c = &fit.coefficients;
    match orbit.kind {
        HomoclinicKind::Sech => {
            let bracket = c[0] * pw / k + c[1] * pw * (k + omega * omega) / (n(6.0) * k * k);
            orbit.amplitude * sk * bracket / arg.cosh()
        }
        HomoclinicKind::Tanh => {
            let bracket = -c[1] * pw / k + c[2] * pw * (omega * omega - n(8.0) * k) / (n(6.0) * k * k);
            orbit.amplitude * sk * bracket / arg.sinh()
        }
    }
}

fn check_inputs<T: Real>(orbit: &HomoclinicOrbit<T>, gamma: T, delta: T, omega: T) -> Result<()> {
    if !(orbit.k > T::zero()) {
        return Err(Error::Guard(format!("orbit rate k = {} must be positive", orbit.k)));
    }
    if !(omega > T::zero() && omega.is_finite()) {
        return Err(Error::invalid("omega", "forcing frequency must be positive"));
    }
    if !gamma.is_finite() || !(delta >= T::zero() && delta.is_finite()) {
        return Err(Error::invalid("delta", "gamma finite and delta >= 0 required"));
    }
    Ok(())
}

/// Melnikov function for either orbit type.
pub fn melnikov<T: Real>(orbit: &HomoclinicOrbit<T>, gamma: T, delta: T, omega: T) -> Result<MelnikovResult<T>> {
    check_inputs(orbit, gamma, delta, omega)?;
    let (fit, phase) = match orbit.kind {
        HomoclinicKind::Sech => (chebyshev_fit_sech(orbit.lambda)?, Phase::Sine),
        HomoclinicKind::Tanh => (chebyshev_fit_tanh(orbit.lambda)?, Phase::Cosine),
    };
    let by_quad = !(orbit.lambda > T::lit(CLOSED_FORM_MIN_LAMBDA));
    let damping_integral = if by_quad {
        damping_quadrature(orbit)?
    } else {
        match orbit.kind {
            HomoclinicKind::Sech => sech_damping_closed_form(orbit),
            HomoclinicKind::Tanh => tanh_damping_closed_form(orbit),
        }
    };
    let w = wave_amplitude(orbit, &fit, omega);
    let threshold_ratio = if w == T::zero() {
        T::infinity()
    } else {
        damping_integral / w.abs()
    };
    Ok(MelnikovResult {
        orbit: *orbit,
        gamma,
        delta,
        omega,
        phase,
        wave_amplitude: w,
        damping_integral,
        damping_by_quadrature: by_quad,
        fit,
        threshold_ratio,
    })
}

/// Melnikov function along a sech-type orbit.
pub fn melnikov_sech<T: Real>(orbit: &HomoclinicOrbit<T>, gamma: T, delta: T, omega: T) -> Result<MelnikovResult<T>> {
    if orbit.kind != HomoclinicKind::Sech {
        return Err(Error::invalid("orbit", "expected a sech-type orbit"));
    }
    melnikov(orbit, gamma, delta, omega)
}

/// Melnikov function along a tanh-type orbit.
pub fn melnikov_tanh<T: Real>(orbit: &HomoclinicOrbit<T>, gamma: T, delta: T, omega: T) -> Result<MelnikovResult<T>> {
    if orbit.kind != HomoclinicKind::Tanh {
        return Err(Error::invalid("orbit", "expected a tanh-type orbit"));
    }
    melnikov(orbit, gamma, delta, omega)
}

/// Critical forcing `gamma_c = delta D / |W|`.
pub fn chaos_threshold<T: Real>(orbit: &HomoclinicOrbit<T>, delta: T, omega: T) -> Result<T> {
    let r = melnikov(orbit, T::one(), delta, omega)?;
    if r.wave_amplitude == T::zero() || !r.threshold_ratio.is_finite() {
        return Err(Error::Inconclusive);
    }
    Ok(delta * r.threshold_ratio)
}
