//! Second-order Krylov–Bogoliubov–Mitropolsky approximation.
//!
//! Around a center `eta` the displacement `u = x - eta` obeys
//!
//! ```text
//! u'' + w0^2 u + p [eps_d u' + B u^2 + C u^3 + D u^4 + E u^5 - phi(t)] = 0
//! ```
//!
//! with `eps_d = eps delta`, `phi(t) = eps gamma cos(omega t)` and `p = 1`.
//! The solution is `u = a cos(psi) + p u1 + p^2 u2` with slowly varying
//! amplitude `a(t)` and phase `psi(t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscillator::{equilibria, EquilibriumKind, OscillatorParams};
use crate::scalar::Real;

/// Expansion order in the bookkeeping parameter `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    First,
    #[default]
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct KbmCoefficients<T: Real> {
    pub omega0: T,
    /// Coefficient of `u^2`.
    pub b2: T,
    /// Coefficient of `u^3`.
    pub c3: T,
    /// Coefficient of `u^4`.
    pub d4: T,
    /// Coefficient of `u^5`.
    pub e5: T,
    pub eta: T,
    /// `eps * delta`.
    pub epsilon_eff: T,
    /// `eps * gamma`.
    pub phi_amplitude: T,
    pub phi_omega: T,
}

impl<T: Real> KbmCoefficients<T> {
    pub fn phi(&self, t: T) -> T {
        self.phi_amplitude * (self.phi_omega * t).cos()
    }

    /// Whether the expansion is about the origin with no even-power terms.
    pub fn is_centered(&self) -> bool {
        self.eta == T::zero() && self.b2 == T::zero() && self.d4 == T::zero()
    }

    pub fn base_period(&self) -> T {
        T::TAU() / self.omega0
    }
}

/// Expansion coefficients for the oscillator, expanded about the origin
/// when `a < 0` and about the center nearest `x0` otherwise.
pub fn build_coefficients<T: Real>(params: &OscillatorParams<T>, x0: T) -> Result<KbmCoefficients<T>> {
    params.validate()?;
    let n = |v: f64| T::lit(v);
    let (a, b, c) = (params.a, params.b, params.c);
    let forcing = KbmCoefficients {
        omega0: T::zero(),
        b2: T::zero(),
        c3: T::zero(),
        d4: T::zero(),
        e5: T::zero(),
        eta: T::zero(),
        epsilon_eff: params.epsilon * params.delta,
        phi_amplitude: params.epsilon * params.gamma,
        phi_omega: params.omega,
    };
    if a < T::zero() {
        return Ok(KbmCoefficients {
            omega0: (-a).sqrt(),
            c3: b,
            e5: c,
            ..forcing
        });
    }
    let eta = equilibria(&params.conservative())
        .into_iter()
        .filter(|e| e.kind == EquilibriumKind::Center && e.x != T::zero())
        .min_by(|p, q| {
            (p.x - x0)
                .abs()
                .partial_cmp(&(q.x - x0).abs())
                .expect("finite equilibria")
        })
        .ok_or_else(|| Error::invalid("a", "no nonzero center equilibrium to expand about"))?
        .x;
    let e2 = eta * eta;
    let w2 = -a + n(3.0) * b * e2 + n(5.0) * c * e2 * e2;
    if !(w2 > T::zero()) {
        return Err(Error::invalid("a", format!("linearised frequency squared {w2} is not positive")));
    }
    Ok(KbmCoefficients {
        omega0: w2.sqrt(),
        b2: n(3.0) * b * eta + n(10.0) * c * e2 * eta,
        c3: b + n(10.0) * c * e2,
        d4: n(5.0) * c * eta,
        e5: c,
        eta,
        ..forcing
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AmplitudePhase<T: Real> {
    pub amp: T,
    pub psi: T,
}

/// `(da/dt, dpsi/dt)` at time `t`.
pub fn amplitude_phase_odes<T: Real>(k: &KbmCoefficients<T>, t: T, s: AmplitudePhase<T>, order: Order) -> (T, T) {
    let n = |v: f64| T::lit(v);
    let (w, eps) = (k.omega0, k.epsilon_eff);
    let a = s.amp;
    let a2 = a * a;
    let a4 = a2 * a2;
    let mut da = -a * eps / n(2.0);
    let mut dpsi = w + (n(5.0) * a4 * k.e5 + n(6.0) * a2 * k.c3) / (n(16.0) * w);
    if order == Order::Second {
        da = da + (n(5.0) * a4 * a * k.e5 * eps + n(3.0) * a2 * a * k.c3 * eps) / (n(16.0) * w * w);
        let phi = k.phi(t);
        let (b, c, d, e) = (k.b2, k.c3, k.d4, k.e5);
        let a6 = a4 * a2;
        let num = -n(275.0) * a6 * a2 * e * e - n(1200.0) * a6 * c * e - n(6048.0) * a6 * d * d
            - n(13440.0) * a4 * b * d
            - n(900.0) * a4 * c * c
            - n(6400.0) * a2 * b * b
            + n(23040.0) * a2 * d * phi
            + n(15360.0) * b * phi
            - n(1920.0) * w * w * eps * eps;
        dpsi = dpsi + num / (n(15360.0) * w * w * w);
    }
    (da, dpsi)
}

/// Displacement `x = eta + u` from the general (shifted) expansion.
pub fn assemble_general<T: Real>(k: &KbmCoefficients<T>, amp: T, psi: T, t: T, order: Order) -> T {
    let n = |v: f64| T::lit(v);
    let (w, eps) = (k.omega0, k.epsilon_eff);
    let (b, c, d, e) = (k.b2, k.c3, k.d4, k.e5);
    let phi = k.phi(t);
    let a = amp;
    let a2 = a * a;
    let a3 = a2 * a;
    let a4 = a2 * a2;
    let a5 = a4 * a;
    let cs = |m: f64| (n(m) * psi).cos();
    let sn = |m: f64| (n(m) * psi).sin();
    let w2 = w * w;

    let u1 = (n(5.0) * a5 * e * (n(15.0) * cs(3.0) + cs(5.0))
        + n(16.0) * a4 * d * (n(20.0) * cs(2.0) + cs(4.0) - n(45.0))
        + n(60.0) * a3 * c * cs(3.0)
        + n(320.0) * a2 * b * (cs(2.0) - n(3.0))
        + n(1920.0) * phi)
        / (n(1920.0) * w2);
    let mut u = a * psi.cos() + u1;
    if order == Order::Second {
        let we = w * eps;
        let big = n(175.0) * a5 * a2 * e * e * (-n(5280.0) * cs(3.0) + n(160.0) * cs(5.0) + n(95.0) * cs(7.0) + n(3.0) * cs(9.0))
            + n(640.0) * a4 * a2 * d * e
                * (-n(24710.0) * cs(2.0) - n(168.0) * cs(4.0) + n(198.0) * cs(6.0) + n(5.0) * cs(8.0) + n(38115.0))
            - n(280.0) * a5
                * (n(36.0) * cs(3.0) * (n(205.0) * c * e + n(72.0) * d * d)
                    - n(4.0) * cs(5.0) * (n(45.0) * c * e + n(184.0) * d * d)
                    - cs(7.0) * (n(45.0) * c * e + n(16.0) * d * d))
            + n(1792.0) * a4
                * (-n(5.0) * cs(2.0) * (n(2425.0) * b * e + n(1458.0) * c * d)
                    + n(6.0) * cs(4.0) * (n(27.0) * c * d - n(20.0) * b * e)
                    + n(9.0) * cs(6.0) * (n(5.0) * b * e + n(2.0) * c * d)
                    + n(150.0) * (n(140.0) * b * e + n(81.0) * c * d))
            + n(1120.0) * a3
                * (-n(27.0) * cs(3.0) * (n(16.0) * b * d + n(35.0) * c * c)
                    + cs(5.0) * (n(176.0) * b * d + n(45.0) * c * c)
                    + n(100.0) * e * we * (n(27.0) * sn(3.0) + sn(5.0)))
            + n(21504.0) * a2
                * (-n(775.0) * b * c * cs(2.0) + n(25.0) * b * c * cs(4.0) + n(1500.0) * b * c
                    + n(800.0) * d * we * sn(2.0)
                    + n(16.0) * d * we * sn(4.0)
                    + n(100.0) * e * phi * (n(20.0) * cs(2.0) + cs(4.0) - n(45.0)))
            + n(134400.0) * a * (n(8.0) * b * b * cs(3.0) + n(9.0) * c * we * sn(3.0) + n(48.0) * d * phi * cs(3.0))
            + n(2867200.0) * (n(2.0) * b * we * sn(2.0) + n(9.0) * c * phi * (cs(2.0) - n(3.0)));
        u = u + a2 * big / (n(51609600.0) * w2 * w2);
    }
    k.eta + u
}

/// Displacement from the expansion about the origin (`B = D = 0`,
/// `eta = 0`), written in its own reduced form.
pub fn assemble_centered<T: Real>(k: &KbmCoefficients<T>, amp: T, psi: T, t: T, order: Order) -> T {
    let n = |v: f64| T::lit(v);
    let (w, eps) = (k.omega0, k.epsilon_eff);
    let (b, c) = (k.c3, k.e5);
    let phi = k.phi(t);
    let a = amp;
    let a2 = a * a;
    let a3 = a2 * a;
    let a5 = a3 * a2;
    let cs = |m: f64| (n(m) * psi).cos();
    let sn = |m: f64| (n(m) * psi).sin();
    let w2 = w * w;
    let u1 = (a5 * c * (n(15.0) * cs(3.0) + cs(5.0)) + n(12.0) * a3 * b * cs(3.0) + n(384.0) * phi) / (n(384.0) * w2);
    let mut x = a * psi.cos() + u1;
    if order == Order::Second {
        let big = a5 * a2 * c * c * (-n(5280.0) * cs(3.0) + n(160.0) * cs(5.0) + n(95.0) * cs(7.0) + n(3.0) * cs(9.0))
            + n(72.0) * a5 * b * c * (-n(164.0) * cs(3.0) + n(4.0) * cs(5.0) + cs(7.0))
            + n(32.0) * a3
                * (-n(189.0) * b * b * cs(3.0) + n(9.0) * b * b * cs(5.0) + n(20.0) * c * w * eps * (n(27.0) * sn(3.0) + sn(5.0)))
            + n(12288.0) * a2 * c * phi * (n(20.0) * cs(2.0) + cs(4.0) - n(45.0))
            + n(6912.0) * a * b * w * eps * sn(3.0)
            + n(147456.0) * b * phi * (cs(2.0) - n(3.0));
        x = x + a2 * big / (n(294912.0) * w2 * w2);
    }
    x
}

/// Displacement, using the reduced form when it applies.
pub fn assemble_solution<T: Real>(k: &KbmCoefficients<T>, amp: T, psi: T, t: T, order: Order) -> T {
    if k.is_centered() {
        assemble_centered(k, amp, psi, t, order)
    } else {
        assemble_general(k, amp, psi, t, order)
    }
}

/// Time derivative of the assembled displacement along the slow flow.
fn assembled_velocity<T: Real>(k: &KbmCoefficients<T>, s: AmplitudePhase<T>, t: T, order: Order) -> T {
    let (da, dpsi) = amplitude_phase_odes(k, t, s, order);
    let h = T::epsilon().cbrt() * (T::one() + s.amp.abs());
    let ht = T::epsilon().cbrt() * (T::one() + t.abs());
    let f = |a: T, p: T, tt: T| assemble_solution(k, a, p, tt, order);
    let two = T::lit(2.0);
    let dx_da = (f(s.amp + h, s.psi, t) - f(s.amp - h, s.psi, t)) / (two * h);
    let dx_dpsi = (f(s.amp, s.psi + h, t) - f(s.amp, s.psi - h, t)) / (two * h);
    let dx_dt = (f(s.amp, s.psi, t + ht) - f(s.amp, s.psi, t - ht)) / (two * ht);
    dx_da * da + dx_dpsi * dpsi + dx_dt
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct InitialFit<T: Real> {
    pub state: AmplitudePhase<T>,
    /// False when Newton failed and the seed was returned instead.
    pub converged: bool,
    pub iterations: usize,
}

/// `(a(0), psi(0))` such that the assembled solution starts at `(x0, v0)`.
pub fn initial_conditions_map<T: Real>(k: &KbmCoefficients<T>, x0: T, v0: T, order: Order) -> InitialFit<T> {
    let u0 = x0 - k.eta;
    let seed = AmplitudePhase {
        amp: (u0 * u0 + (v0 / k.omega0).powi(2)).sqrt(),
        psi: (-v0 / k.omega0).atan2(u0),
    };
    let scale = T::one().max(x0.abs()).max(v0.abs());
    // The finite-difference velocity is good to about 1e-12.
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0)) * scale;
    let resid = |s: AmplitudePhase<T>| {
        (
            assemble_solution(k, s.amp, s.psi, T::zero(), order) - x0,
            assembled_velocity(k, s, T::zero(), order) - v0,
        )
    };
    let mut s = seed;
    for it in 0..60 {
        let (f1, f2) = resid(s);
        if !(f1.is_finite() && f2.is_finite()) {
            break;
        }
        if f1.abs().max(f2.abs()) <= tol {
            return InitialFit {
                state: normalise(s),
                converged: true,
                iterations: it,
            };
        }
        let h = T::epsilon().sqrt().max(T::lit(1e-7)) * (T::one() + s.amp.abs());
        let (ga1, ga2) = resid(AmplitudePhase { amp: s.amp + h, ..s });
        let (gp1, gp2) = resid(AmplitudePhase { psi: s.psi + h, ..s });
        let (j11, j21) = ((ga1 - f1) / h, (ga2 - f2) / h);
        let (j12, j22) = ((gp1 - f1) / h, (gp2 - f2) / h);
        let det = j11 * j22 - j12 * j21;
        if det == T::zero() || !det.is_finite() {
            break;
        }
        s = AmplitudePhase {
            amp: s.amp - (j22 * f1 - j12 * f2) / det,
            psi: s.psi - (-j21 * f1 + j11 * f2) / det,
        };
    }
    InitialFit {
        state: normalise(seed),
        converged: false,
        iterations: 60,
    }
}

/// `(a, psi)` and `(-a, psi + pi)` give the same displacement; keep `a >= 0`.
fn normalise<T: Real>(s: AmplitudePhase<T>) -> AmplitudePhase<T> {
    if s.amp < T::zero() {
        AmplitudePhase {
            amp: -s.amp,
            psi: s.psi + T::PI(),
        }
    } else {
        s
    }
}

/// Amplitude/phase history on a uniform grid, integrated by RK4 with
/// 200 steps per base period.
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "")]
pub struct KbmSolution<T: Real> {
    pub coeffs: KbmCoefficients<T>,
    pub order: Order,
    pub initial: InitialFit<T>,
    pub dt: T,
    pub states: Vec<AmplitudePhase<T>>,
}

fn rk4_slow<T: Real>(k: &KbmCoefficients<T>, t: T, s: AmplitudePhase<T>, h: T, order: Order) -> AmplitudePhase<T> {
    let f = |tt: T, st: AmplitudePhase<T>| amplitude_phase_odes(k, tt, st, order);
    let half = h / T::lit(2.0);
    let add = |st: AmplitudePhase<T>, d: (T, T), w: T| AmplitudePhase {
        amp: st.amp + w * d.0,
        psi: st.psi + w * d.1,
    };
    let k1 = f(t, s);
    let k2 = f(t + half, add(s, k1, half));
    let k3 = f(t + half, add(s, k2, half));
    let k4 = f(t + h, add(s, k3, h));
    let two = T::lit(2.0);
    let sixth = h / T::lit(6.0);
    AmplitudePhase {
        amp: s.amp + sixth * (k1.0 + two * k2.0 + two * k3.0 + k4.0),
        psi: s.psi + sixth * (k1.1 + two * k2.1 + two * k3.1 + k4.1),
    }
}

impl<T: Real> KbmSolution<T> {
    pub fn time(&self, i: usize) -> T {
        self.dt * T::from_count(i)
    }

    pub fn t_end(&self) -> T {
        self.time(self.states.len() - 1)
    }

    /// Amplitude and phase at any `t` in `[0, t_end]`.
    pub fn slow_state(&self, t: T) -> Result<AmplitudePhase<T>> {
        if !(t >= T::zero() && t <= self.t_end()) {
            return Err(Error::OutOfSpan {
                t: t.as_f64(),
                start: 0.0,
                end: self.t_end().as_f64(),
            });
        }
        let i = (t / self.dt).floor().to_usize().unwrap_or(0).min(self.states.len() - 1);
        let ti = self.time(i);
        let s = self.states[i];
        if t == ti {
            return Ok(s);
        }
        Ok(rk4_slow(&self.coeffs, ti, s, t - ti, self.order))
    }

    pub fn displacement(&self, t: T) -> Result<T> {
        let s = self.slow_state(t)?;
        Ok(assemble_solution(&self.coeffs, s.amp, s.psi, t, self.order))
    }
}

/// Builds the coefficients, fits the initial amplitude/phase and
/// integrates the slow flow over `[0, t_end]`.
pub fn solve<T: Real>(params: &OscillatorParams<T>, x0: T, v0: T, t_end: T, order: Order) -> Result<KbmSolution<T>> {
    if !(t_end >= T::zero() && t_end.is_finite()) {
        return Err(Error::invalid("t_end", "must be finite and non-negative"));
    }
    let coeffs = build_coefficients(params, x0)?;
    let initial = initial_conditions_map(&coeffs, x0, v0, order);
    let dt = coeffs.base_period() / T::lit(200.0);
    let n = (t_end / dt).ceil().to_usize().unwrap_or(0);
    let mut states = Vec::with_capacity(n + 1);
    let mut s = initial.state;
    states.push(s);
    for i in 0..n {
        s = rk4_slow(&coeffs, dt * T::from_count(i), s, dt, order);
        if !(s.amp.is_finite() && s.psi.is_finite()) {
            return Err(Error::NonFinite {
                what: "amplitude/phase",
                t: (dt * T::from_count(i + 1)).as_f64(),
            });
        }
        states.push(s);
    }
    Ok(KbmSolution {
        coeffs,
        order,
        initial,
        dt,
        states,
    })
}
