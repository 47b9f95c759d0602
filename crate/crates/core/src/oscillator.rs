//! The forced, damped cubic–quintic Duffing oscillator
//!
//! ```text
//! x'' - a x + b x^3 + c x^5 = eps (gamma cos(omega t) - delta x')
//! ```
//!
//! together with its conservative limit (`eps = 0`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::Trajectory;

/// Coefficients of the oscillator. All fields are plain data; call
/// [`OscillatorParams::validate`] before long runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct OscillatorParams<T: Real> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub delta: T,
    pub gamma: T,
    pub omega: T,
    pub epsilon: T,
}

impl<T: Real> OscillatorParams<T> {
    pub fn new(a: T, b: T, c: T, delta: T, gamma: T, omega: T, epsilon: T) -> Self {
        Self {
            a,
            b,
            c,
            delta,
            gamma,
            omega,
            epsilon,
        }
    }

    /// Conservative system: no damping, no forcing.
    pub fn unforced(a: T, b: T, c: T) -> Self {
        Self::new(a, b, c, T::zero(), T::zero(), T::one(), T::zero())
    }

    /// Damped, forced system with `eps = 1`.
    pub fn driven(a: T, b: T, c: T, delta: T, gamma: T, omega: T) -> Self {
        Self::new(a, b, c, delta, gamma, omega, T::one())
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_omega(mut self, omega: T) -> Self {
        self.omega = omega;
        self
    }

    /// Same coefficients with the perturbation switched off.
    pub fn conservative(&self) -> Self {
        Self {
            epsilon: T::zero(),
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("omega", self.omega),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.gamma != T::zero() && self.omega <= T::zero() {
            return Err(Error::invalid("omega", "forcing frequency must be positive"));
        }
        Ok(())
    }

    /// Forcing period `2 pi / omega`.
    pub fn forcing_period(&self) -> T {
        T::TAU() / self.omega
    }

    /// Conservative force `a x - b x^3 - c x^5`.
    #[inline]
    pub fn force(&self, x: T) -> T {
        let x2 = x * x;
        x * (self.a - x2 * (self.b + self.c * x2))
    }

    /// Derivative of [`force`](Self::force): `a - 3 b x^2 - 5 c x^4`.
    #[inline]
    pub fn stiffness(&self, x: T) -> T {
        let x2 = x * x;
        self.a - x2 * (T::lit(3.0) * self.b + T::lit(5.0) * self.c * x2)
    }

    /// Potential `-a x^2/2 + b x^4/4 + c x^6/6`.
    #[inline]
    pub fn potential(&self, x: T) -> T {
        let x2 = x * x;
        x2 * (-self.a / T::lit(2.0) + x2 * (self.b / T::lit(4.0) + self.c * x2 / T::lit(6.0)))
    }

    /// Acceleration at `(t, x, v)` without finiteness checks.
    #[inline]
    pub fn accel(&self, t: T, x: T, v: T) -> T {
        self.force(x) + self.epsilon * (self.gamma * (self.omega * t).cos() - self.delta * v)
    }
}

/// Phase-space point at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct State<T: Real> {
    pub t: T,
    pub x: T,
    pub v: T,
}

impl<T: Real> State<T> {
    pub fn new(t: T, x: T, v: T) -> Self {
        Self { t, x, v }
    }

    pub fn at_rest(x: T) -> Self {
        Self::new(T::zero(), x, T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.v.is_finite()
    }
}

/// Acceleration `x''` of the full system at `s`.
pub fn rhs<T: Real>(params: &OscillatorParams<T>, s: &State<T>) -> Result<T> {
    if !s.is_finite() {
        return Err(Error::NonFinite {
            what: "state",
            t: s.t.as_f64(),
        });
    }
    let acc = params.accel(s.t, s.x, s.v);
    if !acc.is_finite() {
        return Err(Error::NonFinite {
            what: "acceleration",
            t: s.t.as_f64(),
        });
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    Center,
    Saddle,
    Degenerate,
}

/// Rest point of the conservative system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Equilibrium<T: Real> {
    pub x: T,
    pub kind: EquilibriumKind,
    /// Linearisation `f'(x)`; the eigenvalues are `+-sqrt(f'(x))`.
    pub stiffness: T,
}

/// Real rest points of `x'' = a x - b x^3 - c x^5`, sorted ascending.
///
/// With `a = b = c = 0` every point is at rest; only the origin is reported,
/// marked degenerate.
pub fn equilibria<T: Real>(params: &OscillatorParams<T>) -> Vec<Equilibrium<T>> {
    let (a, b, c) = (params.a, params.b, params.c);
    let zero = T::zero();
    let mut squares: Vec<T> = Vec::new();
    if c == zero {
        if b != zero {
            squares.push(a / b);
        }
    } else {
        // c y^2 + b y - a = 0 with y = x^2, solved without cancellation.
        let disc = b * b + T::lit(4.0) * a * c;
        if disc >= zero {
            let sq = disc.sqrt();
            let q = -(b + if b >= zero { sq } else { -sq }) / T::lit(2.0);
            if q != zero {
                squares.push(q / c);
                squares.push(-a / q);
            } else {
                squares.push(zero);
            }
        }
    }

    let mut xs = vec![zero];
    for y in squares {
        if y > zero && y.is_finite() {
            let r = polish_root(params, y.sqrt());
            xs.push(r);
            xs.push(-r);
        }
    }
    xs.sort_by(|p, q| p.partial_cmp(q).expect("finite roots"));
    xs.dedup_by(|p, q| (*p - *q).abs() <= T::epsilon() * T::lit(16.0) * (T::one() + q.abs()));

    xs.into_iter()
        .map(|x| {
            let k = params.stiffness(x);
            let kind = if k < zero {
                EquilibriumKind::Center
            } else if k > zero {
                EquilibriumKind::Saddle
            } else {
                EquilibriumKind::Degenerate
            };
            Equilibrium {
                x,
                kind,
                stiffness: k,
            }
        })
        .collect()
}

fn polish_root<T: Real>(params: &OscillatorParams<T>, mut x: T) -> T {
    for _ in 0..3 {
        let d = params.stiffness(x);
        if d == T::zero() {
            break;
        }
        let step = params.force(x) / d;
        if !step.is_finite() {
            break;
        }
        x = x - step;
    }
    x
}

/// Hamiltonian `v^2/2 - a x^2/2 + b x^4/4 + c x^6/6`.
pub fn energy<T: Real>(params: &OscillatorParams<T>, s: &State<T>) -> T {
    s.v * s.v / T::lit(2.0) + params.potential(s.x)
}

/// Positive velocity on the zero-energy level through `x0`.
pub fn separatrix_velocity<T: Real>(params: &OscillatorParams<T>, x0: T) -> Result<T> {
    let x2 = x0 * x0;
    let inner = (T::lit(6.0) * params.a - x2 * (T::lit(3.0) * params.b + T::lit(2.0) * params.c * x2))
        / T::lit(6.0);
    if inner < T::zero() {
        return Err(Error::Guard(format!(
            "zero-energy level does not reach x0 = {x0}: 6a - 3b x0^2 - 2c x0^4 < 0"
        )));
    }
    Ok(x0.abs() * inner.sqrt())
}

/// Hamiltonian vector field `(dq/dt, dp/dt)` of the conservative system.
pub fn hamiltonian_fields<T: Real>(params: &OscillatorParams<T>, q: T, p: T) -> (T, T) {
    (p, params.force(q))
}

/// Energy drift along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct EnergyReport<T: Real> {
    /// Energy of the first sample.
    pub initial: T,
    /// `(t, E(t))` per sample.
    pub series: Vec<(T, T)>,
    /// `max |E(t) - E(0)|`.
    pub max_deviation: T,
}

pub fn energy_report<T: Real>(params: &OscillatorParams<T>, traj: &Trajectory<T>) -> EnergyReport<T> {
    let series: Vec<(T, T)> = traj
        .samples()
        .iter()
        .map(|s| (s.t, energy(params, s)))
        .collect();
    let initial = series.first().map(|p| p.1).unwrap_or_else(T::zero);
    let max_deviation = series
        .iter()
        .map(|p| (p.1 - initial).abs())
        .fold(T::zero(), T::max);
    EnergyReport {
        initial,
        series,
        max_deviation,
    }
}
