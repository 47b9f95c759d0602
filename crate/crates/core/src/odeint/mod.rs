//! Integrators for `x'' = f(t, x, x')`, with and without a delayed velocity.
//!
//! Fixed-step classical RK4 and adaptive Dormand–Prince 5(4) share one
//! stepping driver, so a delayed run whose feedback vanishes reproduces the
//! plain run bit for bit.

mod history;

pub use history::{HistoryBuffer, HistoryPolicy};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscillator::State;
use crate::scalar::Real;
use crate::trajectory::{DenseSegment, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Dopri5,
}

/// Step policy. `dt` is the fixed step for RK4 and the initial step for
/// Dormand–Prince.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StepControl<T: Real> {
    pub method: Method,
    pub dt: T,
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_steps: usize,
}

impl<T: Real> StepControl<T> {
    pub fn fixed(dt: T) -> Self {
        Self {
            method: Method::Rk4,
            dt,
            abs_tol: T::zero(),
            rel_tol: T::zero(),
            max_steps: usize::MAX,
        }
    }

    pub fn adaptive(abs_tol: T, rel_tol: T) -> Self {
        Self {
            method: Method::Dopri5,
            dt: T::lit(1e-3),
            abs_tol,
            rel_tol,
            max_steps: 10_000_000,
        }
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "step must be positive and finite"));
        }
        if self.method == Method::Dopri5
            && !(self.abs_tol > T::zero() || self.rel_tol > T::zero())
        {
            return Err(Error::invalid("abs_tol", "adaptive stepping needs a positive tolerance"));
        }
        if self.abs_tol < T::zero() || self.rel_tol < T::zero() {
            return Err(Error::invalid("abs_tol", "tolerances must be non-negative"));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps", "must be positive"));
        }
        Ok(())
    }

    fn policy_label(&self) -> String {
        match self.method {
            Method::Rk4 => format!("fixed dt={:e}", self.dt),
            Method::Dopri5 => format!("adaptive atol={:e} rtol={:e}", self.abs_tol, self.rel_tol),
        }
    }
}

/// Right-hand side as seen by the stepping driver.
pub(crate) trait Field<T: Real> {
    fn eval(&mut self, t: T, x: T, v: T) -> Result<T>;
    fn accept(&mut self, _t: T, _x: T, _v: T, _a: T) {}
}

struct Plain<F>(F);

impl<T: Real, F: Fn(T, T, T) -> T> Field<T> for Plain<F> {
    #[inline]
    fn eval(&mut self, t: T, x: T, v: T) -> Result<T> {
        Ok((self.0)(t, x, v))
    }
}

struct Delayed<T: Real, F> {
    f: F,
    tau: T,
    history: HistoryBuffer<T>,
}

impl<T: Real, F: Fn(T, T, T, T) -> T> Field<T> for Delayed<T, F> {
    #[inline]
    fn eval(&mut self, t: T, x: T, v: T) -> Result<T> {
        let vd = self.history.velocity_at(t - self.tau)?;
        Ok((self.f)(t, x, v, vd))
    }

    fn accept(&mut self, t: T, _x: T, v: T, a: T) {
        self.history.push(t, v, a);
        self.history.prune(t - self.tau);
    }
}

/// Number of fixed steps covering `span`, absorbing rounding in `span / dt`.
fn fixed_step_count<T: Real>(span: T, dt: T) -> usize {
    let ratio = span / dt;
    let r = ratio.round();
    let n = if (ratio - r).abs() <= T::lit(1e-9) * r.max(T::one()) {
        r
    } else {
        ratio.ceil()
    };
    n.to_usize().unwrap_or(usize::MAX).max(1)
}

fn check_finite<T: Real>(x: T, v: T, t: T) -> Result<()> {
    if x.is_finite() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what: "state",
            t: t.as_f64(),
        })
    }
}

#[inline]
fn rk4_step<T: Real, F: Field<T>>(f: &mut F, t: T, x: T, v: T, a0: T, h: T) -> Result<(T, T)> {
    let half = h / T::lit(2.0);
    let two = T::lit(2.0);
    let (x2, v2) = (x + half * v, v + half * a0);
    let a2 = f.eval(t + half, x2, v2)?;
    let (x3, v3) = (x + half * v2, v + half * a2);
    let a3 = f.eval(t + half, x3, v3)?;
    let (x4, v4) = (x + h * v3, v + h * a3);
    let a4 = f.eval(t + h, x4, v4)?;
    let sixth = h / T::lit(6.0);
    Ok((
        x + sixth * (v + two * v2 + two * v3 + v4),
        v + sixth * (a0 + two * a2 + two * a3 + a4),
    ))
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

struct DopriOut<T: Real> {
    x: T,
    v: T,
    a: T,
    err: T,
    seg: DenseSegment<T>,
}

fn dopri_step<T: Real, F: Field<T>>(
    f: &mut F,
    t: T,
    x: T,
    v: T,
    a0: T,
    h: T,
    ctrl: &StepControl<T>,
) -> Result<DopriOut<T>> {
    // k[i] = (x', v') at stage i.
    let mut kx = [T::zero(); 7];
    let mut kv = [T::zero(); 7];
    kx[0] = v;
    kv[0] = a0;
    for s in 1..7 {
        let mut dx = T::zero();
        let mut dv = T::zero();
        for j in 0..s {
            let aij = T::lit(A[s][j]);
            dx = dx + aij * kx[j];
            dv = dv + aij * kv[j];
        }
        let (xs, vs) = (x + h * dx, v + h * dv);
        kx[s] = vs;
        kv[s] = f.eval(t + T::lit(C[s]) * h, xs, vs)?;
        if s == 6 {
            // Stage 7 is evaluated at the 5th-order solution (FSAL).
            let mut ex = T::zero();
            let mut ev = T::zero();
            let mut rx = T::zero();
            let mut rv = T::zero();
            for j in 0..7 {
                ex = ex + T::lit(E[j]) * kx[j];
                ev = ev + T::lit(E[j]) * kv[j];
                rx = rx + T::lit(D[j]) * kx[j];
                rv = rv + T::lit(D[j]) * kv[j];
            }
            let sx = ctrl.abs_tol + ctrl.rel_tol * x.abs().max(xs.abs());
            let sv = ctrl.abs_tol + ctrl.rel_tol * v.abs().max(vs.abs());
            let e1 = h * ex / sx;
            let e2 = h * ev / sv;
            let err = ((e1 * e1 + e2 * e2) / T::lit(2.0)).sqrt();
            let dense = |y0: T, y1: T, k0: T, k6: T, r: T| {
                let r2 = y1 - y0;
                let r3 = h * k0 - r2;
                let r4 = r2 - h * k6 - r3;
                [y0, r2, r3, r4, h * r]
            };
            let seg = [
                dense(x, xs, kx[0], kx[6], rx),
                dense(v, vs, kv[0], kv[6], rv),
            ];
            return Ok(DopriOut {
                x: xs,
                v: vs,
                a: kv[6],
                err,
                seg,
            });
        }
    }
    unreachable!("stage loop returns at the seventh stage")
}

/// Runs `field` from `s0` to `t_end`, reporting every accepted knot.
pub(crate) fn drive<T: Real, F: Field<T>>(
    field: &mut F,
    s0: State<T>,
    t_end: T,
    ctrl: &StepControl<T>,
    h_max: Option<T>,
    mut sink: impl FnMut(State<T>, T, Option<DenseSegment<T>>),
) -> Result<State<T>> {
    ctrl.validate()?;
    if !s0.is_finite() {
        return Err(Error::NonFinite {
            what: "initial state",
            t: s0.t.as_f64(),
        });
    }
    if !(t_end >= s0.t) || !t_end.is_finite() {
        return Err(Error::invalid("t_end", format!("must be finite and >= t0 = {}", s0.t)));
    }
    let (t0, mut x, mut v) = (s0.t, s0.x, s0.v);
    let mut a = field.eval(t0, x, v)?;
    field.accept(t0, x, v, a);
    sink(s0, a, None);
    if t_end == t0 {
        return Ok(s0);
    }

    match ctrl.method {
        Method::Rk4 => {
            let n = fixed_step_count(t_end - t0, ctrl.dt);
            if n > ctrl.max_steps {
                return Err(Error::MaxSteps {
                    max_steps: ctrl.max_steps,
                    t: t0.as_f64(),
                });
            }
            let mut t = t0;
            for i in 1..=n {
                let t_next = if i == n {
                    t_end
                } else {
                    t0 + ctrl.dt * T::from_count(i)
                };
                let (xn, vn) = rk4_step(field, t, x, v, a, t_next - t)?;
                check_finite(xn, vn, t_next)?;
                x = xn;
                v = vn;
                t = t_next;
                a = field.eval(t, x, v)?;
                field.accept(t, x, v, a);
                sink(State::new(t, x, v), a, None);
            }
            Ok(State::new(t, x, v))
        }
        Method::Dopri5 => {
            let span = t_end - t0;
            let cap = h_max.unwrap_or(span).min(span);
            let mut h = ctrl.dt.min(cap);
            let mut t = t0;
            let mut err_old = T::lit(1e-4);
            let mut rejected = false;
            let mut steps = 0usize;
            let min_h = T::epsilon() * T::lit(16.0);
            while t < t_end {
                if steps >= ctrl.max_steps {
                    return Err(Error::MaxSteps {
                        max_steps: ctrl.max_steps,
                        t: t.as_f64(),
                    });
                }
                steps += 1;
                let remaining = t_end - t;
                let last = h >= remaining * (T::one() - T::lit(1e-12));
                let h_try = if last { remaining } else { h };
                if h_try <= min_h * t.abs().max(T::one()) {
                    return Err(Error::StepUnderflow { t: t.as_f64() });
                }
                let out = dopri_step(field, t, x, v, a, h_try, ctrl)?;
                let err = if out.err.is_finite() { out.err } else { T::infinity() };
                if err <= T::one() {
                    let fac = if err == T::zero() {
                        T::lit(5.0)
                    } else {
                        T::lit(0.9) * err.powf(T::lit(-0.17)) * err_old.powf(T::lit(0.04))
                    };
                    let mut fac = fac.max(T::lit(0.2)).min(T::lit(5.0));
                    if rejected {
                        fac = fac.min(T::one());
                    }
                    check_finite(out.x, out.v, t + h_try)?;
                    t = if last { t_end } else { t + h_try };
                    x = out.x;
                    v = out.v;
                    a = out.a;
                    field.accept(t, x, v, a);
                    sink(State::new(t, x, v), a, Some(out.seg));
                    err_old = err.max(T::lit(1e-4));
                    rejected = false;
                    h = (h_try * fac).min(cap);
                } else {
                    let fac = if err.is_finite() {
                        (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2))
                    } else {
                        T::lit(0.2)
                    };
                    h = h_try * fac;
                    rejected = true;
                }
            }
            Ok(State::new(t, x, v))
        }
    }
}

/// Integrates `x'' = f(t, x, v)` from `s0` to `t_end`, keeping every
/// accepted step.
pub fn integrate<T: Real, F>(f: F, s0: State<T>, t_end: T, ctrl: &StepControl<T>) -> Result<Trajectory<T>>
where
    F: Fn(T, T, T) -> T,
{
    let mut traj = new_trajectory(ctrl, "");
    let mut field = Plain(f);
    drive(&mut field, s0, t_end, ctrl, None, |s, a, seg| record(&mut traj, s, a, seg))?;
    Ok(traj)
}

/// Integrates to `t_end` and returns only the final state.
pub fn advance<T: Real, F>(f: F, s0: State<T>, t_end: T, ctrl: &StepControl<T>) -> Result<State<T>>
where
    F: Fn(T, T, T) -> T,
{
    let mut field = Plain(f);
    drive(&mut field, s0, t_end, ctrl, None, |_, _, _| {})
}

/// Integrates `x'' = f(t, x, v, v(t - tau))` by the method of steps.
///
/// Steps never exceed `tau`, so every delayed read falls on already
/// accepted history.
pub fn integrate_delayed<T: Real, F>(
    f: F,
    s0: State<T>,
    tau: T,
    policy: HistoryPolicy,
    t_end: T,
    ctrl: &StepControl<T>,
) -> Result<Trajectory<T>>
where
    F: Fn(T, T, T, T) -> T,
{
    if !(tau > T::zero() && tau.is_finite()) {
        return Err(Error::invalid("tau", "delay must be positive and finite"));
    }
    if ctrl.method == Method::Rk4 && ctrl.dt > tau {
        return Err(Error::invalid("dt", format!("fixed step {} exceeds delay {}", ctrl.dt, tau)));
    }
    let mut traj = new_trajectory(ctrl, " delayed");
    let mut field = Delayed {
        f,
        tau,
        history: HistoryBuffer::new(s0.t, s0.v, policy),
    };
    drive(&mut field, s0, t_end, ctrl, Some(tau), |s, a, seg| {
        record(&mut traj, s, a, seg)
    })?;
    Ok(traj)
}

/// Explicit Euler for `x'' = f(t, x, v)` with `n_steps` steps of `dt`.
pub fn euler<T: Real, F>(f: F, s0: State<T>, dt: T, n_steps: usize) -> Result<Trajectory<T>>
where
    F: Fn(T, T, T) -> T,
{
    let mut traj = Trajectory::new("euler", &format!("fixed dt={dt:e}"));
    let (mut x, mut v) = (s0.x, s0.v);
    let mut a = f(s0.t, x, v);
    traj.push(s0, a);
    for i in 1..=n_steps {
        let xn = x + v * dt;
        let vn = v + a * dt;
        let t = s0.t + dt * T::from_count(i);
        check_finite(xn, vn, t)?;
        x = xn;
        v = vn;
        a = f(t, x, v);
        traj.push(State::new(t, x, v), a);
    }
    Ok(traj)
}

fn new_trajectory<T: Real>(ctrl: &StepControl<T>, suffix: &str) -> Trajectory<T> {
    match ctrl.method {
        Method::Rk4 => Trajectory::new(&format!("rk4{suffix}"), &ctrl.policy_label()),
        Method::Dopri5 => Trajectory::new(&format!("dopri5{suffix}"), &ctrl.policy_label()).with_dense(),
    }
}

fn record<T: Real>(traj: &mut Trajectory<T>, s: State<T>, a: T, seg: Option<DenseSegment<T>>) {
    match seg {
        Some(seg) => traj.push_dense(s, a, seg),
        None => traj.push(s, a),
    }
}
