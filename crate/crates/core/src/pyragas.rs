//! Delayed-feedback (Pyragas) control `mu [x'(t - tau) - x'(t)]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chebyshev::ChebyshevSeries;
use crate::error::{Error, Result};
use crate::odeint::{integrate_delayed, HistoryPolicy, StepControl};
use crate::oscillator::{OscillatorParams, State};
use crate::scalar::Real;
use crate::trajectory::Trajectory;

/// Stabilised-orbit polynomial on `[0, 3.73093]` reported for
/// `a = b = 1, c = 0.2, delta = 0.1, gamma = 0.35, omega = 1.4`,
/// lowest order first.
pub const REFERENCE_ORBIT_POLY: [f64; 6] = [
    0.0,
    -14.0 / 4985.0,
    514.0 / 2927.0,
    -517.0 / 4498.0,
    8.0 / 337.0,
    -3.0 / 2038.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ControllerConfig<T: Real> {
    pub mu: T,
    pub tau: T,
    pub history: HistoryPolicy,
}

impl<T: Real> ControllerConfig<T> {
    /// Zero-velocity history.
    pub fn new(mu: T, tau: T) -> Self {
        Self {
            mu,
            tau,
            history: HistoryPolicy::Zero,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > T::zero() && self.tau.is_finite()) {
            return Err(Error::invalid("tau", "delay must be positive and finite"));
        }
        if !self.mu.is_finite() {
            return Err(Error::invalid("mu", "gain must be finite"));
        }
        Ok(())
    }
}

pub fn controlled_rhs<T: Real>(params: &OscillatorParams<T>, cfg: &ControllerConfig<T>, s: &State<T>, delayed_velocity: T) -> T {
    params.accel(s.t, s.x, s.v) + cfg.mu * (delayed_velocity - s.v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RunOptions<T: Real> {
    pub steps_per_tau: usize,
    /// Length of the measurement window in delays.
    pub window_taus: usize,
    pub tolerance: T,
}

impl<T: Real> Default for RunOptions<T> {
    fn default() -> Self {
        Self {
            steps_per_tau: 100,
            window_taus: 5,
            tolerance: T::lit(1e-2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PeriodicityReport<T: Real> {
    pub is_periodic: bool,
    pub period: T,
    /// `sup |x(t + tau) - x(t)|` over the final window.
    pub residual: T,
    /// `sup |x'(t - tau) - x'(t)|` over the final window.
    pub controller_norm: T,
    /// `int mu [x'(t - tau) - x'(t)] dt` over the last delay.
    pub controller_integral: T,
}

/// Default run length for a delay: the transient `max(50 T_force, 20 tau)`
/// followed by the measurement window.
pub fn default_t_end<T: Real>(params: &OscillatorParams<T>, cfg: &ControllerConfig<T>, opts: &RunOptions<T>) -> T {
    let transient = (T::lit(50.0) * params.forcing_period()).max(T::lit(20.0) * cfg.tau);
    transient + T::from_count(opts.window_taus) * cfg.tau
}

/// Integrates the controlled system with RK4 at `dt = tau / steps_per_tau`
/// and measures tau-periodicity over the final window. `t_end` is rounded
/// up to a whole number of steps so that shifts by `tau` are exact index
/// shifts.
pub fn run_controlled<T: Real>(
    params: &OscillatorParams<T>,
    cfg: &ControllerConfig<T>,
    s0: State<T>,
    t_end: T,
    opts: &RunOptions<T>,
) -> Result<(Trajectory<T>, PeriodicityReport<T>)> {
    params.validate()?;
    cfg.validate()?;
    if opts.steps_per_tau == 0 || opts.window_taus == 0 {
        return Err(Error::invalid("steps_per_tau", "steps and window must be positive"));
    }
    let n_tau = opts.steps_per_tau;
    let dt = cfg.tau / T::from_count(n_tau);
    let n_steps = ((t_end - s0.t) / dt - T::lit(1e-9)).ceil().to_usize().unwrap_or(0);
    let window = opts.window_taus * n_tau;
    if n_steps < window + n_tau {
        return Err(Error::invalid("t_end", "run is shorter than the measurement window plus one delay"));
    }
    let t_final = s0.t + dt * T::from_count(n_steps);
    let traj = integrate_delayed(
        |t, x, v, vd| controlled_rhs(params, cfg, &State::new(t, x, v), vd),
        s0,
        cfg.tau,
        cfg.history,
        t_final,
        &StepControl::fixed(dt),
    )?;
    let report = measure(&traj, cfg, n_tau, window);
    Ok((traj, PeriodicityReport {
        is_periodic: report.residual < opts.tolerance,
        ..report
    }))
}

fn measure<T: Real>(traj: &Trajectory<T>, cfg: &ControllerConfig<T>, n_tau: usize, window: usize) -> PeriodicityReport<T> {
    let s = traj.samples();
    let last = s.len() - 1;
    let start = last - window;
    let mut residual = T::zero();
    for i in start..=last - n_tau {
        residual = residual.max((s[i + n_tau].x - s[i].x).abs());
    }
    let mut norm = T::zero();
    for i in start..=last {
        norm = norm.max((s[i - n_tau].v - s[i].v).abs());
    }
    // Trapezoid over the last delay.
    let mut integral = T::zero();
    for i in last - n_tau..last {
        let g = |j: usize| s[j - n_tau].v - s[j].v;
        integral = integral + (g(i) + g(i + 1)) * (s[i + 1].t - s[i].t) / T::lit(2.0);
    }
    PeriodicityReport {
        is_periodic: false,
        period: cfg.tau,
        residual,
        controller_norm: norm,
        controller_integral: cfg.mu * integral,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SearchCell<T: Real> {
    pub mu: T,
    pub tau: T,
    pub controller_norm: T,
    pub is_periodic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SearchConfig<T: Real> {
    pub mu_range: (T, T),
    pub tau_range: (T, T),
    pub grid: usize,
    /// Number of best cells whose delay is refined inside the cell.
    pub refine_cells: usize,
    pub refine_iterations: usize,
    pub run: RunOptions<T>,
    pub history: HistoryPolicy,
    /// Run length per evaluation; `None` uses [`default_t_end`].
    pub t_end: Option<T>,
}

impl<T: Real> Default for SearchConfig<T> {
    fn default() -> Self {
        Self {
            mu_range: (T::lit(0.5), T::lit(3.0)),
            tau_range: (T::lit(2.0), T::lit(6.0)),
            grid: 20,
            refine_cells: 3,
            refine_iterations: 24,
            run: RunOptions::default(),
            history: HistoryPolicy::Zero,
            t_end: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SearchResult<T: Real> {
    /// Cell-centre evaluations, ascending controller norm.
    pub cells: Vec<SearchCell<T>>,
    /// Best point found inside each refined cell, ascending controller norm.
    pub refined: Vec<SearchCell<T>>,
}

impl<T: Real> SearchResult<T> {
    pub fn best(&self) -> Option<&SearchCell<T>> {
        self.cells
            .iter()
            .chain(&self.refined)
            .min_by(|a, b| a.controller_norm.partial_cmp(&b.controller_norm).expect("finite norms"))
    }
}

fn evaluate<T: Real>(params: &OscillatorParams<T>, s0: State<T>, mu: T, tau: T, sc: &SearchConfig<T>) -> SearchCell<T> {
    let cfg = ControllerConfig {
        mu,
        tau,
        history: sc.history,
    };
    let t_end = s0.t + sc.t_end.unwrap_or_else(|| default_t_end(params, &cfg, &sc.run));
    match run_controlled(params, &cfg, s0, t_end, &sc.run) {
        Ok((_, r)) => SearchCell {
            mu,
            tau,
            controller_norm: r.controller_norm,
            is_periodic: r.is_periodic,
        },
        // A diverging run ranks last.
        Err(_) => SearchCell {
            mu,
            tau,
            controller_norm: T::infinity(),
            is_periodic: false,
        },
    }
}

fn rank<T: Real>(cells: &mut [SearchCell<T>]) {
    cells.sort_by(|a, b| {
        a.controller_norm
            .partial_cmp(&b.controller_norm)
            .expect("norms are never NaN")
            .then(a.mu.partial_cmp(&b.mu).expect("finite"))
            .then(a.tau.partial_cmp(&b.tau).expect("finite"))
    });
}

/// Grid search over `(mu, tau)` cells evaluated at their centres, then a
/// golden-section search in `tau` inside the best cells.
pub fn search_mu_tau<T: Real>(params: &OscillatorParams<T>, s0: State<T>, sc: &SearchConfig<T>) -> Result<SearchResult<T>> {
    params.validate()?;
    let (m0, m1) = sc.mu_range;
    let (t0, t1) = sc.tau_range;
    if !(m1 > m0 && t1 > t0 && t0 > T::zero()) || sc.grid == 0 {
        return Err(Error::invalid("range", "need positive ordered ranges and a nonempty grid"));
    }
    let g = T::from_count(sc.grid);
    let (dm, dtau) = ((m1 - m0) / g, (t1 - t0) / g);
    let half = T::lit(0.5);
    let centres: Vec<(T, T)> = (0..sc.grid * sc.grid)
        .map(|k| {
            let (i, j) = (k / sc.grid, k % sc.grid);
            (m0 + dm * (T::from_count(i) + half), t0 + dtau * (T::from_count(j) + half))
        })
        .collect();
    let mut cells: Vec<SearchCell<T>> = centres.par_iter().map(|&(mu, tau)| evaluate(params, s0, mu, tau, sc)).collect();
    rank(&mut cells);

    let phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut refined: Vec<SearchCell<T>> = cells
        .iter()
        .take(sc.refine_cells)
        .filter(|c| c.controller_norm.is_finite())
        .copied()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|c| {
            let (mut lo, mut hi) = (c.tau - dtau * half, c.tau + dtau * half);
            let f = |tau: T| evaluate(params, s0, c.mu, tau, sc);
            let mut x1 = hi - phi * (hi - lo);
            let mut x2 = lo + phi * (hi - lo);
            let (mut f1, mut f2) = (f(x1), f(x2));
            let mut best = *c;
            for _ in 0..sc.refine_iterations {
                if f1.controller_norm <= f2.controller_norm {
                    hi = x2;
                    (x2, f2) = (x1, f1);
                    x1 = hi - phi * (hi - lo);
                    f1 = f(x1);
                } else {
                    lo = x1;
                    (x1, f1) = (x2, f2);
                    x2 = lo + phi * (hi - lo);
                    f2 = f(x2);
                }
                for cand in [f1, f2] {
                    if cand.controller_norm < best.controller_norm {
                        best = cand;
                    }
                }
            }
            best
        })
        .collect();
    rank(&mut refined);
    Ok(SearchResult { cells, refined })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct OrbitFit<T: Real> {
    pub series: ChebyshevSeries<T>,
    /// Monomial coefficients in the local time `t - lo`, lowest order first.
    pub monomial: Vec<T>,
    /// Max deviation from the trajectory on a uniform grid over the window.
    pub residual: T,
}

/// Least-squares Chebyshev fit of `x(t)` over `[lo, hi]`.
pub fn chebyshev_fit_orbit<T: Real>(traj: &Trajectory<T>, window: (T, T), degree: usize) -> Result<OrbitFit<T>> {
    let (lo, hi) = window;
    let (start, end) = traj.span().ok_or_else(|| Error::invalid("traj", "empty trajectory"))?;
    if !(hi > lo) {
        return Err(Error::DegenerateWindow(format!("[{lo}, {hi}]")));
    }
    if lo < start || hi > end {
        return Err(Error::OutOfSpan {
            t: if lo < start { lo.as_f64() } else { hi.as_f64() },
            start: start.as_f64(),
            end: end.as_f64(),
        });
    }
    let x = |t: T| traj.interpolate(t).map(|s| s.x).unwrap_or_else(|_| T::nan());
    let n_nodes = (4 * (degree + 1)).max(32);
    let series = ChebyshevSeries::fit(x, lo, hi, degree, n_nodes)?;
    let local = ChebyshevSeries {
        lo: T::zero(),
        hi: hi - lo,
        coeffs: series.coeffs.clone(),
    };
    let monomial = local.to_monomial();
    let mut residual = T::zero();
    for k in 0..=400 {
        let t = lo + (hi - lo) * T::from_count(k) / T::lit(400.0);
        residual = residual.max((series.eval(t) - x(t)).abs());
    }
    if !residual.is_finite() {
        return Err(Error::NonFinite {
            what: "orbit fit",
            t: lo.as_f64(),
        });
    }
    Ok(OrbitFit {
        series,
        monomial,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example5() -> OscillatorParams<f64> {
        OscillatorParams::driven(1.0, 1.0, 0.2, 0.1, 0.35, 1.4)
    }

    #[test]
    fn rhs_cases() {
        let p = example5();
        let s = State::new(0.7, 0.3, -0.2);
        let off = ControllerConfig::new(0.0, 3.0);
        assert_eq!(controlled_rhs(&p, &off, &s, 5.0), p.accel(0.7, 0.3, -0.2));
        let on = ControllerConfig::new(2.25311, 3.73093);
        assert_eq!(controlled_rhs(&p, &on, &s, -0.2), p.accel(0.7, 0.3, -0.2));
        assert!((controlled_rhs(&p, &on, &State::at_rest(0.0), 0.0) - 0.35).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_delay() {
        let p = example5();
        let cfg = ControllerConfig::new(1.0, 0.0);
        assert!(run_controlled(&p, &cfg, State::at_rest(0.0), 10.0, &RunOptions::default()).is_err());
        let cfg = ControllerConfig::new(1.0, 4.0);
        assert!(run_controlled(&p, &cfg, State::at_rest(0.0), 10.0, &RunOptions::default()).is_err());
    }

    #[test]
    fn reference_polynomial_starts_at_origin() {
        assert_eq!(REFERENCE_ORBIT_POLY[0], 0.0);
    }
}
