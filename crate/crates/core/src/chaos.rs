//! Stroboscopic Poincaré maps, largest Lyapunov exponents and the
//! chaos-onset scan in the forcing amplitude.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odeint::{advance, StepControl};
use crate::oscillator::{OscillatorParams, State};
use crate::scalar::Real;

/// Reference chaos-onset estimates `(omega, gamma, lyapunov)` for
/// `a = b = 1, c = 0, delta = 0.1`.
pub const REFERENCE_ONSETS: [(f64, f64, f64); 87] = [
    (0.050, 0.387, 0.044),
    (0.100, 0.402, 0.023),
    (0.125, 0.402, 0.065),
    (0.150, 0.397, 0.063),
    (0.200, 0.380, 0.051),
    (0.225, 0.389, 0.064),
    (0.250, 0.381, 0.057),
    (0.300, 0.382, 0.091),
    (0.350, 0.360, 0.020),
    (0.400, 0.342, 0.047),
    (0.450, 0.478, 0.009),
    (0.500, 0.640, 0.098),
    (0.525, 0.633, 0.069),
    (0.600, 0.381, 0.020),
    (0.625, 0.376, 0.015),
    (0.650, 0.375, 0.027),
    (0.700, 0.429, 0.067),
    (0.725, 0.450, 0.008),
    (0.750, 0.522, 0.011),
    (0.800, 0.721, 0.151),
    (0.825, 0.810, 0.190),
    (0.925, 1.336, 0.134),
    (0.950, 1.261, 0.067),
    (1.000, 0.939, 0.119),
    (1.100, 0.173, 0.115),
    (1.125, 0.147, 0.058),
    (1.150, 0.136, 0.068),
    (1.200, 0.199, 0.048),
    (1.225, 0.214, 0.074),
    (1.250, 0.233, 0.164),
    (1.300, 0.268, 0.088),
    (1.325, 0.285, 0.133),
    (1.350, 0.304, 0.170),
    (1.400, 0.340, 0.140),
    (1.425, 0.358, 0.003),
    (1.450, 0.381, 0.002),
    (1.500, 0.423, 0.015),
    (1.525, 0.447, 0.131),
    (1.550, 0.471, 0.023),
    (1.600, 0.510, 0.091),
    (1.625, 0.518, 0.167),
    (1.650, 0.529, 0.163),
    (1.700, 0.548, 0.044),
    (1.725, 0.556, 0.065),
    (1.750, 0.573, 0.137),
    (1.800, 0.605, 0.094),
    (1.825, 0.609, 0.071),
    (1.850, 0.618, 0.062),
    (1.900, 0.636, 0.303),
    (1.925, 0.643, 0.306),
    (1.950, 0.655, 0.121),
    (2.000, 0.684, 0.186),
    (2.025, 0.688, 0.054),
    (2.050, 0.695, 0.255),
    (2.100, 0.705, 0.106),
    (2.125, 0.706, 0.110),
    (2.150, 0.707, 0.213),
    (2.200, 0.703, 0.111),
    (2.300, 0.699, 0.027),
    (2.325, 0.724, 0.233),
    (2.350, 0.763, 0.006),
    (2.400, 0.840, 0.024),
    (2.425, 0.858, 0.266),
    (2.450, 0.862, 0.006),
    (2.500, 0.839, 0.272),
    (2.525, 0.841, 0.203),
    (2.550, 0.826, 0.084),
    (2.600, 0.783, 0.125),
    (2.700, 0.786, 0.002),
    (2.800, 1.263, 0.012),
    (2.825, 1.351, 0.016),
    (2.850, 1.525, 0.039),
    (2.900, 1.871, 0.026),
    (2.925, 1.937, 0.022),
    (3.000, 2.155, 0.004),
    (3.100, 2.168, 0.032),
    (3.200, 2.530, 0.031),
    (3.225, 2.590, 0.051),
    (3.500, 3.870, 0.025),
    (3.525, 3.955, 0.013),
    (3.650, 4.736, 0.058),
    (3.700, 4.999, 0.315),
    (3.750, 4.987, 0.365),
    (3.800, 5.066, 0.027),
    (3.900, 6.137, 0.014),
    (3.925, 6.288, 0.038),
    (4.000, 6.787, 0.049),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PoincareSeries<T: Real> {
    /// `(x, v)` at successive forcing periods, transient removed.
    pub points: Vec<(T, T)>,
    pub omega: T,
    pub n_transient: usize,
}

/// RK4 with `steps_per_period` steps per forcing period.
pub fn strobe_control<T: Real>(params: &OscillatorParams<T>, steps_per_period: usize) -> StepControl<T> {
    StepControl::fixed(params.forcing_period() / T::from_count(steps_per_period.max(1)))
}

fn check_forcing<T: Real>(params: &OscillatorParams<T>) -> Result<()> {
    params.validate()?;
    if !(params.omega > T::zero()) {
        return Err(Error::invalid("omega", "stroboscopic sampling needs omega > 0"));
    }
    Ok(())
}

/// Samples one continuing trajectory at `t0 + n T`, `T = 2 pi / omega`.
pub fn poincare_map<T: Real>(
    params: &OscillatorParams<T>,
    s0: State<T>,
    n_points: usize,
    n_transient: usize,
    ctrl: &StepControl<T>,
) -> Result<PoincareSeries<T>> {
    check_forcing(params)?;
    let period = params.forcing_period();
    let f = |t: T, x: T, v: T| params.accel(t, x, v);
    let mut s = s0;
    let mut points = Vec::with_capacity(n_points);
    for n in 1..=n_transient + n_points {
        s = advance(f, s, s0.t + period * T::from_count(n), ctrl)?;
        if n > n_transient {
            points.push((s.x, s.v));
        }
    }
    Ok(PoincareSeries {
        points,
        omega: params.omega,
        n_transient,
    })
}

/// Same map, but each period restarts the initial-value problem at local
/// time `t0` from the previous strobe point.
pub fn poincare_map_restarted<T: Real>(
    params: &OscillatorParams<T>,
    s0: State<T>,
    n_points: usize,
    n_transient: usize,
    ctrl: &StepControl<T>,
) -> Result<PoincareSeries<T>> {
    check_forcing(params)?;
    let period = params.forcing_period();
    let f = |t: T, x: T, v: T| params.accel(t, x, v);
    let (mut x, mut v) = (s0.x, s0.v);
    let mut points = Vec::with_capacity(n_points);
    for n in 1..=n_transient + n_points {
        let s = advance(f, State::new(s0.t, x, v), s0.t + period, ctrl)?;
        (x, v) = (s.x, s.v);
        if n > n_transient {
            points.push((x, v));
        }
    }
    Ok(PoincareSeries {
        points,
        omega: params.omega,
        n_transient,
    })
}

/// Greedy clustering: a point joins the first centre within `radius`
/// (Euclidean in `(x, v)`), otherwise it starts a new one.
pub fn count_clusters<T: Real>(points: &[(T, T)], radius: T) -> usize {
    let mut centres: Vec<(T, T)> = Vec::new();
    for &(x, v) in points {
        let near = centres.iter().any(|&(cx, cv)| (x - cx).hypot(v - cv) <= radius);
        if !near {
            centres.push((x, v));
        }
    }
    centres.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LyapunovConfig<T: Real> {
    pub steps_per_period: usize,
    pub transient_periods: usize,
    pub average_periods: usize,
    /// Renormalisation interval in forcing periods.
    pub renorm_periods: T,
    pub offset: T,
}

impl<T: Real> Default for LyapunovConfig<T> {
    fn default() -> Self {
        Self {
            steps_per_period: 200,
            transient_periods: 100,
            average_periods: 400,
            renorm_periods: T::one(),
            offset: T::lit(1e-8),
        }
    }
}

impl<T: Real> LyapunovConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_period == 0 {
            return Err(Error::invalid("steps_per_period", "must be positive"));
        }
        if self.average_periods == 0 {
            return Err(Error::invalid("average_periods", "must be positive"));
        }
        if !(self.renorm_periods > T::zero() && self.renorm_periods.is_finite()) {
            return Err(Error::invalid("renorm_periods", "must be positive"));
        }
        if !(self.offset > T::zero() && self.offset.is_finite()) {
            return Err(Error::invalid("offset", "must be positive"));
        }
        Ok(())
    }
}

/// Largest Lyapunov exponent by the two-trajectory (Benettin) method.
pub fn lyapunov_max<T: Real>(params: &OscillatorParams<T>, s0: State<T>, cfg: &LyapunovConfig<T>) -> Result<T> {
    check_forcing(params)?;
    cfg.validate()?;
    let period = params.forcing_period();
    let ctrl = strobe_control(params, cfg.steps_per_period);
    let f = |t: T, x: T, v: T| params.accel(t, x, v);
    let mut s = advance(f, s0, s0.t + period * T::from_count(cfg.transient_periods), &ctrl)?;
    let mut c = State::new(s.t, s.x + cfg.offset, s.v);
    let interval = period * cfg.renorm_periods;
    let n_intervals = (T::from_count(cfg.average_periods) / cfg.renorm_periods)
        .round()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let t_start = s.t;
    let mut sum = T::zero();
    for k in 1..=n_intervals {
        let t_next = t_start + interval * T::from_count(k);
        s = advance(f, s, t_next, &ctrl)?;
        c = advance(f, c, t_next, &ctrl)?;
        let (dx, dv) = (c.x - s.x, c.v - s.v);
        let d = dx.hypot(dv);
        if !(d.is_finite() && d > T::zero()) {
            return Err(Error::NonFinite {
                what: "Lyapunov separation",
                t: t_next.as_f64(),
            });
        }
        sum = sum + (d / cfg.offset).ln();
        let r = cfg.offset / d;
        c = State::new(t_next, s.x + dx * r, s.v + dv * r);
    }
    Ok(sum / (interval * T::from_count(n_intervals)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ChaosScanRow<T: Real> {
    pub omega: T,
    pub gamma_c: T,
    pub lyapunov: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", tag = "outcome", rename_all = "snake_case")]
pub enum ScanOutcome<T: Real> {
    Onset(ChaosScanRow<T>),
    NoOnset { omega: T, max_lyapunov: T },
}

impl<T: Real> ScanOutcome<T> {
    pub fn onset(&self) -> Option<&ChaosScanRow<T>> {
        match self {
            ScanOutcome::Onset(row) => Some(row),
            ScanOutcome::NoOnset { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScanConfig<T: Real> {
    pub gamma_lo: T,
    pub gamma_hi: T,
    pub grid_step: T,
    /// Bisection stops once the bracket is this narrow.
    pub resolution: T,
    pub threshold: T,
    pub initial: (T, T),
    pub lyapunov: LyapunovConfig<T>,
}

impl<T: Real> Default for ScanConfig<T> {
    fn default() -> Self {
        Self {
            gamma_lo: T::lit(0.01),
            gamma_hi: T::one(),
            grid_step: T::lit(0.005),
            resolution: T::lit(1e-3),
            threshold: T::lit(0.01),
            initial: (T::zero(), T::zero()),
            lyapunov: LyapunovConfig::default(),
        }
    }
}

impl<T: Real> ScanConfig<T> {
    /// The deterministic `gamma` work-list.
    pub fn grid(&self) -> Result<Vec<T>> {
        if !(self.gamma_lo > T::zero() && self.gamma_hi > self.gamma_lo) {
            return Err(Error::invalid("gamma_range", "need 0 < gamma_lo < gamma_hi"));
        }
        if !(self.grid_step > T::zero()) || !(self.resolution > T::zero()) {
            return Err(Error::invalid("grid_step", "step and resolution must be positive"));
        }
        let n = ((self.gamma_hi - self.gamma_lo) / self.grid_step + T::lit(1e-9))
            .floor()
            .to_usize()
            .unwrap_or(0);
        Ok((0..=n).map(|i| self.gamma_lo + self.grid_step * T::from_count(i)).collect())
    }
}

/// Smallest `gamma` whose Lyapunov exponent exceeds the threshold at two
/// consecutive grid points, refined by bisection. Grid points are evaluated
/// in parallel and merged by index, so the result matches a serial run.
pub fn gamma_scan<T: Real>(base: &OscillatorParams<T>, cfg: &ScanConfig<T>) -> Result<ScanOutcome<T>> {
    check_forcing(base)?;
    let grid = cfg.grid()?;
    let s0 = State::new(T::zero(), cfg.initial.0, cfg.initial.1);
    let eval = |g: T| lyapunov_max(&base.with_gamma(g), s0, &cfg.lyapunov);
    let exps: Vec<T> = grid.par_iter().map(|&g| eval(g)).collect::<Result<_>>()?;
    let chaotic = |l: T| l > cfg.threshold;
    let first = (0..grid.len()).find(|&i| chaotic(exps[i]) && exps.get(i + 1).is_some_and(|&l| chaotic(l)));
    let Some(i) = first else {
        let max_lyapunov = exps.iter().copied().fold(T::neg_infinity(), T::max);
        return Ok(ScanOutcome::NoOnset {
            omega: base.omega,
            max_lyapunov,
        });
    };
    let (mut hi, mut l_hi) = (grid[i], exps[i]);
    if i > 0 {
        let mut lo = grid[i - 1];
        while hi - lo > cfg.resolution {
            let mid = (lo + hi) / T::lit(2.0);
            let l = eval(mid)?;
            if chaotic(l) {
                (hi, l_hi) = (mid, l);
            } else {
                lo = mid;
            }
        }
    }
    Ok(ScanOutcome::Onset(ChaosScanRow {
        omega: base.omega,
        gamma_c: hi,
        lyapunov: l_hi,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BifurcationSlice<T: Real> {
    pub gamma: T,
    pub p_values: Vec<T>,
}

/// Post-transient strobe displacements for each `gamma`, each run started
/// afresh from `s0`.
pub fn bifurcation_data<T: Real>(
    base: &OscillatorParams<T>,
    gammas: &[T],
    s0: State<T>,
    n_points: usize,
    n_transient: usize,
    ctrl: &StepControl<T>,
) -> Result<Vec<BifurcationSlice<T>>> {
    gammas
        .par_iter()
        .map(|&g| {
            let series = poincare_map(&base.with_gamma(g), s0, n_points, n_transient, ctrl)?;
            Ok(BifurcationSlice {
                gamma: g,
                p_values: series.points.into_iter().map(|p| p.0).collect(),
            })
        })
        .collect()
}
