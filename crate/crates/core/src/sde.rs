//! Euler–Maruyama paths of the noisy oscillator
//!
//! ```text
//! dx = v dt
//! dv = (a x - b x^3 - c x^5 - gamma eps v + gamma eps cos(omega t)) dt + sigma dW
//! ```
//!
//! Here `gamma eps` plays both the damping and the forcing amplitude, and
//! `delta` is unused.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscillator::{OscillatorParams, State};
use crate::scalar::Real;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SdeConfig<T: Real> {
    pub dt: T,
    pub n_steps: usize,
    pub seed: u64,
    pub sigma: T,
    pub ensemble: usize,
}

impl<T: Real> Default for SdeConfig<T> {
    fn default() -> Self {
        Self {
            dt: T::lit(1e-2),
            n_steps: 1000,
            seed: 0,
            sigma: T::lit(0.1),
            ensemble: 1,
        }
    }
}

impl<T: Real> SdeConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "step must be positive and finite"));
        }
        if !(self.sigma >= T::zero() && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma", "noise intensity must be finite and non-negative"));
        }
        if self.ensemble == 0 {
            return Err(Error::invalid("ensemble", "need at least one path"));
        }
        Ok(())
    }
}

/// Velocity drift.
pub fn sde_drift<T: Real>(params: &OscillatorParams<T>, t: T, x: T, v: T) -> T {
    let g = params.gamma * params.epsilon;
    params.force(x) - g * v + g * (params.omega * t).cos()
}

/// Generator for one path: the seed picks the key, the path index the
/// stream, so every path is reproducible on its own.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// `n` Wiener increments with variance `dt`.
pub fn wiener_increments<T: Real>(seed: u64, path: u64, dt: T, n: usize) -> Vec<T> {
    let mut rng = path_rng(seed, path);
    let scale = dt.sqrt();
    (0..n).map(|_| scale * T::lit(rng.sample::<f64, _>(StandardNormal))).collect()
}

#[derive(Debug, Clone)]
pub struct SdePath<T: Real> {
    pub trajectory: Trajectory<T>,
    /// Set when the state became non-finite; the path stops at the last
    /// finite knot.
    pub truncated: bool,
}

fn one_path<T: Real>(params: &OscillatorParams<T>, cfg: &SdeConfig<T>, s0: State<T>, path: u64) -> SdePath<T> {
    let mut traj = Trajectory::new("euler-maruyama", &format!("fixed dt={:e} sigma={:e}", cfg.dt, cfg.sigma));
    let mut rng = path_rng(cfg.seed, path);
    let noisy = cfg.sigma != T::zero();
    let sq = cfg.dt.sqrt();
    let (mut x, mut v) = (s0.x, s0.v);
    let mut a = sde_drift(params, s0.t, x, v);
    traj.push(s0, a);
    for i in 1..=cfg.n_steps {
        let xn = x + v * cfg.dt;
        let mut vn = v + a * cfg.dt;
        if noisy {
            vn = vn + cfg.sigma * sq * T::lit(rng.sample::<f64, _>(StandardNormal));
        }
        let t = s0.t + cfg.dt * T::from_count(i);
        if !(xn.is_finite() && vn.is_finite()) {
            return SdePath {
                trajectory: traj,
                truncated: true,
            };
        }
        (x, v) = (xn, vn);
        a = sde_drift(params, t, x, v);
        traj.push(State::new(t, x, v), a);
    }
    SdePath {
        trajectory: traj,
        truncated: false,
    }
}

/// `cfg.ensemble` paths, generated in parallel; identical to
/// [`euler_maruyama_serial`].
pub fn euler_maruyama<T: Real>(params: &OscillatorParams<T>, cfg: &SdeConfig<T>, s0: State<T>) -> Result<Vec<SdePath<T>>> {
    params.validate()?;
    cfg.validate()?;
    Ok((0..cfg.ensemble as u64)
        .into_par_iter()
        .map(|k| one_path(params, cfg, s0, k))
        .collect())
}

pub fn euler_maruyama_serial<T: Real>(params: &OscillatorParams<T>, cfg: &SdeConfig<T>, s0: State<T>) -> Result<Vec<SdePath<T>>> {
    params.validate()?;
    cfg.validate()?;
    Ok((0..cfg.ensemble as u64).map(|k| one_path(params, cfg, s0, k)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EnsembleMoments<T: Real> {
    pub t: T,
    pub mean_x: T,
    pub var_x: T,
    pub mean_v: T,
    pub var_v: T,
    pub n_paths: usize,
}

/// Sample moments across paths at the knot nearest `t` (unbiased
/// variance). Truncated paths that stop before `t` are an error.
pub fn ensemble_stats<T: Real>(paths: &[SdePath<T>], t: T) -> Result<EnsembleMoments<T>> {
    if paths.len() < 2 {
        return Err(Error::Ensemble(paths.len()));
    }
    let mut xs = Vec::with_capacity(paths.len());
    let mut vs = Vec::with_capacity(paths.len());
    let mut t_knot = t;
    for p in paths {
        let s = p.trajectory.samples();
        let (start, end) = p.trajectory.span().ok_or(Error::Ensemble(0))?;
        let tol = if s.len() > 1 { (s[1].t - s[0].t) / T::lit(2.0) } else { T::zero() };
        if t < start - tol || t > end + tol {
            return Err(Error::OutOfSpan {
                t: t.as_f64(),
                start: start.as_f64(),
                end: end.as_f64(),
            });
        }
        let k = s.partition_point(|q| q.t < t);
        let k = if k == s.len() || (k > 0 && t - s[k - 1].t <= s[k].t - t) { k - 1 } else { k };
        t_knot = s[k].t;
        xs.push(s[k].x);
        vs.push(s[k].v);
    }
    let (mean_x, var_x) = moments(&xs);
    let (mean_v, var_v) = moments(&vs);
    Ok(EnsembleMoments {
        t: t_knot,
        mean_x,
        var_x,
        mean_v,
        var_v,
        n_paths: paths.len(),
    })
}

fn moments<T: Real>(v: &[T]) -> (T, T) {
    let n = T::from_count(v.len());
    let mean = v.iter().fold(T::zero(), |s, &x| s + x) / n;
    let ss = v.iter().fold(T::zero(), |s, &x| s + (x - mean) * (x - mean));
    (mean, ss / (n - T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increments_have_variance_dt() {
        let w: Vec<f64> = wiener_increments(7, 0, 0.01, 1_000_000);
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (w.len() - 1) as f64;
        assert!((var / 0.01 - 1.0).abs() < 0.05, "{var}");
        assert!(mean.abs() < 5.0 * (0.01f64 / 1e6).sqrt());
    }

    #[test]
    fn streams_differ_and_repeat() {
        let a: Vec<f64> = wiener_increments(1, 0, 1.0, 8);
        let b: Vec<f64> = wiener_increments(1, 1, 1.0, 8);
        assert_ne!(a, b);
        assert_eq!(a, wiener_increments(1, 0, 1.0, 8));
    }

    #[test]
    fn ensemble_needs_two_paths() {
        let p = OscillatorParams::<f64>::unforced(-1.0, 0.0, 0.0);
        let cfg = SdeConfig { n_steps: 10, ..SdeConfig::default() };
        let one = euler_maruyama(&p, &cfg, State::at_rest(0.0)).unwrap();
        assert!(matches!(ensemble_stats(&one, 0.05), Err(Error::Ensemble(1))));
        assert!(ensemble_stats::<f64>(&[], 0.0).is_err());
    }

    #[test]
    fn deterministic_paths_have_zero_variance() {
        let p = OscillatorParams::<f64>::driven(-1.0, 0.5, 0.1, 0.0, 0.3, 1.0);
        let cfg = SdeConfig { n_steps: 100, sigma: 0.0, ensemble: 4, ..SdeConfig::default() };
        let paths = euler_maruyama(&p, &cfg, State::new(0.0, 0.5, 0.0)).unwrap();
        let m = ensemble_stats(&paths, 0.5).unwrap();
        assert_eq!((m.var_x, m.var_v), (0.0, 0.0));
        assert!((m.t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn blow_up_truncates() {
        let p = OscillatorParams::<f64>::unforced(1.0, -1.0, -1.0);
        let cfg = SdeConfig { dt: 0.1, n_steps: 200, sigma: 0.0, ..SdeConfig::default() };
        let paths = euler_maruyama(&p, &cfg, State::new(0.0, 3.0, 0.0)).unwrap();
        assert!(paths[0].truncated && paths[0].trajectory.len() < 201);
    }
}
