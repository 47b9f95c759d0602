//! Time-ordered solution samples with dense output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscillator::State;
use crate::scalar::Real;

/// How the samples were produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub integrator: String,
    pub step_policy: String,
}

/// Continuous extension of one accepted Dormand–Prince step: five
/// coefficient rows for `x` and for `v`.
pub(crate) type DenseSegment<T> = [[T; 5]; 2];

/// Samples with strictly increasing `t`, plus the acceleration at each
/// sample for Hermite interpolation.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    samples: Vec<State<T>>,
    accel: Vec<T>,
    dense: Option<Vec<DenseSegment<T>>>,
    pub meta: TrajectoryMeta,
}

impl<T: Real> Trajectory<T> {
    pub fn new(integrator: &str, step_policy: &str) -> Self {
        Self {
            samples: Vec::new(),
            accel: Vec::new(),
            dense: None,
            meta: TrajectoryMeta {
                integrator: integrator.to_string(),
                step_policy: step_policy.to_string(),
            },
        }
    }

    pub(crate) fn with_dense(mut self) -> Self {
        self.dense = Some(Vec::new());
        self
    }

    /// Appends a sample. Panics in debug builds if time does not advance.
    pub fn push(&mut self, s: State<T>, accel: T) {
        debug_assert!(
            self.samples.last().map_or(true, |last| s.t > last.t),
            "trajectory times must increase"
        );
        self.samples.push(s);
        self.accel.push(accel);
    }

    pub(crate) fn push_dense(&mut self, s: State<T>, accel: T, seg: DenseSegment<T>) {
        self.push(s, accel);
        if let Some(d) = self.dense.as_mut() {
            d.push(seg);
        }
    }

    pub fn samples(&self) -> &[State<T>] {
        &self.samples
    }

    pub fn accelerations(&self) -> &[T] {
        &self.accel
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&State<T>> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&State<T>> {
        self.samples.last()
    }

    pub fn span(&self) -> Option<(T, T)> {
        Some((self.samples.first()?.t, self.samples.last()?.t))
    }

    /// State at an arbitrary `t` inside the span.
    ///
    /// Uses the stored continuous extension for adaptive runs, cubic Hermite
    /// on `(x, v)` and `(v, x'')` otherwise.
    pub fn interpolate(&self, t: T) -> Result<State<T>> {
        let (start, end) = self.span().ok_or(Error::OutOfSpan {
            t: t.as_f64(),
            start: f64::NAN,
            end: f64::NAN,
        })?;
        if !(t >= start && t <= end) {
            return Err(Error::OutOfSpan {
                t: t.as_f64(),
                start: start.as_f64(),
                end: end.as_f64(),
            });
        }
        let i = self.samples.partition_point(|s| s.t <= t);
        if i == 0 {
            return Ok(self.samples[0]);
        }
        if i == self.samples.len() {
            return Ok(*self.samples.last().expect("nonempty"));
        }
        let (s0, s1) = (self.samples[i - 1], self.samples[i]);
        if t == s0.t {
            return Ok(s0);
        }
        let h = s1.t - s0.t;
        let theta = (t - s0.t) / h;
        if let Some(dense) = &self.dense {
            let seg = &dense[i - 1];
            return Ok(State::new(t, eval_dense(&seg[0], theta), eval_dense(&seg[1], theta)));
        }
        let x = hermite(s0.x, s0.v, s1.x, s1.v, h, theta);
        let v = hermite(s0.v, self.accel[i - 1], s1.v, self.accel[i], h, theta);
        Ok(State::new(t, x, v))
    }

    #[allow(dead_code)]
    pub(crate) fn into_parts(self) -> (Vec<State<T>>, Vec<T>) {
        (self.samples, self.accel)
    }
}

pub(crate) fn eval_dense<T: Real>(r: &[T; 5], theta: T) -> T {
    let one = T::one();
    let th1 = one - theta;
    r[0] + theta * (r[1] + th1 * (r[2] + theta * (r[3] + th1 * r[4])))
}

/// Cubic Hermite interpolant on `[0, h]` at `theta = s/h`.
#[inline]
pub(crate) fn hermite<T: Real>(y0: T, d0: T, y1: T, d1: T, h: T, theta: T) -> T {
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = two * t3 - three * t2 + T::one();
    let h10 = t3 - two * t2 + theta;
    let h01 = -two * t3 + three * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}
