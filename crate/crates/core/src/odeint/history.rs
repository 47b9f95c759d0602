use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::hermite;

/// Velocity assumed for times before the initial instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryPolicy {
    /// `v(t) = v(t0)` for `t < t0`.
    #[default]
    ConstantInitial,
    /// `v(t) = 0` for `t < t0`.
    Zero,
}

/// Rolling window of accepted knots `(t, v, v')` used for delayed reads.
#[derive(Debug, Clone)]
pub struct HistoryBuffer<T: Real> {
    t0: T,
    v0: T,
    policy: HistoryPolicy,
    knots: VecDeque<(T, T, T)>,
}

impl<T: Real> HistoryBuffer<T> {
    pub fn new(t0: T, v0: T, policy: HistoryPolicy) -> Self {
        Self {
            t0,
            v0,
            policy,
            knots: VecDeque::new(),
        }
    }

    pub fn push(&mut self, t: T, v: T, dv: T) {
        self.knots.push_back((t, v, dv));
    }

    /// Drops knots that can no longer be reached by a read at or after
    /// `earliest`.
    pub fn prune(&mut self, earliest: T) {
        while self.knots.len() >= 2 && self.knots[1].0 <= earliest {
            self.knots.pop_front();
        }
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// Velocity at `s`, from the policy before `t0` and by cubic Hermite
    /// between stored knots otherwise.
    pub fn velocity_at(&self, s: T) -> Result<T> {
        if s < self.t0 {
            return Ok(match self.policy {
                HistoryPolicy::ConstantInitial => self.v0,
                HistoryPolicy::Zero => T::zero(),
            });
        }
        let (first, last) = match (self.knots.front(), self.knots.back()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => {
                return Err(Error::OutOfSpan {
                    t: s.as_f64(),
                    start: self.t0.as_f64(),
                    end: self.t0.as_f64(),
                })
            }
        };
        // A step of exactly tau lands its delayed read on the newest knot up
        // to rounding in `t + h - tau`.
        let slack = T::lit(16.0) * T::epsilon() * last.0.abs().max(T::one());
        if s > last.0 + slack || s < first.0 {
            return Err(Error::OutOfSpan {
                t: s.as_f64(),
                start: first.0.as_f64(),
                end: last.0.as_f64(),
            });
        }
        let i = self.knots.partition_point(|k| k.0 <= s);
        if i == self.knots.len() {
            return Ok(last.1);
        }
        let (k0, k1) = (self.knots[i - 1], self.knots[i]);
        if s == k0.0 {
            return Ok(k0.1);
        }
        let h = k1.0 - k0.0;
        Ok(hermite(k0.1, k0.2, k1.1, k1.2, h, (s - k0.0) / h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_applies_before_start() {
        let mut h = HistoryBuffer::new(0.0, 2.0, HistoryPolicy::ConstantInitial);
        h.push(0.0, 2.0, 0.0);
        assert_eq!(h.velocity_at(-1.0).unwrap(), 2.0);
        let mut z = HistoryBuffer::new(0.0, 2.0, HistoryPolicy::Zero);
        z.push(0.0, 2.0, 0.0);
        assert_eq!(z.velocity_at(-1.0).unwrap(), 0.0);
        assert_eq!(z.velocity_at(0.0).unwrap(), 2.0);
    }

    #[test]
    fn reads_past_newest_knot_fail() {
        let mut h = HistoryBuffer::new(0.0, 1.0, HistoryPolicy::ConstantInitial);
        h.push(0.0, 1.0, 0.0);
        h.push(0.5, 1.0, 0.0);
        assert!(h.velocity_at(0.6).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_cubics_and_prune_keeps_bracket() {
        let v = |t: f64| t * t * t - t;
        let dv = |t: f64| 3.0 * t * t - 1.0;
        let mut h = HistoryBuffer::new(0.0, v(0.0), HistoryPolicy::ConstantInitial);
        for i in 0..=20 {
            let t = i as f64 * 0.1;
            h.push(t, v(t), dv(t));
        }
        h.prune(1.25);
        assert!(h.len() < 21);
        assert!((h.velocity_at(1.25).unwrap() - v(1.25)).abs() < 1e-13);
        assert!((h.velocity_at(1.97).unwrap() - v(1.97)).abs() < 1e-13);
    }
}
