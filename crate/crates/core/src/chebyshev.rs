//! Least-squares Chebyshev series on an interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `sum c_k T_k(s)` with `s` the affine image of `[lo, hi]` on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ChebyshevSeries<T: Real> {
    pub lo: T,
    pub hi: T,
    pub coeffs: Vec<T>,
}

/// Chebyshev points of the first kind mapped to `[lo, hi]`.
pub fn nodes<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let mid = (lo + hi) / T::lit(2.0);
    let rad = (hi - lo) / T::lit(2.0);
    (0..n)
        .map(|j| {
            let th = T::PI() * (T::from_count(j) + T::lit(0.5)) / T::from_count(n);
            mid - rad * th.cos()
        })
        .collect()
}

impl<T: Real> ChebyshevSeries<T> {
    /// Degree-`degree` least-squares fit to `f` sampled at `n_nodes`
    /// Chebyshev points. Discrete orthogonality makes the projection exact.
    pub fn fit<F: Fn(T) -> T>(f: F, lo: T, hi: T, degree: usize, n_nodes: usize) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::DegenerateWindow(format!("[{lo}, {hi}]")));
        }
        if n_nodes <= degree {
            return Err(Error::invalid("n_nodes", "need more nodes than the degree"));
        }
        let n = T::from_count(n_nodes);
        let values: Vec<T> = nodes(lo, hi, n_nodes).into_iter().map(&f).collect();
        let mut coeffs = vec![T::zero(); degree + 1];
        for (j, fj) in values.iter().enumerate() {
            let th = T::PI() * (T::from_count(j) + T::lit(0.5)) / n;
            for (k, c) in coeffs.iter_mut().enumerate() {
                // Node s_j = -cos(th), so T_k(s_j) = (-1)^k cos(k th).
                let sign = if k % 2 == 0 { T::one() } else { -T::one() };
                *c = *c + *fj * sign * (T::from_count(k) * th).cos();
            }
        }
        for (k, c) in coeffs.iter_mut().enumerate() {
            let scale = if k == 0 { T::one() } else { T::lit(2.0) };
            *c = *c * scale / n;
        }
        Ok(Self { lo, hi, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, t: T) -> T {
        let s = (T::lit(2.0) * t - (self.lo + self.hi)) / (self.hi - self.lo);
        let two_s = s + s;
        let (mut b1, mut b2) = (T::zero(), T::zero());
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + two_s * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs.first().copied().unwrap_or_else(T::zero) + s * b1 - b2
    }

    /// Monomial coefficients in `t`, lowest order first.
    pub fn to_monomial(&self) -> Vec<T> {
        let deg = self.degree();
        // Chebyshev -> powers of s.
        let mut in_s = vec![T::zero(); deg + 1];
        let mut t_prev = vec![T::one()];
        let mut t_cur = vec![T::zero(), T::one()];
        for (k, &c) in self.coeffs.iter().enumerate() {
            let tk: &Vec<T> = match k {
                0 => &t_prev,
                1 => &t_cur,
                _ => {
                    let mut next = vec![T::zero(); k + 1];
                    for (i, &v) in t_cur.iter().enumerate() {
                        next[i + 1] = next[i + 1] + T::lit(2.0) * v;
                    }
                    for (i, &v) in t_prev.iter().enumerate() {
                        next[i] = next[i] - v;
                    }
                    t_prev = std::mem::replace(&mut t_cur, next);
                    &t_cur
                }
            };
            for (i, &v) in tk.iter().enumerate() {
                in_s[i] = in_s[i] + c * v;
            }
        }
        // Substitute s = alpha t + beta by Horner composition.
        let alpha = T::lit(2.0) / (self.hi - self.lo);
        let beta = -(self.lo + self.hi) / (self.hi - self.lo);
        let mut out = vec![T::zero(); deg + 1];
        for &c in in_s.iter().rev() {
            // out <- out * (alpha t + beta) + c
            let mut next = vec![T::zero(); deg + 1];
            for (i, &v) in out.iter().enumerate() {
                next[i] = next[i] + v * beta;
                if i + 1 <= deg {
                    next[i + 1] = next[i + 1] + v * alpha;
                }
            }
            next[0] = next[0] + c;
            out = next;
        }
        out
    }
}

/// Evaluates monomial coefficients (lowest order first) at `t`.
pub fn eval_monomial<T: Real>(coeffs: &[T], t: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * t + c)
}
