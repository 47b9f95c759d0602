//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 2000;

fn kronrod<T: Real, F: Fn(T) -> T>(f: &F, lo: T, hi: T) -> (T, T) {
    let centre = (lo + hi) / T::lit(2.0);
    let half = (hi - lo) / T::lit(2.0);
    let fc = f(centre);
    let mut k = fc * T::lit(WGK[7]);
    let mut g = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(centre - dx) + f(centre + dx);
        k = k + T::lit(WGK[j]) * s;
        if j % 2 == 1 {
            g = g + T::lit(WG[j / 2]) * s;
        }
    }
    (k * half, ((k - g) * half).abs())
}

/// `int_lo^hi f` to `max(abs_tol, rel_tol |I|)` by global interval
/// bisection.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, abs_tol: T, rel_tol: T) -> Result<T> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid("bounds", "quadrature needs finite limits"));
    }
    if lo == hi {
        return Ok(T::zero());
    }
    let mut parts = vec![(lo, hi, kronrod(&f, lo, hi))];
    loop {
        let total: T = parts.iter().fold(T::zero(), |s, p| s + p.2 .0);
        let err: T = parts.iter().fold(T::zero(), |s, p| s + p.2 .1);
        if !total.is_finite() {
            return Err(Error::NonFinite {
                what: "integrand",
                t: lo.as_f64(),
            });
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if parts.len() >= MAX_INTERVALS {
            // Best effort: the error estimate of Kronrod rules is pessimistic.
            return Ok(total);
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .2 .1.partial_cmp(&b.1 .2 .1).expect("finite error"))
            .expect("nonempty");
        let (a, b, _) = parts.swap_remove(worst);
        let m = (a + b) / T::lit(2.0);
        if !(m > a && m < b) {
            return Ok(total);
        }
        parts.push((a, m, kronrod(&f, a, m)));
        parts.push((m, b, kronrod(&f, m, b)));
    }
}
