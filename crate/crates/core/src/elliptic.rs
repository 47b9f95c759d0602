//! Jacobi elliptic functions and the complete elliptic integral of the first
//! kind, by the arithmetic–geometric mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_AGM_STEPS: usize = 32;

/// How the second argument of `sn`, `cn`, `dn` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EllipticConvention {
    /// `m = k^2`.
    #[default]
    Parameter,
    /// The modulus `k` itself.
    Modulus,
}

impl EllipticConvention {
    /// Converts an argument in this convention to the parameter `m`.
    pub fn to_parameter<T: Real>(self, arg: T) -> T {
        match self {
            EllipticConvention::Parameter => arg,
            EllipticConvention::Modulus => arg * arg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct JacobiTriple<T: Real> {
    pub sn: T,
    pub cn: T,
    pub dn: T,
}

fn agm_tol<T: Real>() -> T {
    T::lit(1e-15).max(T::epsilon())
}

/// `sn`, `cn`, `dn` of `u` with real parameter `m` (any sign, any size).
pub fn jacobi<T: Real>(u: T, m: T) -> JacobiTriple<T> {
    let one = T::one();
    if m < T::zero() {
        // Imaginary-modulus transformation onto mu in (0, 1).
        let m1 = one - m;
        let mu = -m / m1;
        let s = m1.sqrt();
        let j = jacobi_unit(u * s, mu);
        return JacobiTriple {
            sn: j.sn / (j.dn * s),
            cn: j.cn / j.dn,
            dn: one / j.dn,
        };
    }
    if m > one {
        // Reciprocal-parameter transformation.
        let s = m.sqrt();
        let j = jacobi_unit(u * s, one / m);
        return JacobiTriple {
            sn: j.sn / s,
            cn: j.dn,
            dn: j.cn,
        };
    }
    jacobi_unit(u, m)
}

/// `jacobi` with the second argument read in `convention`.
pub fn jacobi_with<T: Real>(u: T, arg: T, convention: EllipticConvention) -> JacobiTriple<T> {
    jacobi(u, convention.to_parameter(arg))
}

/// Jacobi `cn(u | m)`.
pub fn cn<T: Real>(u: T, m: T) -> T {
    jacobi(u, m).cn
}

fn jacobi_unit<T: Real>(u: T, m: T) -> JacobiTriple<T> {
    let one = T::one();
    if m == T::zero() {
        return JacobiTriple {
            sn: u.sin(),
            cn: u.cos(),
            dn: one,
        };
    }
    if m == one {
        let sech = one / u.cosh();
        return JacobiTriple {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        };
    }
    let tol = agm_tol::<T>();
    let mut a = one;
    let mut b = (one - m).sqrt();
    let mut ratios = [T::zero(); MAX_AGM_STEPS + 1];
    let mut n = 0;
    while n < MAX_AGM_STEPS {
        let c = (a - b) / T::lit(2.0);
        let an = (a + b) / T::lit(2.0);
        b = (a * b).sqrt();
        a = an;
        n += 1;
        ratios[n] = c / a;
        if c.abs() < tol {
            break;
        }
    }
    let mut phi = T::lit(2.0).powi(n as i32) * a * u;
    for k in (1..=n).rev() {
        phi = (phi + (ratios[k] * phi.sin()).asin()) / T::lit(2.0);
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (one - m * sn * sn).max(T::zero()).sqrt();
    JacobiTriple { sn, cn, dn }
}

/// Arithmetic–geometric mean of two positive numbers.
pub fn agm<T: Real>(mut a: T, mut b: T) -> T {
    let tol = agm_tol::<T>();
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= tol * a.abs() {
            break;
        }
        let an = (a + b) / T::lit(2.0);
        b = (a * b).sqrt();
        a = an;
    }
    (a + b) / T::lit(2.0)
}

/// Complete elliptic integral `K(m)` for `m < 1`.
pub fn ellipk<T: Real>(m: T) -> Result<T> {
    if !(m < T::one()) {
        return Err(Error::invalid("m", format!("K(m) is real and finite only for m < 1, got {m}")));
    }
    Ok(T::FRAC_PI_2() / agm(T::one(), (T::one() - m).sqrt()))
}

/// Real period of `u -> cn(u | m)`.
pub fn cn_period<T: Real>(m: T) -> Result<T> {
    let one = T::one();
    if m == one {
        return Err(Error::invalid("m", "cn(u | 1) = sech u is not periodic"));
    }
    if m > one {
        let s = m.sqrt();
        return Ok(T::lit(2.0) * ellipk(one / m)? / s);
    }
    Ok(T::lit(4.0) * ellipk(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_are_circular_and_hyperbolic() {
        let j = jacobi(0.7f64, 0.0);
        assert!((j.sn - 0.7f64.sin()).abs() < 1e-15 && (j.cn - 0.7f64.cos()).abs() < 1e-15);
        let j = jacobi(0.7f64, 1.0);
        assert!((j.sn - 0.7f64.tanh()).abs() < 1e-15);
        assert!((j.dn - 1.0 / 0.7f64.cosh()).abs() < 1e-15);
    }

    #[test]
    fn reference_values() {
        // Reference values at u = 0.5, m = 0.3.
        let j = jacobi(0.5f64, 0.3);
        assert!((j.sn - 0.4742156227).abs() < 1e-9, "{}", j.sn);
        assert!((j.cn - 0.8804087364).abs() < 1e-9, "{}", j.cn);
        assert!((j.dn - 0.9656789647).abs() < 1e-9, "{}", j.dn);
    }

    #[test]
    fn k_values() {
        assert!((ellipk(0.0f64).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((ellipk(0.5f64).unwrap() - 1.854_074_677_301_372).abs() < 1e-14);
        assert!(ellipk(1.0f64).is_err());
    }

    #[test]
    fn identities_outside_unit_interval() {
        for &m in &[-3.0f64, -0.4, 1.3, 4.0] {
            for k in 0..20 {
                let u = -2.0 + 0.23 * k as f64;
                let j = jacobi(u, m);
                assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() < 1e-13, "m={m} u={u}");
                assert!((j.dn * j.dn + m * j.sn * j.sn - 1.0).abs() < 1e-12, "m={m} u={u}");
            }
        }
    }

    #[test]
    fn cn_is_periodic() {
        for &m in &[-0.5f64, 0.3, 0.9, 1.31385934] {
            let p = cn_period(m).unwrap();
            for k in 0..10 {
                let u = 0.37 * k as f64;
                assert!((cn(u, m) - cn(u + p, m)).abs() < 1e-10, "m={m}");
            }
        }
        assert!(cn_period(1.0f64).is_err());
    }

    #[test]
    fn modulus_convention_squares_argument() {
        let a = jacobi_with(0.8f64, 0.6, EllipticConvention::Modulus);
        let b = jacobi(0.8f64, 0.36);
        assert_eq!(a, b);
    }

    #[test]
    fn single_precision_is_usable() {
        let j = jacobi(0.5f32, 0.3);
        assert!((j.sn - 0.474_215_6).abs() < 1e-5);
    }
}
