//! Exact solutions of the conservative oscillator
//!
//! ```text
//! x'' - a x + b x^3 + c x^5 = 0,  x(0) = x0,  x'(0) = 0
//! ```
//!
//! through the rational cn ansatz
//!
//! ```text
//! x(t) = x0 sqrt(1 + lam + mu) cn(sqrt(w) t | m) / sqrt(1 + lam cn^2 + mu cn^4)
//! ```
//!
//! and the sech/tanh-type orbits that join saddles.

use serde::{Deserialize, Serialize};

use crate::elliptic::{cn_period, jacobi_with, EllipticConvention};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coefficients of the cn ansatz for one initial amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CnSolution<T: Real> {
    pub x0: T,
    pub lambda: T,
    pub mu: T,
    /// Square of the time scale: the argument of cn is `sqrt(omega) t`.
    pub omega: T,
    pub m: T,
    pub convention: EllipticConvention,
}

impl<T: Real> CnSolution<T> {
    /// `(x(t), x'(t))`.
    pub fn state(&self, t: T) -> (T, T) {
        let sw = self.omega.sqrt();
        let j = jacobi_with(sw * t, self.m, self.convention);
        let one = T::one();
        let c2 = j.cn * j.cn;
        let d = one + c2 * (self.lambda + self.mu * c2);
        let amp = self.x0 * (one + self.lambda + self.mu).sqrt();
        let x = amp * j.cn / d.sqrt();
        let dx_dc = amp * (one - self.mu * c2 * c2) / (d * d.sqrt());
        // d cn / du = -sn dn in either convention once m is the parameter.
        let v = dx_dc * (-j.sn * j.dn) * sw;
        (x, v)
    }

    pub fn eval(&self, t: T) -> T {
        self.state(t).0
    }

    /// Real period in `t`; fails on the separatrix (`m = 1`).
    pub fn period(&self) -> Result<T> {
        Ok(cn_period(self.convention.to_parameter(self.m))? / self.omega.sqrt())
    }

    /// Residuals of the five cn-power coefficients at these coefficients.
    pub fn residuals(&self, a: T, b: T, c: T) -> [T; 5] {
        coefficient_residuals(a, b, c, self.x0, self.lambda, self.mu, self.omega, self.m)
    }
}

/// Coefficients of `cn^0, cn^2, ..., cn^8` left after substituting the
/// ansatz into the equation and clearing denominators (parameter
/// convention). All five vanish exactly at a solution.
#[allow(clippy::too_many_arguments)]
pub fn coefficient_residuals<T: Real>(a: T, b: T, c: T, x0: T, lam: T, mu: T, w: T, m: T) -> [T; 5] {
    let n = |v: f64| T::lit(v);
    let s = T::one() + lam + mu;
    let bx = b * x0 * x0;
    let cx = c * x0 * x0 * x0 * x0;
    let e0 = -a - w + n(2.0) * m * w - n(3.0) * lam * w + n(3.0) * m * lam * w;
    let e2 = -n(2.0) * a * lam - n(2.0) * m * w + n(2.0) * lam * w - n(4.0) * m * lam * w
        - n(10.0) * mu * w
        + n(10.0) * m * mu * w
        + bx * s;
    let e4 = -a * lam * lam - n(2.0) * a * mu + m * lam * w + n(10.0) * mu * w
        - n(20.0) * m * mu * w
        - lam * mu * w
        + m * lam * mu * w
        + bx * lam * s
        + cx * s * s;
    let e6 = -mu
        * (n(2.0) * a * lam - n(10.0) * m * w - n(2.0) * lam * w + n(4.0) * m * lam * w
            - n(2.0) * mu * w
            + n(2.0) * m * mu * w
            - bx * s);
    let e8 = -mu * (a * mu - n(3.0) * m * lam * w + mu * w - n(2.0) * m * mu * w);
    [e0, e2, e4, e6, e8]
}

/// One closed-form root family evaluated at a given amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct Branch<T: Real> {
    pub label: &'static str,
    pub solution: CnSolution<T>,
    /// `max |E_j|` at the closed-form coefficients.
    pub residual: T,
}

fn max_abs<T: Real>(r: &[T]) -> T {
    r.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

fn make_branch<T: Real>(label: &'static str, a: T, b: T, c: T, x0: T, lam: T, mu: T, w: T, m: T) -> Option<Branch<T>> {
    let sol = CnSolution {
        x0,
        lambda: lam,
        mu,
        omega: w,
        m,
        convention: EllipticConvention::Parameter,
    };
    let all_finite = [lam, mu, w, m].iter().all(|v| v.is_finite());
    all_finite.then(|| Branch {
        label,
        solution: sol,
        residual: max_abs(&sol.residuals(a, b, c)),
    })
}

/// Explicit root families: two with `mu = 0` and two with `mu != 0`.
///
/// Families whose discriminant is negative or whose denominators vanish are
/// omitted. The returned coefficients are not filtered for admissibility.
pub fn closed_form_branches<T: Real>(a: T, b: T, c: T, x0: T) -> Vec<Branch<T>> {
    let n = |v: f64| T::lit(v);
    let x2 = x0 * x0;
    let x4 = x2 * x2;
    let mut out = Vec::new();

    let big = x4 * (n(16.0) * a * c + n(3.0) * b * b - n(4.0) * b * c * x2 - n(4.0) * c * c * x4);
    let g = n(6.0) * a - n(3.0) * b * x2 - n(2.0) * c * x4;
    let h = a - b * x2 - c * x4;
    if big >= T::zero() && g * h != T::zero() && h != T::zero() {
        let s = n(3.0).sqrt() * big.sqrt();
        let base = -n(12.0) * a + n(9.0) * b * x2 + n(6.0) * c * x4;
        let k3 = x2 * (n(3.0) * b + n(2.0) * c * x2);
        let w = (base + s) / n(12.0);
        let m = (k3 * (-b * x2 + n(2.0) * c * x4 + s) - n(4.0) * a * (n(4.0) * c * x4 + s)) / (n(4.0) * g * h);
        let lam = (-n(3.0) * b * x2 - n(6.0) * c * x4 + s) / (n(12.0) * (-h));
        out.extend(make_branch("mu0+", a, b, c, x0, lam, T::zero(), w, m));
        let w = (base - s) / n(12.0);
        let m = (n(4.0) * a * (s - n(4.0) * c * x4) - k3 * (b * x2 - n(2.0) * c * x4 + s)) / (n(4.0) * g * h);
        let lam = (n(3.0) * b * x2 + n(6.0) * c * x4 + s) / (n(12.0) * h);
        out.extend(make_branch("mu0-", a, b, c, x0, lam, T::zero(), w, m));
    }

    let small = g * h;
    let den_l = n(3.0) * x2 * (-big / x4);
    if small >= T::zero() && big != T::zero() && x0 != T::zero() {
        let q = n(2.0) * n(6.0).sqrt() * small.sqrt();
        for (label, sg) in [("mu+", T::one()), ("mu-", -T::one())] {
            let lam = n(2.0) * (n(3.0) * b + n(2.0) * c * x2)
                * (-n(12.0) * a + n(9.0) * b * x2 + n(6.0) * c * x4 + sg * q)
                / den_l;
            // mu pairs with the opposite sign of the square root.
            let mu = (n(96.0) * a * a + x4 * (n(51.0) * b * b - n(112.0) * a * c) - n(144.0) * a * b * x2
                + n(76.0) * b * c * x4 * x2
                + n(28.0) * c * c * x4 * x4
                - sg * n(2.0) * q * (n(4.0) * a - n(3.0) * b * x2 - n(2.0) * c * x4))
                / big;
            let s = lam + mu + T::one();
            let p = a * (lam * (n(3.0) * lam + n(4.0)) - n(5.0) * mu + T::one());
            let w = (b * (n(3.0) * lam + n(2.0)) * x2 * s - n(2.0) * p)
                / (n(6.0) * lam * (lam + T::one()) + n(10.0) * mu + n(2.0));
            let m = (n(2.0) * a * (lam * (n(3.0) * lam + n(2.0)) - n(5.0) * mu) - b * (n(3.0) * lam + T::one()) * x2 * s)
                / (n(2.0) * p - b * (n(3.0) * lam + n(2.0)) * x2 * s);
            out.extend(make_branch(label, a, b, c, x0, lam, mu, w, m));
        }
    }
    out
}

fn solve4<T: Real>(mut a: [[T; 4]; 4], mut b: [T; 4]) -> Option<[T; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if a[piv][col] == T::zero() || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for k in row + 1..4 {
            s = s - a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Levenberg–Marquardt on the five coefficient residuals.
fn polish<T: Real>(a: T, b: T, c: T, x0: T, mut p: [T; 4], tol: T) -> ([T; 4], T) {
    let res = |p: &[T; 4]| coefficient_residuals(a, b, c, x0, p[0], p[1], p[2], p[3]);
    let norm2 = |r: &[T; 5]| r.iter().fold(T::zero(), |s, v| s + *v * *v);
    let mut r = res(&p);
    let mut f = norm2(&r);
    let mut nu = T::lit(1e-3);
    let fd = T::epsilon().cbrt();
    for _ in 0..300 {
        if !f.is_finite() || max_abs(&r) <= tol {
            break;
        }
        let mut jac = [[T::zero(); 4]; 5];
        for i in 0..4 {
            let h = fd * p[i].abs().max(T::one());
            let mut hi = p;
            let mut lo = p;
            hi[i] = hi[i] + h;
            lo[i] = lo[i] - h;
            let (rh, rl) = (res(&hi), res(&lo));
            for k in 0..5 {
                jac[k][i] = (rh[k] - rl[k]) / (h + h);
            }
        }
        let mut jtj = [[T::zero(); 4]; 4];
        let mut jtr = [T::zero(); 4];
        for i in 0..4 {
            for j in 0..4 {
                jtj[i][j] = (0..5).fold(T::zero(), |s, k| s + jac[k][i] * jac[k][j]);
            }
            jtr[i] = -(0..5).fold(T::zero(), |s, k| s + jac[k][i] * r[k]);
        }
        let mut improved = false;
        for _ in 0..12 {
            let mut damped = jtj;
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] = row[i] * (T::one() + nu) + nu * T::lit(1e-12);
            }
            if let Some(step) = solve4(damped, jtr) {
                let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
                let rt = res(&trial);
                let ft = norm2(&rt);
                if ft.is_finite() && ft < f {
                    p = trial;
                    r = rt;
                    f = ft;
                    nu = (nu / T::lit(3.0)).max(T::lit(1e-12));
                    improved = true;
                    break;
                }
            }
            nu = nu * T::lit(4.0);
        }
        if !improved {
            break;
        }
    }
    (p, max_abs(&r))
}

fn admissible<T: Real>(p: &[T; 4]) -> bool {
    let (lam, mu, w, m) = (p[0], p[1], p[2], p[3]);
    let one = T::one();
    if !(w > T::zero()) || !(one + lam + mu > T::zero()) || !m.is_finite() {
        return false;
    }
    // 1 + lam y + mu y^2 > 0 for y = cn^2 in [0, 1].
    let q = |y: T| one + lam * y + mu * y * y;
    let mut ok = q(T::zero()) > T::zero() && q(one) > T::zero();
    if mu != T::zero() {
        let y = -lam / (T::lit(2.0) * mu);
        if y > T::zero() && y < one {
            ok = ok && q(y) > T::zero();
        }
    }
    ok
}

/// Largest second-difference residual of the ODE along `sol` over two
/// time units, evaluated in `f64`.
fn ode_defect<T: Real>(sol: &CnSolution<T>, a: T, b: T, c: T) -> f64 {
    let (x0, lam, mu, w, m) = (
        sol.x0.as_f64(),
        sol.lambda.as_f64(),
        sol.mu.as_f64(),
        sol.omega.as_f64(),
        sol.m.as_f64(),
    );
    let (a, b, c) = (a.as_f64(), b.as_f64(), c.as_f64());
    let conv = sol.convention;
    let x = |t: f64| {
        let cn = jacobi_with(w.sqrt() * t, m, conv).cn;
        x0 * (1.0 + lam + mu).sqrt() * cn / (1.0 + lam * cn * cn + mu * cn.powi(4)).sqrt()
    };
    let h = 1e-3;
    (0..64)
        .map(|i| {
            let t = 0.05 + i as f64 * 2.0 / 64.0;
            let xt = x(t);
            let acc = (x(t + h) - 2.0 * xt + x(t - h)) / (h * h);
            (acc - a * xt + b * xt.powi(3) + c * xt.powi(5)).abs()
        })
        .fold(0.0, f64::max)
}

/// Finds admissible ansatz coefficients for `x(0) = x0, x'(0) = 0`.
///
/// Roots are sought from the closed-form families and a coarse grid, then
/// polished. Among admissible roots one with `m` in `[0, 1]` is preferred,
/// then the one with the smallest `|lambda| + |mu|`.
pub fn solve_cn_coefficients<T: Real>(a: T, b: T, c: T, x0: T) -> Result<CnSolution<T>> {
    for (name, v) in [("a", a), ("b", b), ("c", c), ("x0", x0)] {
        if !v.is_finite() {
            return Err(Error::invalid(name, "must be finite"));
        }
    }
    if x0 == T::zero() {
        return Err(Error::invalid("x0", "the ansatz needs a nonzero amplitude"));
    }
    let x2 = x0 * x0;
    let scale = T::one().max(a.abs()).max((b * x2).abs()).max((c * x2 * x2).abs());
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(256.0)) * scale;
    let target = T::lit(1e-12).max(T::epsilon() * T::lit(64.0)) * scale;

    let mut seeds: Vec<[T; 4]> = closed_form_branches(a, b, c, x0)
        .into_iter()
        .map(|br| [br.solution.lambda, br.solution.mu, br.solution.omega, br.solution.m])
        .collect();
    for &lam in &[-0.6, -0.2, 0.0, 0.3, 1.0] {
        for &mu in &[-0.05, 0.0, 0.05] {
            for &w in &[0.3, 1.0, 3.0] {
                for &m in &[-0.5, 0.05, 0.5, 0.95, 1.5] {
                    seeds.push([T::lit(lam), T::lit(mu), T::lit(w) * scale, T::lit(m)]);
                }
            }
        }
    }

    let ode_tol = 1e-5 * scale.as_f64() * x0.abs().as_f64().max(1.0);
    let mut best_residual = T::infinity();
    let mut chosen: Option<(CnSolution<T>, (bool, T))> = None;
    for seed in seeds {
        let (p, r) = polish(a, b, c, x0, seed, target);
        if r < best_residual {
            best_residual = r;
        }
        if r > tol || !admissible(&p) {
            continue;
        }
        let Some(sol) = checked_solution(x0, p, a, b, c, ode_tol) else {
            continue;
        };
        let key = (
            !(p[3] >= T::zero() && p[3] <= T::one()),
            p[0].abs() + p[1].abs(),
        );
        let better = match &chosen {
            None => true,
            Some((_, k)) => key.0 < k.0 || (key.0 == k.0 && key.1 < k.1 - tol),
        };
        if better {
            chosen = Some((sol, key));
        }
    }
    chosen.map(|(sol, _)| sol).ok_or(Error::NoRoot {
        best_residual: best_residual.as_f64(),
    })
}

/// Accepts a coefficient root only if the ansatz actually solves the ODE,
/// trying the parameter convention first and the modulus one second.
fn checked_solution<T: Real>(x0: T, p: [T; 4], a: T, b: T, c: T, ode_tol: f64) -> Option<CnSolution<T>> {
    let sol = CnSolution {
        x0,
        lambda: p[0],
        mu: p[1],
        omega: p[2],
        m: p[3],
        convention: EllipticConvention::Parameter,
    };
    if ode_defect(&sol, a, b, c) <= ode_tol {
        return Some(sol);
    }
    let alt = CnSolution {
        convention: EllipticConvention::Modulus,
        m: sol.m.abs().sqrt(),
        ..sol
    };
    (sol.m >= T::zero() && ode_defect(&alt, a, b, c) <= ode_tol).then_some(alt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HomoclinicKind {
    Sech,
    Tanh,
}

/// Sign choice in the square root that fixes `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootBranch {
    Plus,
    Minus,
}

impl RootBranch {
    fn sign<T: Real>(self) -> T {
        match self {
            RootBranch::Plus => T::one(),
            RootBranch::Minus => -T::one(),
        }
    }
}

/// `x(t) = A f(sqrt(k) t) / sqrt(1 + lambda f^2)` with `f = sech` or `tanh`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HomoclinicOrbit<T: Real> {
    pub kind: HomoclinicKind,
    pub x0: T,
    pub lambda: T,
    pub k: T,
    /// `A = x0 sqrt(1 + lambda)`.
    pub amplitude: T,
}

/// Orbit parameters from the closed-form choices for `k`, `lambda`, `x0`.
pub fn homoclinic_orbit<T: Real>(a: T, b: T, c: T, kind: HomoclinicKind, branch: RootBranch) -> Result<HomoclinicOrbit<T>> {
    let n = |v: f64| T::lit(v);
    if c == T::zero() {
        return Err(Error::ZeroQuintic("the closed-form orbit amplitude"));
    }
    let sg: T = branch.sign();
    let (y, lambda, k) = match kind {
        HomoclinicKind::Tanh => {
            let disc = b * b + n(4.0) * a * c;
            if !(disc > T::zero()) {
                return Err(Error::Guard(format!("b^2 + 4ac = {disc} must be positive")));
            }
            let y = (-b + sg * disc.sqrt()) / (n(2.0) * c);
            if !(y > T::zero()) {
                return Err(Error::Guard(format!("x0^2 = (-b +- sqrt(b^2+4ac))/(2c) = {y} must be positive")));
            }
            let den = b + n(2.0) * c * y;
            if den == T::zero() {
                return Err(Error::Guard("b + 2c x0^2 vanishes".into()));
            }
            let k = (-b * y - n(2.0) * c * y * y) / n(2.0);
            (y, -n(2.0) * c * y / (n(3.0) * den), k)
        }
        HomoclinicKind::Sech => {
            let disc = n(48.0) * a * c + n(9.0) * b * b;
            if !(disc > T::zero()) {
                return Err(Error::Guard(format!("48ac + 9b^2 = {disc} must be positive")));
            }
            let y = (-n(3.0) * b + sg * disc.sqrt()) / (n(4.0) * c);
            if !(y > T::zero()) {
                return Err(Error::Guard(format!("x0^2 = (-3b +- sqrt(48ac+9b^2))/(4c) = {y} must be positive")));
            }
            let den = n(4.0) * a - b * y;
            if den == T::zero() {
                return Err(Error::Guard("4a - b x0^2 vanishes".into()));
            }
            (y, (b * y - n(2.0) * a) / den, a)
        }
    };
    if !(k > T::zero()) {
        return Err(Error::Guard(format!("k = {k} must be positive")));
    }
    if !(T::one() + lambda > T::zero()) {
        return Err(Error::Guard(format!("1 + lambda = {} must be positive", T::one() + lambda)));
    }
    let x0 = y.sqrt();
    Ok(HomoclinicOrbit {
        kind,
        x0,
        lambda,
        k,
        amplitude: x0 * (T::one() + lambda).sqrt(),
    })
}

/// `(x(t), x'(t))` on the orbit.
pub fn eval_homoclinic<T: Real>(orbit: &HomoclinicOrbit<T>, t: T) -> (T, T) {
    let one = T::one();
    let sk = orbit.k.sqrt();
    let s = sk * t;
    let th = s.tanh();
    let sech = one / s.cosh();
    let (a, lam) = (orbit.amplitude, orbit.lambda);
    match orbit.kind {
        HomoclinicKind::Sech => {
            let d = one + lam * sech * sech;
            let x = a * sech / d.sqrt();
            let v = -a * sk * th * sech / (d * d.sqrt());
            (x, v)
        }
        HomoclinicKind::Tanh => {
            let d = one + lam * th * th;
            let x = a * th / d.sqrt();
            let v = a * sk * sech * sech / (d * d.sqrt());
            (x, v)
        }
    }
}

/// Solution value `x(t)` of the cn ansatz with explicit coefficients.
pub fn eval_cn_solution<T: Real>(sol: &CnSolution<T>, t: T) -> T {
    sol.eval(t)
}
