//! One-dimensional quadrature: Gauss–Legendre rules, adaptive
//! Gauss–Kronrod (7/15), endpoint power substitution, and half-line tails of
//! `t^α (t+q)^{-2} e^{iωt}`.

use std::collections::{BinaryHeap, HashMap};
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar types the integrators accept.
pub trait Value: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Value for f64 {
    fn zero() -> f64 {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Value for Complex64 {
    fn zero() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// found by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&n) {
        return r.clone();
    }
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            z = 0.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        w[0] = 2.0;
    }
    let r = Arc::new((x, w));
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert(n, r.clone());
    r
}

/// Fixed Gauss–Legendre rule on `[a, b]`.
pub fn gl_fixed<T: Value>(f: impl Fn(f64) -> T, a: f64, b: f64, n: usize) -> T {
    let rule = gauss_legendre(n);
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    rule.0.iter().zip(&rule.1).fold(T::zero(), |acc, (&x, &w)| acc + f(c + r * x) * (w * r))
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod 7/15 panel: (estimate, error bound).
pub fn gk15<T: Value>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = r * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kron = kron * r;
    let gauss = gauss * r;
    (kron, (kron - gauss).magnitude())
}

#[derive(Clone, Copy, Debug)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive Gauss–Kronrod on `[a, b]`: bisects the worst panel
/// until the summed error is below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive<T: Value>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Estimate<T>> {
    if a == b {
        return Ok(Estimate { value: T::zero(), error: 0.0 });
    }
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut panels = 1;
    loop {
        let target = abs_tol.max(rel_tol * total.magnitude());
        if err <= target {
            return Ok(Estimate { value: total, error: err });
        }
        if panels >= max_panels {
            return Err(Error::Convergence(format!(
                "adaptive quadrature on [{a}, {b}]: error {err:.3e} above {target:.3e} after {panels} panels"
            )));
        }
        let worst = heap.pop().unwrap();
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            // panel can no longer be split in floating point
            return Err(Error::Convergence(format!(
                "adaptive quadrature on [{a}, {b}]: panel width underflow near {m}"
            )));
        }
        let (v1, e1) = gk15(&f, worst.a, m);
        let (v2, e2) = gk15(&f, m, worst.b);
        total = total - worst.value + v1 + v2;
        err = err - worst.error + e1 + e2;
        heap.push(Panel { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, error: e2 });
        panels += 1;
        // resum occasionally to keep the running totals honest
        if panels % 256 == 0 {
            total = heap.iter().fold(T::zero(), |s, p| s + p.value);
            err = heap.iter().map(|p| p.error).sum();
        }
    }
}

/// Adaptive quadrature over consecutive breakpoints, each panel to
/// `abs_tol / (breaks − 1)` or 1e-14 relative, whichever is looser.
pub fn segmented<T: Value>(f: impl Fn(f64) -> T + Sync, breaks: &[f64], abs_tol: f64) -> Result<Estimate<T>> {
    let n = breaks.len().saturating_sub(1).max(1) as f64;
    let mut total = T::zero();
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let e = adaptive(&f, w[0], w[1], abs_tol / n, 1e-14, 2000)?;
        total = total + e.value;
        err += e.error;
    }
    Ok(Estimate { value: total, error: err })
}

/// `∫_a^b (t − a)^α g(t) dt` for `α > −1`, via `t = a + v^{1/(1+α)}`,
/// which turns the weight into a constant.
pub fn power_weighted<T: Value>(g: impl Fn(f64) -> T, a: f64, b: f64, alpha: f64, abs_tol: f64) -> Result<Estimate<T>> {
    if alpha <= -1.0 {
        return Err(Error::Domain(format!("endpoint exponent {alpha} is not integrable")));
    }
    let p = 1.0 + alpha;
    let vmax = (b - a).powf(p);
    let e = adaptive(|v: f64| g(a + v.powf(1.0 / p)), 0.0, vmax, abs_tol * p, 0.0, 2000)?;
    Ok(Estimate { value: e.value * (1.0 / p), error: e.error / p })
}

/// `∫_L^∞ t^α (t+q)^{-2} e^{iωt} dt` for `α < 1` and `L > |q|`.
///
/// `ω = 0` is integrated in `u = 1/t`. For `|ω|L` large the asymptotic
/// integration-by-parts series is summed to its smallest term; otherwise
/// the stretch up to `|ω|t = 60` is integrated numerically first.
pub fn tail_power_exp(alpha: f64, q: f64, omega: f64, l: f64, abs_tol: f64) -> Result<Complex64> {
    if alpha >= 1.0 || l <= q.abs() {
        return Err(Error::Domain(format!("tail integral needs α < 1 and L > |q| (α = {alpha}, L = {l}, q = {q})")));
    }
    if omega == 0.0 {
        // t = 1/u: ∫_0^{1/L} u^{-α} (1 + q u)^{-2} du
        let e = power_weighted(|u: f64| (1.0 + q * u).powi(-2), 0.0, 1.0 / l, -alpha, abs_tol)?;
        return Ok(Complex64::new(e.value, 0.0));
    }
    const SWITCH: f64 = 60.0;
    let mut start = l;
    let mut head = Complex64::new(0.0, 0.0);
    if omega.abs() * l < SWITCH {
        let end = SWITCH / omega.abs();
        let period = std::f64::consts::PI / omega.abs();
        let mut breaks = vec![l];
        while *breaks.last().unwrap() < end {
            breaks.push((breaks.last().unwrap() + period).min(end));
        }
        let f = |t: f64| Complex64::from_polar(t.powf(alpha) / (t + q).powi(2), omega * t);
        head = segmented(f, &breaks, abs_tol)?.value;
        start = end;
    }
    // I = -e^{iωL} Σ_p (-1)^p f^{(p)}(L) / (iω)^{p+1},   f = t^α (t+q)^{-2}
    let derivs = power_times_inverse_square_derivs(alpha, q, start, 40);
    let iw = Complex64::new(0.0, omega);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut denom = iw;
    let mut last = f64::INFINITY;
    for (p, d) in derivs.iter().enumerate() {
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * *d / denom;
        if term.norm() > last {
            break;
        }
        last = term.norm();
        sum += term;
        if last < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
        denom *= iw;
    }
    Ok(head - Complex64::from_polar(1.0, omega * start) * sum)
}

/// `f^{(p)}(t)` for `f = t^α (t+q)^{-2}`, `p = 0..count`, by Leibniz.
fn power_times_inverse_square_derivs(alpha: f64, q: f64, t: f64, count: usize) -> Vec<f64> {
    let u: Vec<f64> = (0..count)
        .map(|p| (0..p).fold(1.0, |a, i| a * (alpha - i as f64)) * t.powf(alpha - p as f64))
        .collect();
    let v: Vec<f64> = (0..count)
        .map(|p| {
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            sign * (p as f64 + 1.0) * (1..=p).fold(1.0, |a, i| a * i as f64) * (t + q).powf(-2.0 - p as f64)
        })
        .collect();
    let mut out = vec![0.0; count];
    for p in 0..count {
        let mut binom = 1.0;
        let mut acc = 0.0;
        for j in 0..=p {
            acc += binom * u[j] * v[p - j];
            binom = binom * (p - j) as f64 / (j as f64 + 1.0);
        }
        out[p] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in [1, 2, 5, 12, 40] {
            let rule = gauss_legendre(n);
            let wsum: f64 = rule.1.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n = {n}");
            // degree 2n-1 monomial x^{2n-2} integrates to 2/(2n-1)
            let d = 2 * n - 2;
            let v = gl_fixed(|x: f64| x.powi(d as i32), -1.0, 1.0, n);
            assert!((v - 2.0 / (d as f64 + 1.0)).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn adaptive_smooth_and_peaked() {
        let e = adaptive(|x: f64| x.sin(), 0.0, PI, 1e-14, 0.0, 100).unwrap();
        assert!((e.value - 2.0).abs() < 1e-13);
        let e = adaptive(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10, 0.0, 1000).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((e.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = adaptive(|x: f64| (1.0 / x).sin() / x, 1e-12, 1.0, 1e-14, 0.0, 50);
        assert!(matches!(r, Err(Error::Convergence(_))));
    }

    #[test]
    fn power_weighted_beta_function() {
        // ∫_0^1 t^{-1/2} (1-t)^2 dt = B(1/2, 3) = 16/15
        let e = power_weighted(|t: f64| (1.0 - t).powi(2), 0.0, 1.0, -0.5, 1e-14).unwrap();
        assert!((e.value - 16.0 / 15.0).abs() < 1e-13);
    }

    #[test]
    fn tail_non_oscillatory() {
        // ∫_L^∞ t^{-2} dt = 1/L
        let v = tail_power_exp(0.0, 0.0, 0.0, 50.0, 1e-15).unwrap();
        assert!((v.re - 0.02).abs() < 1e-15);
        // ∫_L^∞ t^{-1/2}(t+1)^{-2} dt, checked against a long direct integral
        let v = tail_power_exp(-0.5, 1.0, 0.0, 10.0, 1e-15).unwrap();
        let direct = adaptive(|u: f64| { let t = 10.0 / u; t.powf(-0.5) / (t + 1.0).powi(2) * 10.0 / (u * u) }, 0.0, 1.0, 1e-15, 0.0, 500).unwrap();
        assert!((v.re - direct.value).abs() < 1e-13);
    }

    #[test]
    fn tail_oscillatory_matches_direct_sum() {
        // compare against a long segmented integral plus a crude remainder
        for &(alpha, q, omega, l) in &[(-0.5, 0.3, 1.0, 200.0), (0.25, 0.0, -2.5, 40.0), (-0.25, 0.0, 0.05, 100.0)] {
            let v = tail_power_exp(alpha, q, omega, l, 1e-15).unwrap();
            let far = 2.0e4;
            let period = PI / f64::abs(omega);
            let mut breaks = vec![l];
            while *breaks.last().unwrap() < far {
                breaks.push(breaks.last().unwrap() + period);
            }
            let end = *breaks.last().unwrap();
            let f = |t: f64| Complex64::from_polar(t.powf(alpha) / (t + q).powi(2), omega * t);
            let direct = segmented(f, &breaks, 1e-15).unwrap().value;
            let rest = tail_power_exp(alpha, q, omega, end, 1e-15).unwrap();
            assert!((v - direct - rest).norm() < 1e-14, "{alpha} {q} {omega}: {v} vs {}", direct + rest);
            // the far remainder itself is tiny, so this is a genuine check
            assert!(rest.norm() < 1e-7);
        }
    }
}
