//! Degenerate stationary phase for the phases `±χ₀χ₁^k`.
//!
//! Amplitudes are `a(t, r) = Σ_l r^l b_l(t)`, each `b_l` given by samples
//! on a uniform grid and read as its piecewise-linear interpolant, so
//! `∂_r^j a(·, 0) = j!·b_j` exactly. With
//! `F(f)(τ) = ∫ f(t) e^{−itτ} dt`, the plus phase gives
//!
//! ```text
//! ∫₀^∞ ĝ(−λr^k, r) dr ∼ Σ_j λ^{−(j+1)/k} c_j,   c_j = (1/k) ∫₀^∞ u^{(j+1−k)/k} b̂_j(−u) du,
//! ```
//!
//! and the minus phase replaces `b̂_j(−u)` by `b̂_j(u)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LineFit};
use crate::quad;

/// Largest `λ` at which the 2-D oscillatory quadrature is run.
pub const BRUTE_2D_MAX_LAMBDA: f64 = 100.0;

/// Half-periods of the transform integrated before switching to the
/// analytic tail in `cj_coefficient`.
const CJ_HALF_PERIODS: usize = 64;
const MAX_BRUTE_PANELS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// `+χ₀χ₁^k`: the amplitude transform is read at `τ = −λr^k`.
    Plus,
    /// `−χ₀χ₁^k`: read at `τ = +λr^k`.
    Minus,
}

impl Phase {
    fn tau_sign(self) -> f64 {
        match self {
            Phase::Plus => -1.0,
            Phase::Minus => 1.0,
        }
    }
}

/// Samples `b(t₀ + m·dt)`, `m = 0..len`, vanishing at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledProfile {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
    /// `(s, w)` with `b̂(τ) = τ^{-2} Σ w e^{−iτs}`.
    kinks: Vec<(f64, f64)>,
}

impl SampledProfile {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<SampledProfile> {
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(Error::Domain(format!("profile grid needs finite t0 and dt > 0 (t0 = {t0}, dt = {dt})")));
        }
        if values.len() < 2 {
            return Err(Error::Structural("profile needs at least two samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("profile samples must be finite".into()));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            return Err(Error::Structural("profile must vanish at both ends of its grid".into()));
        }
        let n = values.len();
        let at = |i: isize| if i < 0 || i as usize >= n { 0.0 } else { values[i as usize] };
        let raw: Vec<(f64, f64)> = (0..n as isize)
            .map(|j| (t0 + j as f64 * dt, (2.0 * at(j) - at(j - 1) - at(j + 1)) / dt))
            .collect();
        let wmax = raw.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
        let kinks = raw.into_iter().filter(|p| p.1.abs() > 1e-13 * wmax).collect();
        Ok(SampledProfile { t0, dt, values, kinks })
    }

    /// Samples of `f` on `a, a + dt, …, b`; `b − a` must be a multiple of `dt`.
    pub fn from_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, dt: f64) -> Result<SampledProfile> {
        if !(b > a) || !(dt > 0.0) {
            return Err(Error::Domain(format!("profile interval [{a}, {b}] with step {dt}")));
        }
        let n = ((b - a) / dt).round();
        if (n * dt - (b - a)).abs() > 1e-9 * (b - a) {
            return Err(Error::Domain(format!("interval length {} is not a multiple of dt = {dt}", b - a)));
        }
        let n = n as usize;
        let mut values: Vec<f64> = (0..=n).map(|i| f(a + i as f64 * dt)).collect();
        values[0] = 0.0;
        values[n] = 0.0;
        SampledProfile::new(a, dt, values)
    }

    /// `max(1 − |t|/T, 0)`, whose transform is `T·sinc²(Tτ/2)`.
    pub fn triangle(half_width: f64, dt: f64) -> Result<SampledProfile> {
        SampledProfile::from_fn(|t| (1.0 - t.abs() / half_width).max(0.0), -half_width, half_width, dt)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + (self.values.len() - 1) as f64 * self.dt
    }

    /// Largest `|t|` at which the interpolant has a kink; this sets the
    /// oscillation rate of `b̂`.
    pub fn kink_extent(&self) -> f64 {
        self.kinks.iter().fold(0.0, |m, p| m.max(p.0.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Piecewise-linear interpolant.
    pub fn eval(&self, t: f64) -> f64 {
        let x = (t - self.t0) / self.dt;
        if !(x >= 0.0) || x > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let f = x - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }

    /// `b(−t)`.
    pub fn reflected(&self) -> SampledProfile {
        let values: Vec<f64> = self.values.iter().rev().cloned().collect();
        SampledProfile::new(-self.t_end(), self.dt, values).expect("reflection keeps a valid profile")
    }

    /// `b(t − c)`.
    pub fn shifted(&self, c: f64) -> SampledProfile {
        SampledProfile::new(self.t0 + c, self.dt, self.values.clone()).expect("shift keeps a valid profile")
    }

    pub fn scaled(&self, s: f64) -> SampledProfile {
        SampledProfile::new(self.t0, self.dt, self.values.iter().map(|v| s * v).collect()).expect("scaling keeps a valid profile")
    }

    /// `α·p + β·q` on a common grid.
    pub fn lin_comb(alpha: f64, p: &SampledProfile, beta: f64, q: &SampledProfile) -> Result<SampledProfile> {
        if p.dt != q.dt || p.values.len() != q.values.len() || (p.t0 - q.t0).abs() > 1e-12 * p.dt {
            return Err(Error::Structural("linear combination needs profiles on the same grid".into()));
        }
        let values = p.values.iter().zip(&q.values).map(|(a, b)| alpha * a + beta * b).collect();
        SampledProfile::new(p.t0, p.dt, values)
    }

    /// Transform of the interpolant,
    /// `b̂(τ) = dt·sinc²(τ dt/2)·Σ b_m e^{−iτ t_m}`; for large `|τ|` the
    /// equivalent kink sum `τ^{-2} Σ w_s e^{−iτ s}` is used.
    pub fn hat(&self, tau: f64) -> Complex64 {
        let kink_mass: f64 = self.kinks.iter().map(|p| p.1.abs()).sum();
        let mass: f64 = self.dt * self.values.iter().map(|v| v.abs()).sum::<f64>();
        if mass == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if tau * tau * mass >= kink_mass && tau != 0.0 {
            let s: Complex64 = self.kinks.iter().map(|&(s, w)| Complex64::from_polar(w, -tau * s)).sum();
            return s / (tau * tau);
        }
        self.hat_direct(tau)
    }

    fn hat_direct(&self, tau: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, -tau * self.dt);
        let mut acc = Complex64::new(0.0, 0.0);
        for v in self.values.iter().rev() {
            acc = acc * z + v;
        }
        let x = 0.5 * tau * self.dt;
        let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
        acc * Complex64::from_polar(self.dt * sinc * sinc, -tau * self.t0)
    }
}

/// Fails if the sample spectrum has power at the Nyquist frequency above
/// `1e-10` of its peak.
pub fn check_resolution(p: &SampledProfile) -> Result<()> {
    let len = (4 * p.values.len()).next_power_of_two();
    let mut buf: Vec<Complex64> = p.values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    FftPlanner::<f64>::new().plan_fft_forward(len).process(&mut buf);
    let peak = buf.iter().fold(0.0f64, |m, c| m.max(c.norm_sqr()));
    let nyq = buf[len / 2].norm_sqr();
    if peak > 0.0 && nyq > 1e-10 * peak {
        return Err(Error::Resolution(format!(
            "profile spectrum not resolved: Nyquist power {:.3e} of peak (grid dt = {})",
            nyq / peak,
            p.dt
        )));
    }
    Ok(())
}

/// `a(t, r) = Σ_l r^l b_l(t)` for `0 ≤ r ≤ r_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct OscAmplitude {
    k: usize,
    terms: Vec<(usize, SampledProfile)>,
    r_max: f64,
}

impl OscAmplitude {
    pub fn new(k: usize, mut terms: Vec<(usize, SampledProfile)>, r_max: f64) -> Result<OscAmplitude> {
        if k <= 2 {
            return Err(Error::Domain(format!("phase degree k = {k} must exceed 2")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::Domain(format!("r_max = {r_max} must be positive")));
        }
        terms.sort_by_key(|t| t.0);
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Structural("amplitude r-exponents must be distinct".into()));
        }
        Ok(OscAmplitude { k, terms, r_max })
    }

    /// `b(t)·r^{l₀}(1 − r/r_max)` with `b` the triangle of half-width `T`.
    pub fn triangle_cap(k: usize, l0: usize, half_width: f64, dt: f64, r_max: f64) -> Result<OscAmplitude> {
        let tri = SampledProfile::triangle(half_width, dt)?;
        let cap = tri.scaled(-1.0 / r_max);
        OscAmplitude::new(k, vec![(l0, tri), (l0 + 1, cap)], r_max)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn terms(&self) -> &[(usize, SampledProfile)] {
        &self.terms
    }

    pub fn term(&self, l: usize) -> Option<&SampledProfile> {
        self.terms.iter().find(|t| t.0 == l).map(|t| &t.1)
    }

    /// Smallest `l` with a non-zero profile.
    pub fn min_exponent(&self) -> Option<usize> {
        self.terms.iter().find(|t| !t.1.is_zero()).map(|t| t.0)
    }

    pub fn eval(&self, t: f64, r: f64) -> f64 {
        self.terms.iter().map(|(l, b)| r.powi(*l as i32) * b.eval(t)).sum()
    }

    /// `a(−t, r)`.
    pub fn reflected(&self) -> OscAmplitude {
        let terms = self.terms.iter().map(|(l, b)| (*l, b.reflected())).collect();
        OscAmplitude { k: self.k, terms, r_max: self.r_max }
    }

    /// `α·a + β·a′`; shared exponents need a common grid.
    pub fn lin_comb(alpha: f64, a: &OscAmplitude, beta: f64, b: &OscAmplitude) -> Result<OscAmplitude> {
        if a.k != b.k || a.r_max != b.r_max {
            return Err(Error::Structural("linear combination needs equal k and r_max".into()));
        }
        let mut terms = Vec::new();
        for (l, p) in &a.terms {
            match b.term(*l) {
                Some(q) => terms.push((*l, SampledProfile::lin_comb(alpha, p, beta, q)?)),
                None => terms.push((*l, p.scaled(alpha))),
            }
        }
        for (l, q) in &b.terms {
            if a.term(*l).is_none() {
                terms.push((*l, q.scaled(beta)));
            }
        }
        OscAmplitude::new(a.k, terms, a.r_max)
    }
}

/// `ĝ(τ, r) = Σ_l r^l b̂_l(τ)` term by term.
#[derive(Clone, Debug)]
pub struct FourierTerm {
    pub l: usize,
    profile: SampledProfile,
}

impl FourierTerm {
    pub fn eval(&self, tau: f64) -> Complex64 {
        self.profile.hat(tau)
    }

    pub fn sample(&self, taus: &[f64]) -> Vec<Complex64> {
        taus.iter().map(|&t| self.eval(t)).collect()
    }
}

pub fn partial_fourier(a: &OscAmplitude) -> Result<Vec<FourierTerm>> {
    a.terms
        .iter()
        .map(|(l, b)| {
            check_resolution(b)?;
            Ok(FourierTerm { l: *l, profile: b.clone() })
        })
        .collect()
}

/// `c_j(a)` for the given phase.
pub fn cj_coefficient(a: &OscAmplitude, j: usize, phase: Phase) -> Result<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let Some(b) = a.term(j) else { return Ok(zero) };
    check_resolution(b)?;
    let omega = b.kink_extent();
    if b.is_zero() {
        return Ok(zero);
    }
    let k = a.k as f64;
    let alpha = (j as f64 + 1.0 - k) / k;
    if alpha >= 1.0 {
        return Err(Error::Domain(format!("c_{j} for k = {} diverges at infinity (exponent {alpha})", a.k)));
    }
    let sg = phase.tau_sign();
    let mass = b.dt * b.values.iter().map(|v| v.abs()).sum::<f64>();
    let tol = 1e-14 * mass;
    // a profile whose only kink is at t = 0 still oscillates on the grid scale
    let seg = PI / omega.max(b.dt);
    let f = |u: f64| b.hat(sg * u);

    let head = quad::power_weighted(f, 0.0, seg, alpha, tol)?.value;
    let body: Vec<Complex64> = (1..CJ_HALF_PERIODS)
        .into_par_iter()
        .map(|m| {
            let (lo, hi) = (m as f64 * seg, (m + 1) as f64 * seg);
            quad::adaptive(|u: f64| f(u) * u.powf(alpha), lo, hi, tol / CJ_HALF_PERIODS as f64, 1e-14, 2000).map(|e| e.value)
        })
        .collect::<Result<_>>()?;
    let l = CJ_HALF_PERIODS as f64 * seg;
    let mut tail = zero;
    for &(s, w) in &b.kinks {
        tail += w * quad::tail_power_exp(alpha, 0.0, -sg * s, l, tol)?;
    }
    Ok((head + body.into_iter().sum::<Complex64>() + tail) / k)
}

/// `c_0, …, c_N` and the powers `−(j+1)/k` they multiply.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionResult {
    pub k: usize,
    pub phase: Phase,
    pub truncation: usize,
    pub coefficients: Vec<Complex64>,
    pub lambda_powers: Vec<f64>,
}

impl ExpansionResult {
    pub fn eval(&self, lambda: f64) -> Complex64 {
        self.coefficients.iter().zip(&self.lambda_powers).map(|(c, p)| c * lambda.powf(*p)).sum()
    }
}

pub fn expansion(a: &OscAmplitude, n: usize, phase: Phase) -> Result<ExpansionResult> {
    let coefficients = (0..=n).into_par_iter().map(|j| cj_coefficient(a, j, phase)).collect::<Result<Vec<_>>>()?;
    let lambda_powers = (0..=n).map(|j| -((j + 1) as f64) / a.k as f64).collect();
    Ok(ExpansionResult { k: a.k, phase, truncation: n, coefficients, lambda_powers })
}

/// `Σ_{j≤N} λ^{−(j+1)/k} c_j(a)`.
pub fn expansion_eval(a: &OscAmplitude, lambda: f64, n: usize, phase: Phase) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("λ = {lambda} must be positive")));
    }
    Ok(expansion(a, n, phase)?.eval(lambda))
}

/// `∫₀^{r_max} Σ_l r^l b̂_l(∓λr^k) dr` by adaptive quadrature on panels of
/// half an oscillation in `λr^k`. For `λ ≤ 100` the value is also computed
/// by [`brute_force_2d`] and the two must agree to `1e-6`.
pub fn brute_force(a: &OscAmplitude, lambda: f64, phase: Phase) -> Result<Complex64> {
    let v = brute_force_reduced(a, lambda, phase)?;
    if lambda <= BRUTE_2D_MAX_LAMBDA {
        let w = brute_force_2d(a, lambda, phase)?;
        if (v - w).norm() > 1e-6 * v.norm().max(1.0) {
            return Err(Error::Convergence(format!(
                "reduced and 2-D quadratures disagree at λ = {lambda}: {v} vs {w}"
            )));
        }
    }
    Ok(v)
}

fn brute_force_reduced(a: &OscAmplitude, lambda: f64, phase: Phase) -> Result<Complex64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("λ = {lambda} must be positive")));
    }
    let terms = partial_fourier(a)?;
    let omega = a.terms.iter().fold(0.0f64, |m, (_, b)| m.max(b.kink_extent()).max(b.dt));
    let mass: f64 = a.terms.iter().map(|(_, b)| b.dt * b.values.iter().map(|v| v.abs()).sum::<f64>()).sum();
    if mass == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let k = a.k as i32;
    let sg = phase.tau_sign();
    let f = |r: f64| -> Complex64 {
        let tau = sg * lambda * r.powi(k);
        terms.iter().map(|t| t.eval(tau) * r.powi(t.l as i32)).sum()
    };
    let breaks = oscillation_breaks(a, lambda, omega);
    let n = (breaks.len() - 1) as f64;
    let tol = 1e-16 * mass;
    let parts: Vec<Complex64> = breaks
        .par_windows(2)
        .map(|w| quad::adaptive(f, w[0], w[1], tol / n, 1e-12, 500).map(|e| e.value))
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().sum())
}

/// `r_m = (mπ/(Ωλ))^{1/k}` up to `r_max`, grouped so there are at most
/// `MAX_BRUTE_PANELS` panels.
fn oscillation_breaks(a: &OscAmplitude, lambda: f64, omega: f64) -> Vec<f64> {
    let k = a.k as f64;
    let m_max = (omega * lambda * a.r_max.powf(k) / PI).ceil() as usize;
    let step = m_max.div_ceil(MAX_BRUTE_PANELS).max(1);
    let mut breaks = vec![0.0];
    let mut m = step;
    while m < m_max {
        let r = (m as f64 * PI / (omega * lambda)).powf(1.0 / k);
        if r >= a.r_max {
            break;
        }
        breaks.push(r);
        m += step;
    }
    breaks.push(a.r_max);
    breaks
}

/// `∫₀^{r_max} ∫ a(t, r) e^{±iλ t r^k} dt dr` directly: Gauss–Legendre on
/// each linear piece of the profiles in `t`, adaptive in `r`. Only for
/// `λ ≤ 100`.
pub fn brute_force_2d(a: &OscAmplitude, lambda: f64, phase: Phase) -> Result<Complex64> {
    if !(lambda > 0.0 && lambda <= BRUTE_2D_MAX_LAMBDA) {
        return Err(Error::Domain(format!("2-D quadrature runs for 0 < λ ≤ {BRUTE_2D_MAX_LAMBDA}, got {lambda}")));
    }
    let k = a.k as i32;
    // e^{−itτ} with τ = ∓λr^k
    let sg = phase.tau_sign();
    let inner = |b: &SampledProfile, tau: f64| -> Complex64 {
        let npts = 8 + (tau.abs() * b.dt).ceil() as usize * 2;
        let rule = quad::gauss_legendre(npts);
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..b.values.len() - 1 {
            let (ya, yb) = (b.values[m], b.values[m + 1]);
            if ya == 0.0 && yb == 0.0 {
                continue;
            }
            let (ta, tb) = (b.t0 + m as f64 * b.dt, b.t0 + (m + 1) as f64 * b.dt);
            let (c, h) = (0.5 * (ta + tb), 0.5 * (tb - ta));
            for (x, w) in rule.0.iter().zip(&rule.1) {
                let t = c + h * x;
                let y = ya + (yb - ya) * 0.5 * (1.0 + x);
                acc += Complex64::from_polar(w * h * y, -t * tau);
            }
        }
        acc
    };
    let f = |r: f64| -> Complex64 {
        let tau = sg * lambda * r.powi(k);
        a.terms.iter().map(|(l, b)| inner(b, tau) * r.powi(*l as i32)).sum()
    };
    let omega = a.terms.iter().fold(0.0f64, |m, (_, b)| m.max(b.t0.abs()).max(b.t_end().abs()));
    if omega == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let breaks = oscillation_breaks(a, lambda, omega);
    Ok(quad::segmented(f, &breaks, 1e-13)?.value)
}

#[derive(Clone, Debug, Serialize)]
pub struct RemainderRow {
    pub lambda: f64,
    pub brute: Complex64,
    pub expansion: Complex64,
    pub abs_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RemainderReport {
    pub expansion: ExpansionResult,
    pub rows: Vec<RemainderRow>,
    /// Log-log fit of `abs_err` against `λ`.
    pub fit: LineFit,
    /// `−(N+2)/k`.
    pub expected_slope: f64,
}

/// `|brute_force − expansion_eval(N)|` over `lambdas` and its log-log slope.
pub fn remainder_check(a: &OscAmplitude, lambdas: &[f64], n: usize, phase: Phase) -> Result<RemainderReport> {
    let exp = expansion(a, n, phase)?;
    let rows = lambdas
        .par_iter()
        .map(|&lambda| {
            let brute = brute_force(a, lambda, phase)?;
            let expansion = exp.eval(lambda);
            Ok(RemainderRow { lambda, brute, expansion, abs_err: (brute - expansion).norm() })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = loglog_fit(&rows.iter().map(|r| (r.lambda, r.abs_err)).collect::<Vec<_>>())?;
    Ok(RemainderReport { expected_slope: -((n + 2) as f64) / a.k as f64, expansion: exp, rows, fit })
}
