//! Windowed spectral sums `γ(E_c, h)` and their leading-order prediction.
//!
//! Fourier convention: `φ̂(τ) = ∫ φ(t) e^{−itτ} dt`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::quad::{adaptive, power_weighted, segmented, tail_power_exp};
use crate::spectrum::{spectrum, BasisSize, ModelKind, OperatorModel, SpectrumResult, Window};
use crate::symbols::{sphere_integral, Extremum, SymbolModel};

/// Anything that can be paired against `t₊^α`.
pub trait Kernel: Sync {
    fn phi(&self, t: f64) -> f64;
    /// Half the shortest oscillation period of `φ`; sets the panel width.
    fn half_period(&self) -> f64;
    /// `∫_L^∞ φ(σt + p) t^α dt` with `σ = ±1` and `L > |p|`.
    fn tail(&self, alpha: f64, sigma: f64, p: f64, l: f64, tol: f64) -> Result<f64>;
}

#[derive(Clone, Debug)]
pub enum TestFunction {
    /// `φ̂(τ) = max(1 − |τ|/T, 0)`.
    Fejer { t: f64 },
    /// `φ̂(τ) = exp(−1/(1 − (τ/T)²))` on `(−T, T)`.
    Bump(Arc<BumpTable>),
    /// `φ(· − c)`.
    Shifted { inner: Box<TestFunction>, c: f64 },
    /// `φ(−·)`.
    Reflected(Box<TestFunction>),
    /// `Σ wᵢ φᵢ`.
    Combination(Vec<(f64, TestFunction)>),
}

pub fn fejer_phi(t: f64) -> Result<TestFunction> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("test-function support T = {t} must be positive")));
    }
    Ok(TestFunction::Fejer { t })
}

pub fn bump_phi(t: f64, quad_tol: f64) -> Result<TestFunction> {
    Ok(TestFunction::Bump(Arc::new(BumpTable::new(t, quad_tol)?)))
}

fn fejer(t_sup: f64, t: f64) -> f64 {
    let x = 0.5 * t_sup * t;
    let s = if x == 0.0 { 1.0 } else { x.sin() / x };
    t_sup / (2.0 * PI) * s * s
}

/// `φ` of the smooth bump, tabulated with its derivative on
/// `[0, 400/T]` and interpolated by cubic Hermite polynomials.
#[derive(Debug)]
pub struct BumpTable {
    t: f64,
    dt: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl BumpTable {
    const SPAN: f64 = 400.0;
    const STEP: f64 = 0.02;

    fn new(t: f64, quad_tol: f64) -> Result<BumpTable> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("test-function support T = {t} must be positive")));
        }
        if !(quad_tol > 0.0) {
            return Err(Error::Domain("bump quadrature tolerance must be positive".into()));
        }
        let dt = Self::STEP / t;
        let nodes = (Self::SPAN / Self::STEP) as usize + 1;
        let rows: Vec<(f64, f64)> = (0..nodes)
            .into_par_iter()
            .map(|i| {
                let s = i as f64 * dt;
                // φ(s) = (1/π)∫_0^T φ̂(τ) e^{isτ} dτ, real part; the imaginary part gives −φ'
                let e = adaptive(
                    |tau: f64| bump_hat(t, tau) * Complex64::new(0.0, s * tau).exp(),
                    0.0,
                    t,
                    quad_tol * PI,
                    0.0,
                    4000,
                )?;
                let d = adaptive(|tau: f64| tau * bump_hat(t, tau) * (s * tau).sin(), 0.0, t, quad_tol * PI, 0.0, 4000)?;
                Ok((e.value.re / PI, -d.value / PI))
            })
            .collect::<Result<_>>()?;
        let (values, slopes) = rows.into_iter().unzip();
        Ok(BumpTable { t, dt, values, slopes })
    }

    pub fn support(&self) -> f64 {
        self.t
    }

    /// End of the tabulated range; `φ` is taken as zero beyond it.
    pub fn extent(&self) -> f64 {
        self.dt * (self.values.len() - 1) as f64
    }

    pub fn eval(&self, t: f64) -> f64 {
        let a = t.abs();
        let x = a / self.dt;
        let i = x.floor() as usize;
        if i + 1 >= self.values.len() {
            return 0.0;
        }
        let u = x - i as f64;
        let (h00, h10) = ((1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u), u * (1.0 - u) * (1.0 - u));
        let (h01, h11) = (u * u * (3.0 - 2.0 * u), u * u * (u - 1.0));
        h00 * self.values[i] + h10 * self.dt * self.slopes[i] + h01 * self.values[i + 1] + h11 * self.dt * self.slopes[i + 1]
    }
}

fn bump_hat(t: f64, tau: f64) -> f64 {
    let u = tau / t;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

impl TestFunction {
    pub fn phi(&self, t: f64) -> f64 {
        match self {
            TestFunction::Fejer { t: ts } => fejer(*ts, t),
            TestFunction::Bump(b) => b.eval(t),
            TestFunction::Shifted { inner, c } => inner.phi(t - c),
            TestFunction::Reflected(inner) => inner.phi(-t),
            TestFunction::Combination(parts) => parts.iter().map(|(w, f)| w * f.phi(t)).sum(),
        }
    }

    pub fn phi_hat(&self, tau: f64) -> Complex64 {
        match self {
            TestFunction::Fejer { t } => Complex64::from((1.0 - tau.abs() / t).max(0.0)),
            TestFunction::Bump(b) => Complex64::from(bump_hat(b.t, tau)),
            TestFunction::Shifted { inner, c } => inner.phi_hat(tau) * Complex64::new(0.0, -c * tau).exp(),
            TestFunction::Reflected(inner) => inner.phi_hat(-tau),
            TestFunction::Combination(parts) => parts.iter().map(|(w, f)| *w * f.phi_hat(tau)).sum(),
        }
    }

    /// `T` with `supp φ̂ ⊂ [−T, T]`.
    pub fn support(&self) -> f64 {
        match self {
            TestFunction::Fejer { t } => *t,
            TestFunction::Bump(b) => b.t,
            TestFunction::Shifted { inner, .. } | TestFunction::Reflected(inner) => inner.support(),
            TestFunction::Combination(parts) => parts.iter().map(|(_, f)| f.support()).fold(0.0, f64::max),
        }
    }

    pub fn shifted(self, c: f64) -> TestFunction {
        TestFunction::Shifted { inner: Box::new(self), c }
    }

    pub fn reflected(self) -> TestFunction {
        TestFunction::Reflected(Box::new(self))
    }

    pub fn combination(parts: Vec<(f64, TestFunction)>) -> Result<TestFunction> {
        if parts.is_empty() {
            return Err(Error::Domain("empty test-function combination".into()));
        }
        Ok(TestFunction::Combination(parts))
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Fejer { t } => format!("fejer(T={t})"),
            TestFunction::Bump(b) => format!("bump(T={})", b.t),
            TestFunction::Shifted { inner, c } => format!("{}(t-{c})", inner.label()),
            TestFunction::Reflected(inner) => format!("{}(-t)", inner.label()),
            TestFunction::Combination(parts) => {
                let s: Vec<String> = parts.iter().map(|(w, f)| format!("{w}*{}", f.label())).collect();
                s.join(" + ")
            }
        }
    }
}

impl Kernel for TestFunction {
    fn phi(&self, t: f64) -> f64 {
        TestFunction::phi(self, t)
    }

    fn half_period(&self) -> f64 {
        PI / self.support()
    }

    fn tail(&self, alpha: f64, sigma: f64, p: f64, l: f64, tol: f64) -> Result<f64> {
        match self {
            TestFunction::Fejer { t } => {
                // φ(σt + p) = φ(t + σp) by evenness, and
                // φ(u) = (1 − cos Tu)/(πT u²)
                let q = sigma * p;
                let scale = PI * t;
                let mean = tail_power_exp(alpha, q, 0.0, l, 0.25 * tol * scale)?;
                let osc = tail_power_exp(alpha, q, *t, l, 0.25 * tol * scale)?;
                Ok((mean.re - (Complex64::new(0.0, t * q).exp() * osc).re) / scale)
            }
            TestFunction::Bump(b) => {
                let end = b.extent() + p.abs();
                if l >= end {
                    return Ok(0.0);
                }
                let breaks = panel_breaks(l, end, self.half_period());
                Ok(segmented(|s: f64| b.eval(sigma * s + p) * s.powf(alpha), &breaks, tol)?.value)
            }
            TestFunction::Shifted { inner, c } => inner.tail(alpha, sigma, p - c, l, tol),
            TestFunction::Reflected(inner) => inner.tail(alpha, -sigma, -p, l, tol),
            TestFunction::Combination(parts) => {
                let wsum: f64 = parts.iter().map(|(w, _)| w.abs()).sum::<f64>().max(1.0);
                parts.iter().map(|(w, f)| Ok(w * f.tail(alpha, sigma, p, l, tol / wsum)?)).sum()
            }
        }
    }
}

fn panel_breaks(a: f64, b: f64, width: f64) -> Vec<f64> {
    let m = ((b - a) / width).ceil().max(1.0) as usize;
    (0..=m).map(|i| if i == m { b } else { a + i as f64 * width }).collect()
}

/// `+1` pairs against `t₊^α`, `−1` against `t₋^α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn for_extremum(e: Extremum) -> Side {
        match e {
            Extremum::Minimum => Side::Plus,
            Extremum::Maximum => Side::Minus,
        }
    }

    fn sigma(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// `∫_0^∞ φ(±t + p₁) t^α dt` for `α ∈ (−1, 0]`.
///
/// The first panel `[0, π/T]` absorbs `t^α` by a power substitution;
/// the remainder up to `|p₁| + 64π/T` is integrated panel by panel and
/// the rest is left to [`Kernel::tail`].
pub fn pairing(f: &impl Kernel, p1: f64, alpha: f64, side: Side, tol: f64) -> Result<f64> {
    if !(alpha > -1.0 && alpha <= 0.0) {
        return Err(Error::Domain(format!("pairing exponent α = {alpha} outside (−1, 0]")));
    }
    if !(tol > 0.0) || !p1.is_finite() {
        return Err(Error::Domain("pairing needs finite p₁ and positive tolerance".into()));
    }
    let sigma = side.sigma();
    let hp = f.half_period();
    let l = p1.abs() + 64.0 * hp;
    let g = |t: f64| f.phi(sigma * t + p1);
    let head = power_weighted(g, 0.0, hp, alpha, 0.25 * tol)?.value;
    let body = segmented(|t: f64| g(t) * t.powf(alpha), &panel_breaks(hp, l, hp), 0.25 * tol)?.value;
    let tail = f.tail(alpha, sigma, p1, l, 0.5 * tol)?;
    Ok(head + body + tail)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction {
    /// Leading coefficient `Λ₀`.
    pub lambda0: f64,
    /// `2n/k − n`.
    pub exponent: f64,
    pub pairing: f64,
    /// `∫_{S^{2n−1}} |𝔭_k|^{−2n/k}`.
    pub sphere_integral: f64,
}

impl Prediction {
    pub fn at(&self, h: f64) -> f64 {
        h.powf(self.exponent) * self.lambda0
    }
}

/// `Λ₀ = (1/k)·⟨φ(t + p₁), t_±^{(2n−k)/k}⟩·(2π)^{−n}·∫_{S^{2n−1}} |𝔭_k|^{−2n/k}`.
pub fn lambda0_predict(s: &SymbolModel, f: &impl Kernel, tol: f64) -> Result<Prediction> {
    let (n, k) = (s.n() as f64, s.k() as f64);
    let alpha = (2.0 * n - k) / k;
    let pair = pairing(f, s.p1_at_z0(), alpha, Side::for_extremum(s.extremum()), tol)?;
    let sphere = sphere_integral(s, tol)?;
    Ok(Prediction {
        lambda0: pair * sphere / (k * (2.0 * PI).powf(n)),
        exponent: 2.0 * n / k - n,
        pairing: pair,
        sphere_integral: sphere,
    })
}

/// `Σ_{|λ_j − E_c| ≤ ε} mult_j·φ((λ_j − E_c)/h)`.
pub fn gamma_sum(spec: &SpectrumResult, ec: f64, h: f64, f: &impl Kernel, eps: f64) -> Result<f64> {
    if !spec.converged {
        return Err(Error::Convergence(format!("spectrum at h = {} is not converged", spec.h)));
    }
    let slack = 1e-12 * eps.abs().max(1.0);
    if spec.window.lo > ec - eps + slack || spec.window.hi < ec + eps - slack {
        return Err(Error::Domain(format!(
            "window [{}, {}] does not cover [E_c − ε, E_c + ε] = [{}, {}]",
            spec.window.lo,
            spec.window.hi,
            ec - eps,
            ec + eps
        )));
    }
    let terms = spec
        .eigenvalues
        .iter()
        .zip(&spec.multiplicities)
        .filter(|(l, _)| (*l - ec).abs() <= eps)
        .map(|(l, &m)| m as f64 * f.phi((l - ec) / h));
    Ok(neumaier(terms))
}

fn neumaier(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

/// Largest `ε` for which every periodic orbit in `|p₀ − E_c| ≤ ε`
/// has period above `T`.
///
/// `(|z|²)^m` at energy `E` has period `π/(m E^{(m−1)/m})`; for a
/// one-degree-of-freedom homogeneous `𝔭_k` the period is
/// `(I_k/k)·E^{−(k−2)/k}` with `I_k = ∫_{S¹} |𝔭_k|^{−2/k}`. Higher-degree
/// components are ignored.
pub fn period_protection_bound(model: &OperatorModel, t: f64) -> Result<f64> {
    match model.kind() {
        ModelKind::OscPower { m, .. } => {
            let m = *m as f64;
            Ok((PI / (m * t)).powf(m / (m - 1.0)))
        }
        ModelKind::PolySymbol(s) => {
            if s.n() != 1 {
                return Err(Error::Domain("period protection is only available for n = 1 polynomial symbols".into()));
            }
            let k = s.k() as f64;
            let ik = sphere_integral(s, 1e-12)?;
            if s.k() == 2 {
                return Ok(if ik / k > t { f64::INFINITY } else { 0.0 });
            }
            Ok((ik / (k * t)).powf(k / (k - 2.0)))
        }
    }
}

pub fn check_period_protection(model: &OperatorModel, f: &TestFunction, eps: f64) -> Result<()> {
    let t = f.support();
    let bound = period_protection_bound(model, t)?;
    if eps < bound {
        Ok(())
    } else {
        Err(Error::Hypothesis {
            hypothesis: "period protection",
            detail: format!("window half-width ε = {eps} must be below {bound:.6} for test-function support T = {t}"),
            direction: None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `log γ`.
    pub residual: f64,
    pub points: usize,
    /// `h` values dropped because `γ ≤ 0` or not finite.
    pub excluded: Vec<f64>,
}

/// Least squares of `log γ` against `log h`.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<ExponentFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for &(h, g) in pairs {
        if h > 0.0 && g > 0.0 && g.is_finite() {
            xs.push(h.ln());
            ys.push(g.ln());
        } else {
            excluded.push(h);
        }
    }
    let f = line_fit(&xs, &ys)?;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - f.slope * x - f.intercept).powi(2)).sum();
    Ok(ExponentFit {
        slope: f.slope,
        intercept: f.intercept,
        residual: (rss / xs.len() as f64).sqrt(),
        points: xs.len(),
        excluded,
    })
}

/// `n` log-spaced points from `start` to `stop`, both included.
pub fn log_grid(start: f64, stop: f64, n: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0) || n < 2 {
        return Err(Error::Domain(format!("log grid needs positive ends and ≥ 2 points ({start}, {stop}, {n})")));
    }
    let (a, b) = (start.ln(), stop.ln());
    Ok((0..n)
        .map(|i| match i {
            0 => start,
            _ if i == n - 1 => stop,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

/// 9 points `1e-2 → 1e-5` for closed-form spectra, 6 points
/// `1e-1 → 3e-3` for quantized symbols.
pub fn default_h_grid(model: &OperatorModel) -> Vec<f64> {
    match model.kind() {
        ModelKind::OscPower { .. } => log_grid(1e-2, 1e-5, 9),
        ModelKind::PolySymbol(_) => log_grid(1e-1, 3e-3, 6),
    }
    .expect("static grid")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub h: f64,
    pub gamma: Option<f64>,
    pub prediction: f64,
    pub ratio: Option<f64>,
    #[serde(rename = "basis_N")]
    pub basis_n: usize,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRun {
    pub test_function: String,
    pub eps: f64,
    pub prediction: Prediction,
    pub rows: Vec<TraceRow>,
    pub fit: Option<ExponentFit>,
    /// Why no fit was produced, if none was.
    pub fit_error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceSummary {
    pub slope: Option<f64>,
    pub slope_expected: f64,
    pub prefactor_ratio_at_min_h: Option<f64>,
}

impl TraceRun {
    pub fn summary(&self) -> TraceSummary {
        let at_min = self
            .rows
            .iter()
            .filter(|r| r.ratio.is_some())
            .min_by(|a, b| a.h.total_cmp(&b.h))
            .and_then(|r| r.ratio);
        TraceSummary {
            slope: self.fit.as_ref().map(|f| f.slope),
            slope_expected: self.prediction.exponent,
            prefactor_ratio_at_min_h: at_min,
        }
    }

    /// Header `h,gamma,prediction,ratio,basis_N,converged`; missing values
    /// are left empty.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let mut out = String::from("h,gamma,prediction,ratio,basis_N,converged\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:e},{},{:e},{},{},{}\n",
                r.h,
                opt(r.gamma),
                r.prediction,
                opt(r.ratio),
                r.basis_n,
                r.converged
            ));
        }
        out
    }
}

/// Computes `γ` over `h_grid` in parallel. A spectrum failure at one `h`
/// is recorded in that row and the row is left out of the fit.
pub fn run_trace(
    model: &OperatorModel,
    f: &TestFunction,
    eps: f64,
    h_grid: &[f64],
    basis: BasisSize,
    tol: f64,
) -> Result<TraceRun> {
    if h_grid.is_empty() || h_grid.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(Error::Domain("h grid must be non-empty and positive".into()));
    }
    check_period_protection(model, f, eps)?;
    let s = model.symbol()?;
    let prediction = lambda0_predict(&s, f, tol)?;
    let ec = model.ec();
    let window = Window::around(ec, eps)?;
    let rows: Vec<TraceRow> = h_grid
        .par_iter()
        .map(|&h| {
            let pred = prediction.at(h);
            let computed = spectrum(model, h, window, basis).and_then(|sp| Ok((gamma_sum(&sp, ec, h, f, eps)?, sp)));
            match computed {
                Ok((g, sp)) => TraceRow {
                    h,
                    gamma: Some(g),
                    prediction: pred,
                    ratio: Some(g / pred),
                    basis_n: sp.basis_n,
                    converged: true,
                    error: None,
                },
                Err(e) => TraceRow {
                    h,
                    gamma: None,
                    prediction: pred,
                    ratio: None,
                    basis_n: 0,
                    converged: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let pairs: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.gamma.map(|g| (r.h, g))).collect();
    let (fit, fit_error) = match fit_exponent(&pairs) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(TraceRun { test_function: f.label(), eps, prediction, rows, fit, fit_error })
}
