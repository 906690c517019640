//! Eigenvalues of the model operators.
//!
//! Oscillator powers `±(|x|² + |ξ|²)^m` have closed-form spectra. Other
//! polynomial symbols (one degree of freedom) are Weyl-quantized in the
//! Hermite basis, where `X` and `P` are tridiagonal, so every monomial
//! becomes a band matrix. Matrices are exact compressions of the infinite
//! ones: products are formed on the full basis and truncated afterwards.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::basis::binomial;
use crate::linalg::{eigenvalues_hermitian, BandMatrix, CMatrix, Matrix};
use crate::symbols::{Extremum, SymbolModel};

/// Largest basis size for the banded (real, parity-split) path.
pub const MAX_BASIS: usize = 8192;
/// Largest basis size for the dense complex Hermitian path.
pub const MAX_DENSE_BASIS: usize = 2048;
/// Fraction of the basis whose eigenvalues (counted from the extremum)
/// are trusted.
pub const TRUSTED_FRACTION: f64 = 0.8;
/// Relative tolerance (in units of the window half-width) of the
/// basis-doubling test.
pub const DOUBLING_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    /// `±(|x|² + |ξ|²)^m`.
    OscPower { m: usize, extremum: Extremum },
    PolySymbol(SymbolModel),
}

/// `Op_h^w(p₀) + c·h`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorModel {
    kind: ModelKind,
    n: usize,
    p1_shift: f64,
}

impl OperatorModel {
    pub fn osc_power(n: usize, m: usize, extremum: Extremum) -> Result<OperatorModel> {
        if m < 2 {
            return Err(Error::Domain(format!("oscillator power m = {m} must be at least 2")));
        }
        if n == 0 || n > 2 {
            return Err(Error::Domain(format!("n = {n} unsupported (1 or 2 degrees of freedom)")));
        }
        Ok(OperatorModel { kind: ModelKind::OscPower { m, extremum }, n, p1_shift: 0.0 })
    }

    /// The shift is taken from the symbol's `p₁(z₀)`.
    pub fn poly(s: SymbolModel) -> OperatorModel {
        let (n, c) = (s.n(), s.p1_at_z0());
        OperatorModel { kind: ModelKind::PolySymbol(s), n, p1_shift: c }
    }

    pub fn with_p1_shift(&self, c: f64) -> OperatorModel {
        let mut m = self.clone();
        m.p1_shift = c;
        if let ModelKind::PolySymbol(s) = &mut m.kind {
            *s = s.with_p1(c);
        }
        m
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p1_shift(&self) -> f64 {
        self.p1_shift
    }

    pub fn ec(&self) -> f64 {
        match &self.kind {
            ModelKind::OscPower { .. } => 0.0,
            ModelKind::PolySymbol(s) => s.ec(),
        }
    }

    pub fn extremum(&self) -> Extremum {
        match &self.kind {
            ModelKind::OscPower { extremum, .. } => *extremum,
            ModelKind::PolySymbol(s) => s.extremum(),
        }
    }

    pub fn k(&self) -> usize {
        match &self.kind {
            ModelKind::OscPower { m, .. } => 2 * m,
            ModelKind::PolySymbol(s) => s.k(),
        }
    }

    /// The classical model with `p₁(z₀) = c`.
    pub fn symbol(&self) -> Result<SymbolModel> {
        match &self.kind {
            ModelKind::OscPower { m, extremum } => SymbolModel::osc_power(self.n, *m, *extremum, 0.0, self.p1_shift),
            ModelKind::PolySymbol(s) => Ok(s.with_p1(self.p1_shift)),
        }
    }
}

/// `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Window> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain(format!("window [{lo}, {hi}] is empty or not finite")));
        }
        Ok(Window { lo, hi })
    }

    /// `[E_c − ε, E_c + ε]`.
    pub fn around(ec: f64, eps: f64) -> Result<Window> {
        if !(eps > 0.0) {
            return Err(Error::Domain(format!("window half-width ε = {eps} must be positive")));
        }
        Window::new(ec - eps, ec + eps)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisSize {
    /// Start at `⌈8 ε^{2/k}/h⌉` and double until the doubling test passes.
    Auto,
    Fixed(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub h: f64,
    /// Distinct windowed eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Multiplicity of each entry of `eigenvalues`.
    pub multiplicities: Vec<u64>,
    /// Hermite basis size per degree of freedom; 0 for closed forms.
    #[serde(rename = "basis_N")]
    pub basis_n: usize,
    pub converged: bool,
    /// Part of the requested window covered by trusted eigenvalues.
    pub window: Window,
}

impl SpectrumResult {
    pub fn count(&self) -> u64 {
        self.multiplicities.iter().sum()
    }
}

/// `±(h(2J + n))^m + c·h` with multiplicity `C(J+n−1, n−1)`.
pub fn closed_form_spectrum(model: &OperatorModel, h: f64, window: Window) -> Result<SpectrumResult> {
    let ModelKind::OscPower { m, extremum } = model.kind else {
        return Err(Error::Domain("closed-form spectrum needs an oscillator-power model".into()));
    };
    check_h(h)?;
    let n = model.n;
    let sign = if extremum == Extremum::Minimum { 1.0 } else { -1.0 };
    let shift = model.p1_shift * h;
    let mut levels = Vec::new();
    let mut j: u64 = 0;
    loop {
        let e = (h * (2 * j + n as u64) as f64).powi(m as i32);
        let v = sign * e + shift;
        let past = if sign > 0.0 { v > window.hi } else { v < window.lo };
        if past {
            break;
        }
        if window.contains(v) {
            levels.push((v, binomial(j as usize + n - 1, n - 1)));
        }
        j += 1;
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (eigenvalues, multiplicities) = levels.into_iter().unzip();
    Ok(SpectrumResult { h, eigenvalues, multiplicities, basis_n: 0, converged: true, window })
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("h = {h} must be positive")));
    }
    Ok(())
}

/// `X` (real symmetric) and `P = iA` (imaginary antisymmetric) on the
/// first `basis_n` Hermite functions.
pub fn ladder_matrices(basis_n: usize, h: f64) -> Result<(Matrix, CMatrix)> {
    if basis_n < 2 {
        return Err(Error::Domain(format!("basis size {basis_n} must be at least 2")));
    }
    let mut x = Matrix::zeros(basis_n);
    let mut p = CMatrix::zeros(basis_n);
    for j in 0..basis_n - 1 {
        let v = (h * (j + 1) as f64 / 2.0).sqrt();
        x[(j, j + 1)] = v;
        x[(j + 1, j)] = v;
        p.im[(j, j + 1)] = -v;
        p.im[(j + 1, j)] = v;
    }
    Ok((x, p))
}

/// A vector on the infinite Hermite basis with support `[lo, lo + len)`.
#[derive(Clone, Debug)]
struct Sparse {
    lo: usize,
    vals: Vec<f64>,
}

impl Sparse {
    fn unit(j: usize) -> Sparse {
        Sparse { lo: j, vals: vec![1.0] }
    }

    fn get(&self, i: isize) -> f64 {
        if i < self.lo as isize {
            return 0.0;
        }
        self.vals.get(i as usize - self.lo).copied().unwrap_or(0.0)
    }

    /// `X v` (`minus = false`) or `A v` (`minus = true`), where
    /// `(Xv)_i = √(hi/2) v_{i−1} + √(h(i+1)/2) v_{i+1}` and `A` flips the
    /// sign of the second term.
    fn ladder(&self, h: f64, minus: bool) -> Sparse {
        let lo = self.lo.saturating_sub(1);
        let hi = self.lo + self.vals.len() + 1;
        let sgn = if minus { -1.0 } else { 1.0 };
        let vals = (lo..hi)
            .map(|i| {
                let ii = i as isize;
                (h * i as f64 / 2.0).sqrt() * self.get(ii - 1) + sgn * (h * (i + 1) as f64 / 2.0).sqrt() * self.get(ii + 1)
            })
            .collect();
        Sparse { lo, vals }
    }
}

/// Column `j` of `M = 2^{-a} Σ_s C(a,s) X^s A^b X^{a−s}`, the McCoy form of
/// `Op_h^w(x^a ξ^b) = i^b M`, on the infinite basis.
fn mccoy_column(a: usize, b: usize, j: usize, h: f64) -> Sparse {
    let deg = a + b;
    let lo = j.saturating_sub(deg);
    let mut acc = vec![0.0; j + deg + 1 - lo];
    let norm = 0.5f64.powi(a as i32);
    for s in 0..=a {
        let mut v = Sparse::unit(j);
        for _ in 0..a - s {
            v = v.ladder(h, false);
        }
        for _ in 0..b {
            v = v.ladder(h, true);
        }
        for _ in 0..s {
            v = v.ladder(h, false);
        }
        let c = norm * binomial(a, s) as f64;
        for (off, x) in v.vals.iter().enumerate() {
            acc[v.lo + off - lo] += c * x;
        }
    }
    Sparse { lo, vals: acc }
}

/// Monomials `(α, c)` of a polynomial symbol in `(x, ξ)` variables.
pub type SymbolTerms = Vec<(Vec<usize>, f64)>;

/// Terms of `p₀` (including `E_c`), optionally negated.
pub fn symbol_terms(s: &SymbolModel, sign: f64) -> SymbolTerms {
    s.p0_jet(s.max_degree()).terms().filter(|t| t.1 != 0.0).map(|(a, c)| (a, sign * c)).collect()
}

/// Dense `Op_h^w` of the polynomial with the given monomials, on
/// `basis_n` Hermite functions per degree of freedom (`n = 2` uses the
/// tensor-product basis, index `i₁·basis_n + i₂`). Hermitized exactly.
pub fn weyl_quantize(terms: &[(Vec<usize>, f64)], n: usize, basis_n: usize, h: f64) -> Result<CMatrix> {
    check_h(h)?;
    if basis_n < 2 {
        return Err(Error::Domain(format!("basis size {basis_n} must be at least 2")));
    }
    if n == 0 || n > 2 {
        return Err(Error::Domain(format!("Weyl quantization supports n = 1, 2 (got {n})")));
    }
    if let Some(t) = terms.iter().find(|t| t.0.len() != 2 * n) {
        return Err(Error::Structural(format!("monomial {:?} does not have {} exponents", t.0, 2 * n)));
    }
    let mut out = CMatrix::zeros(basis_n.pow(n as u32));
    for (alpha, c) in terms {
        let factors: Vec<(Matrix, usize)> = (0..n).map(|i| (monomial_matrix(alpha[i], alpha[n + i], basis_n, h), alpha[n + i])).collect();
        let (m, b) = if n == 1 {
            (factors[0].0.clone(), factors[0].1)
        } else {
            (kron(&factors[0].0, &factors[1].0), factors[0].1 + factors[1].1)
        };
        // i^b
        let (target, sign) = match b % 4 {
            0 => (&mut out.re, 1.0),
            1 => (&mut out.im, 1.0),
            2 => (&mut out.re, -1.0),
            _ => (&mut out.im, -1.0),
        };
        let dim = target.n();
        for i in 0..dim {
            for j in 0..dim {
                let v = m[(i, j)];
                if v != 0.0 {
                    target[(i, j)] += sign * c * v;
                }
            }
        }
    }
    out.hermitize();
    Ok(out)
}

/// The real factor `M` of `Op_h^w(x^a ξ^b) = i^b M`, compressed to
/// `basis_n` states.
fn monomial_matrix(a: usize, b: usize, basis_n: usize, h: f64) -> Matrix {
    let cols: Vec<Sparse> = (0..basis_n).into_par_iter().map(|j| mccoy_column(a, b, j, h)).collect();
    let mut m = Matrix::zeros(basis_n);
    for (j, col) in cols.iter().enumerate() {
        for (off, v) in col.vals.iter().enumerate() {
            let i = col.lo + off;
            if i < basis_n {
                m[(i, j)] = *v;
            }
        }
    }
    m
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (na, nb) = (a.n(), b.n());
    let mut m = Matrix::zeros(na * nb);
    for i in 0..na {
        for j in 0..na {
            let x = a[(i, j)];
            if x == 0.0 {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    m[(i * nb + k, j * nb + l)] = x * b[(k, l)];
                }
            }
        }
    }
    m
}

/// Every monomial has even `ξ`-degree (real matrix) and even total
/// degree (commutes with parity).
fn real_and_even(terms: &[(Vec<usize>, f64)]) -> bool {
    terms.iter().all(|(a, _)| a[1] % 2 == 0 && (a[0] + a[1]) % 2 == 0)
}

/// The parity sector `σ` (indices `≡ σ mod 2`) of the quantized real even
/// symbol, as a band matrix.
fn parity_block(terms: &[(Vec<usize>, f64)], basis_n: usize, h: f64, sigma: usize) -> BandMatrix {
    let size = (basis_n + 1 - sigma) / 2;
    let deg = terms.iter().map(|(a, _)| a[0] + a[1]).max().unwrap_or(0);
    let mut band = BandMatrix::zeros(size, (deg / 2).max(1));
    let cols: Vec<Vec<(usize, usize, f64)>> = (0..size)
        .into_par_iter()
        .map(|mj| {
            let j = 2 * mj + sigma;
            let mut out = Vec::new();
            for (alpha, c) in terms {
                let (a, b) = (alpha[0], alpha[1]);
                let sign = if b % 4 == 0 { 1.0 } else { -1.0 };
                let col = mccoy_column(a, b, j, h);
                for (off, v) in col.vals.iter().enumerate() {
                    let i = col.lo + off;
                    if i < basis_n && *v != 0.0 {
                        debug_assert_eq!(i % 2, sigma);
                        out.push((i / 2, mj, sign * c * v));
                    }
                }
            }
            out
        })
        .collect();
    for col in cols {
        for (mi, mj, v) in col {
            // symmetrize: each off-diagonal pair receives half from each side
            let w = if mi == mj { v } else { 0.5 * v };
            band.set(mi, mj, band.get(mi, mj) + w);
        }
    }
    band
}

/// Full spectrum (ascending) of the quantized `n = 1` symbol on `basis_n`
/// states: banded parity blocks for real even symbols, the dense
/// Hermitian solver otherwise.
pub fn quantized_eigenvalues(terms: &[(Vec<usize>, f64)], basis_n: usize, h: f64) -> Result<Vec<f64>> {
    if terms.iter().any(|t| t.0.len() != 2) {
        return Err(Error::Domain("quantized spectra are computed for n = 1 only".into()));
    }
    let mut ev = if real_and_even(terms) {
        let (even, odd) = rayon::join(
            || parity_block(terms, basis_n, h, 0).eigenvalues(),
            || parity_block(terms, basis_n, h, 1).eigenvalues(),
        );
        let mut ev = even?;
        ev.extend(odd?);
        ev
    } else {
        if basis_n > MAX_DENSE_BASIS {
            return Err(Error::Convergence(format!(
                "dense Hermitian path capped at {MAX_DENSE_BASIS} states (asked for {basis_n})"
            )));
        }
        eigenvalues_hermitian(&weyl_quantize(terms, 1, basis_n, h)?)?
    };
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Largest deviation of windowed eigenvalues between the parity-split and
/// the dense solve of a real even symbol.
pub fn parity_consistency(terms: &[(Vec<usize>, f64)], basis_n: usize, h: f64, window: Window) -> Result<f64> {
    if !real_and_even(terms) {
        return Err(Error::Domain("parity split needs a real even symbol".into()));
    }
    let split = quantized_eigenvalues(terms, basis_n, h)?;
    let dense = eigenvalues_hermitian(&weyl_quantize(terms, 1, basis_n, h)?)?;
    Ok(split
        .iter()
        .zip(&dense)
        .filter(|(a, _)| window.contains(**a))
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// The `+h²` (m = 2) and `+5h²λ` (m = 3) terms by which the Weyl
/// quantization of `(x² + ξ²)^m` exceeds `H^m`, `H = Op(x² + ξ²)`, at the
/// `H^m` eigenvalue `e = λ^m`.
pub fn osc_power_moyal_shift(m: usize, h: f64, e: f64) -> Option<f64> {
    match m {
        2 => Some(h * h),
        3 => Some(5.0 * h * h * e.cbrt()),
        _ => None,
    }
}

/// Eigenvalues of `model` in `window`: closed form for oscillator powers,
/// Hermite-basis quantization otherwise.
pub fn spectrum(model: &OperatorModel, h: f64, window: Window, basis: BasisSize) -> Result<SpectrumResult> {
    check_h(h)?;
    let s = match &model.kind {
        ModelKind::OscPower { .. } => return closed_form_spectrum(model, h, window),
        ModelKind::PolySymbol(s) => s,
    };
    if s.n() != 1 {
        return Err(Error::Domain("polynomial symbols are quantized for n = 1 only".into()));
    }
    // work with the extremum at the bottom of the spectrum
    let flip = if s.extremum() == Extremum::Minimum { 1.0 } else { -1.0 };
    let terms = symbol_terms(s, flip);
    let shift = model.p1_shift * h;
    let (a, b) = (flip * (window.lo - shift), flip * (window.hi - shift));
    let inner = Window { lo: a.min(b), hi: a.max(b) };
    let eps = window.half_width();
    let dense = !real_and_even(&terms);
    let cap = if dense { MAX_DENSE_BASIS } else { MAX_BASIS };

    let mut n_basis = match basis {
        BasisSize::Fixed(nb) => nb,
        BasisSize::Auto => {
            let reach = inner.hi - flip * s.ec();
            let n0 = (8.0 * reach.abs().max(eps).powf(2.0 / s.k() as f64) / h).ceil() as usize;
            n0.max(16)
        }
    };
    loop {
        if n_basis < 2 {
            return Err(Error::Domain(format!("basis size {n_basis} must be at least 2")));
        }
        let (e1, e2) = rayon::join(
            || quantized_eigenvalues(&terms, n_basis, h),
            || quantized_eigenvalues(&terms, 2 * n_basis, h),
        );
        let (e1, e2) = (e1?, e2?);
        let trusted = &e1[..((TRUSTED_FRACTION * n_basis as f64) as usize).min(e1.len())];
        let covered = trusted.last().is_some_and(|&top| top >= inner.hi);
        let idx: Vec<usize> = (0..trusted.len()).filter(|&i| inner.contains(trusted[i])).collect();
        let drift = idx.iter().fold(0.0f64, |m, &i| m.max((e1[i] - e2[i]).abs()));
        let converged = covered && drift <= DOUBLING_TOL * eps;
        let done = converged || matches!(basis, BasisSize::Fixed(_));
        if done {
            let mut eigenvalues: Vec<f64> = idx.iter().map(|&i| flip * e1[i] + shift).collect();
            eigenvalues.sort_by(f64::total_cmp);
            let top = trusted.last().copied().unwrap_or(inner.lo).min(inner.hi).max(inner.lo);
            let (u, v) = (flip * inner.lo + shift, flip * top + shift);
            return Ok(SpectrumResult {
                h,
                multiplicities: vec![1; eigenvalues.len()],
                eigenvalues,
                basis_n: n_basis,
                converged,
                window: Window { lo: u.min(v), hi: u.max(v) },
            });
        }
        if 4 * n_basis > cap {
            return Err(Error::Convergence(format!(
                "windowed eigenvalues not converged at basis size {n_basis} (drift {drift:.3e}, covered {covered}); cap {cap}"
            )));
        }
        n_basis *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Jet;
    use crate::symbols::make_symbol;

    fn quartic(sign: f64) -> SymbolModel {
        let j = Jet::from_terms(2, 4, &[(vec![4, 0], sign), (vec![0, 4], sign)]).unwrap();
        make_symbol(1, 0.0, vec![j], 0.0).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{x} vs {y} ({a:?} vs {b:?})");
        }
    }

    #[test]
    fn closed_form_examples() {
        let w = Window::new(0.0, 1.0).unwrap();
        let m2 = OperatorModel::osc_power(1, 2, Extremum::Minimum).unwrap();
        let r = closed_form_spectrum(&m2, 0.1, w).unwrap();
        assert_close(&r.eigenvalues, &[0.01, 0.09, 0.25, 0.49, 0.81], 1e-15);
        let neg = OperatorModel::osc_power(1, 2, Extremum::Maximum).unwrap();
        let r = closed_form_spectrum(&neg, 0.1, Window::new(-1.0, 0.0).unwrap()).unwrap();
        assert_close(&r.eigenvalues, &[-0.81, -0.49, -0.25, -0.09, -0.01], 1e-15);
        let m3 = OperatorModel::osc_power(1, 3, Extremum::Minimum).unwrap();
        let r = closed_form_spectrum(&m3, 0.1, w).unwrap();
        assert_close(&r.eigenvalues, &[0.001, 0.027, 0.125, 0.343, 0.729], 1e-15);
        let empty = closed_form_spectrum(&m2, 0.1, Window::new(2.0, 2.1).unwrap()).unwrap();
        assert!(empty.eigenvalues.is_empty());
    }

    #[test]
    fn closed_form_multiplicities_n2() {
        let m = OperatorModel::osc_power(2, 2, Extremum::Minimum).unwrap();
        let r = closed_form_spectrum(&m, 0.1, Window::new(0.0, 0.7).unwrap()).unwrap();
        // levels (0.1(2J+2))², multiplicity J+1
        assert_close(&r.eigenvalues, &[0.04, 0.16, 0.36, 0.64], 1e-15);
        assert_eq!(r.multiplicities, vec![1, 2, 3, 4]);
    }

    #[test]
    fn window_count_osc2() {
        let m = OperatorModel::osc_power(1, 2, Extremum::Minimum).unwrap();
        let r = spectrum(&m, 1e-3, Window::around(0.0, 0.5).unwrap(), BasisSize::Auto).unwrap();
        assert_eq!(r.count(), 354);
        assert!(r.converged);
    }

    #[test]
    fn ladder_examples() {
        let (x, _) = ladder_matrices(2, 1.0).unwrap();
        let s = 0.5f64.sqrt();
        assert_eq!(x, Matrix::from_rows(&[vec![0.0, s], vec![s, 0.0]]));
        let n = 8;
        let h = 0.3;
        let (x, p) = ladder_matrices(n, h).unwrap();
        let xc = CMatrix::real(x);
        let sq = xc.matmul(&xc).add(&p.matmul(&p)).leading_block(n - 1);
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let want = if i == j { h * (2 * i + 1) as f64 } else { 0.0 };
                assert!((sq.re[(i, j)] - want).abs() < 1e-14 && sq.im[(i, j)].abs() < 1e-14);
            }
        }
        let comm = xc.matmul(&p).sub(&p.matmul(&xc)).leading_block(n - 1);
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let want = if i == j { h } else { 0.0 };
                assert!(comm.re[(i, j)].abs() < 1e-14 && (comm.im[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn harmonic_oscillator() {
        let t = vec![(vec![2, 0], 1.0), (vec![0, 2], 1.0)];
        let ev = eigenvalues_hermitian(&weyl_quantize(&t, 1, 6, 1.0).unwrap()).unwrap();
        assert_close(&ev[..5], &[1.0, 3.0, 5.0, 7.0, 9.0], 1e-12);
    }

    #[test]
    fn x_xi_is_symmetrized_product() {
        let n = 7;
        let h = 0.7;
        let q = weyl_quantize(&[(vec![1, 1], 1.0)], 1, n, h).unwrap();
        let (x, p) = ladder_matrices(n + 2, h).unwrap();
        let xc = CMatrix::real(x);
        let want = xc.matmul(&p).add(&p.matmul(&xc)).scale(0.5).leading_block(n);
        assert!(q.sub(&want).re.max_abs() < 1e-14 && q.sub(&want).im.max_abs() < 1e-14);
    }

    #[test]
    fn squared_oscillator_moyal_constant() {
        let h = 0.1;
        let t = vec![(vec![4, 0], 1.0), (vec![2, 2], 2.0), (vec![0, 4], 1.0)];
        let ev = quantized_eigenvalues(&t, 40, h).unwrap();
        for (j, e) in ev.iter().take(30).enumerate() {
            let l = h * (2 * j + 1) as f64;
            assert!((e - (l * l + osc_power_moyal_shift(2, h, l * l).unwrap())).abs() < 1e-12, "j={j}: {e}");
        }
        let t3 = vec![(vec![6, 0], 1.0), (vec![4, 2], 3.0), (vec![2, 4], 3.0), (vec![0, 6], 1.0)];
        let ev = quantized_eigenvalues(&t3, 40, h).unwrap();
        for (j, e) in ev.iter().take(25).enumerate() {
            let l = h * (2 * j + 1) as f64;
            let e3 = l * l * l;
            assert!((e - (e3 + osc_power_moyal_shift(3, h, e3).unwrap())).abs() < 1e-12, "j={j}: {e}");
        }
    }

    #[test]
    fn quartic_has_no_ordering_correction() {
        let n = 30;
        let h = 0.2;
        let q = weyl_quantize(&[(vec![4, 0], 1.0), (vec![0, 4], 1.0)], 1, n, h).unwrap();
        let (x, p) = ladder_matrices(n + 4, h).unwrap();
        let xc = CMatrix::real(x);
        let x2 = xc.matmul(&xc);
        let p2 = p.matmul(&p);
        let want = x2.matmul(&x2).add(&p2.matmul(&p2)).leading_block(n);
        assert!(q.sub(&want).re.max_abs() < 1e-13 && q.im.max_abs() == 0.0);
    }

    #[test]
    fn linearity() {
        let p = vec![(vec![4, 0], 0.7), (vec![1, 1], -0.2)];
        let q = vec![(vec![0, 4], 1.3), (vec![3, 1], 0.4)];
        let both: Vec<_> = p.iter().chain(&q).cloned().collect();
        let (a, b, c) = (
            weyl_quantize(&p, 1, 12, 0.1).unwrap(),
            weyl_quantize(&q, 1, 12, 0.1).unwrap(),
            weyl_quantize(&both, 1, 12, 0.1).unwrap(),
        );
        let d = a.add(&b).sub(&c);
        assert!(d.re.max_abs() < 1e-15 && d.im.max_abs() < 1e-15);
    }

    #[test]
    fn tensor_product_oscillator() {
        let t = vec![(vec![2, 0, 0, 0], 1.0), (vec![0, 2, 0, 0], 1.0), (vec![0, 0, 2, 0], 1.0), (vec![0, 0, 0, 2], 1.0)];
        let m = weyl_quantize(&t, 2, 5, 0.5).unwrap();
        let ev = eigenvalues_hermitian(&m).unwrap();
        // exact compression of the sum of two oscillators: h(2i+1) + h(2j+1)
        let mut want: Vec<f64> = (0..5).flat_map(|i| (0..5).map(move |j| 0.5 * (2 * (i + j) + 2) as f64)).collect();
        want.sort_by(f64::total_cmp);
        assert_close(&ev, &want, 1e-12);
    }

    #[test]
    fn quartic_self_convergence_and_parity() {
        let m = OperatorModel::poly(quartic(1.0));
        let w = Window::around(0.0, 0.5).unwrap();
        let r = spectrum(&m, 0.05, w, BasisSize::Auto).unwrap();
        assert!(r.converged);
        let r2 = spectrum(&m, 0.05, w, BasisSize::Fixed(2 * r.basis_n)).unwrap();
        assert_close(&r.eigenvalues, &r2.eigenvalues, 1e-9 * 0.5);
        let terms = symbol_terms(&quartic(1.0), 1.0);
        assert!(parity_consistency(&terms, 120, 0.05, w).unwrap() < 1e-10);
    }

    #[test]
    fn maximum_mirrors_minimum() {
        let w = Window::around(0.0, 0.5).unwrap();
        let up = spectrum(&OperatorModel::poly(quartic(1.0)), 0.05, w, BasisSize::Auto).unwrap();
        let down = spectrum(&OperatorModel::poly(quartic(-1.0)), 0.05, w, BasisSize::Auto).unwrap();
        let mirrored: Vec<f64> = up.eigenvalues.iter().rev().map(|e| -e).collect();
        assert_close(&down.eigenvalues, &mirrored, 1e-12);
        assert!(down.window.lo <= -0.5 + 1e-12 && down.window.hi == 0.5);
    }

    #[test]
    fn p1_shift_moves_every_level() {
        let c = 0.3;
        let h = 0.05;
        let w = Window::new(-0.5, 0.5).unwrap();
        let base = OperatorModel::poly(quartic(1.0));
        let a = spectrum(&base, h, w, BasisSize::Fixed(200)).unwrap();
        let b = spectrum(&base.with_p1_shift(c), h, w, BasisSize::Fixed(200)).unwrap();
        let n = a.eigenvalues.len().min(b.eigenvalues.len()) - 1;
        for i in 0..n {
            assert!((b.eigenvalues[i] - a.eigenvalues[i] - c * h).abs() < 1e-12);
        }
        let o = OperatorModel::osc_power(1, 2, Extremum::Minimum).unwrap();
        let a = spectrum(&o, h, w, BasisSize::Auto).unwrap();
        let b = spectrum(&o.with_p1_shift(c), h, w, BasisSize::Auto).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((y - x - c * h).abs() < 1e-15);
        }
    }

    #[test]
    fn quantized_osc_power_matches_closed_form() {
        let h = 0.02;
        let w = Window::around(0.0, 0.5).unwrap();
        let s = SymbolModel::osc_power(1, 2, Extremum::Minimum, 0.0, 0.0).unwrap();
        let q = spectrum(&OperatorModel::poly(s), h, w, BasisSize::Auto).unwrap();
        let c = closed_form_spectrum(&OperatorModel::osc_power(1, 2, Extremum::Minimum).unwrap(), h, w).unwrap();
        let shifted: Vec<f64> = q.eigenvalues.iter().map(|e| e - h * h).filter(|e| w.contains(*e)).collect();
        let want: Vec<f64> = c.eigenvalues.iter().cloned().filter(|e| *e <= 0.5 - h * h).collect();
        assert_close(&shifted[..want.len()], &want, 1e-9);
    }

    #[test]
    fn weyl_law_count() {
        let h = 0.005;
        let eps: f64 = 0.5;
        let r = spectrum(&OperatorModel::poly(quartic(1.0)), h, Window::around(0.0, eps).unwrap(), BasisSize::Auto).unwrap();
        // area {x⁴ + ξ⁴ ≤ ε} = ½ √ε ∫ (cos⁴θ + sin⁴θ)^{-1/2} dθ
        let area = 0.5 * eps.sqrt() * 7.416298709205488;
        let want = area / (2.0 * std::f64::consts::PI * h);
        let got = r.count() as f64;
        assert!((got / want - 1.0).abs() < 0.1, "{got} vs {want}");
    }

    #[test]
    fn n2_poly_symbol_is_rejected() {
        let s = SymbolModel::osc_power(2, 2, Extremum::Minimum, 0.0, 0.0).unwrap();
        let e = spectrum(&OperatorModel::poly(s), 0.1, Window::around(0.0, 0.5).unwrap(), BasisSize::Auto);
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn odd_symbol_uses_dense_path() {
        let t = vec![(vec![4, 0], 1.0), (vec![0, 4], 1.0), (vec![3, 1], 0.2)];
        let ev = quantized_eigenvalues(&t, 40, 0.1).unwrap();
        let dense = eigenvalues_hermitian(&weyl_quantize(&t, 1, 40, 0.1).unwrap()).unwrap();
        assert_close(&ev, &dense, 0.0);
        assert!(ev[0] > 0.0);
    }
}
