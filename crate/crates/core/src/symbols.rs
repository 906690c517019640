//! Local polynomial models of the principal symbol at the critical point.
//!
//! A model is `p₀ = E_c + Σ_{j ≥ k} 𝔭_j` with `𝔭_j` homogeneous of degree
//! `j` in `z = (x, ξ) ∈ ℝ^{2n}`. The critical point sits at the origin;
//! moving a user symbol there is the caller's job. The lowest component
//! `𝔭_k` must have `k > 2` and be definite on the unit sphere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Jet, VectorJet};
use crate::quad::gauss_legendre;

/// Relative margin `min |𝔭_k| / max |𝔭_k|` on the sphere sample below
/// which definiteness is rejected.
pub const DEFINITENESS_MARGIN: f64 = 1e-9;

const CIRCLE_SAMPLES: usize = 4096;
const S3_SAMPLES: usize = 131_072;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Minimum,
    Maximum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolModel {
    n: usize,
    ec: f64,
    /// `(degree, 𝔭_degree)`, ascending, all stored at `taylor_order`.
    components: Vec<(usize, Jet)>,
    k: usize,
    extremum: Extremum,
    p1_at_z0: f64,
    taylor_order: usize,
}

impl SymbolModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ec(&self) -> f64 {
        self.ec
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn extremum(&self) -> Extremum {
        self.extremum
    }

    pub fn p1_at_z0(&self) -> f64 {
        self.p1_at_z0
    }

    /// Degree through which the model's Taylor data is exact. Defaults to
    /// the top component degree; polynomial models may raise it freely.
    pub fn taylor_order(&self) -> usize {
        self.taylor_order
    }

    pub fn phase_dim(&self) -> usize {
        2 * self.n
    }

    pub fn components(&self) -> &[(usize, Jet)] {
        &self.components
    }

    pub fn max_degree(&self) -> usize {
        self.components.last().map(|c| c.0).unwrap_or(0)
    }

    /// `𝔭_j` at order `taylor_order` (zero if absent).
    pub fn component(&self, j: usize) -> Jet {
        self.components
            .iter()
            .find(|c| c.0 == j)
            .map(|c| c.1.clone())
            .unwrap_or_else(|| Jet::zero(self.phase_dim(), self.taylor_order))
    }

    /// `𝔭_k`.
    pub fn leading(&self) -> &Jet {
        &self.components[0].1
    }

    pub fn with_taylor_order(&self, order: usize) -> Result<SymbolModel> {
        if order < self.max_degree() {
            return Err(Error::Domain(format!(
                "taylor order {order} below the top component degree {}",
                self.max_degree()
            )));
        }
        let mut s = self.clone();
        s.taylor_order = order;
        s.components = s.components.into_iter().map(|(d, j)| (d, j.with_order(order))).collect();
        Ok(s)
    }

    pub fn with_p1(&self, p1: f64) -> SymbolModel {
        let mut s = self.clone();
        s.p1_at_z0 = p1;
        s
    }

    /// `p₀ − E_c = Σ 𝔭_j`, at the given order.
    pub fn fluctuation(&self, order: usize) -> Jet {
        let mut acc = Jet::zero(self.phase_dim(), order);
        for (_, c) in &self.components {
            acc.axpy(1.0, &c.with_order(order));
        }
        acc
    }

    /// `p₀` at the given order.
    pub fn p0_jet(&self, order: usize) -> Jet {
        let mut p = self.fluctuation(order);
        p.coeffs_mut()[0] += self.ec;
        p
    }

    pub fn p0(&self, z: &[f64]) -> f64 {
        self.ec + self.components.iter().map(|(_, c)| c.eval(z)).sum::<f64>()
    }

    /// `𝔭_k(θ/|θ|)`.
    pub fn leading_on_sphere(&self, theta: &[f64]) -> f64 {
        let r = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
        let u: Vec<f64> = theta.iter().map(|x| x / r).collect();
        self.leading().eval(&u)
    }

    /// `(|z|²)^m` with the given sign, `n` degrees of freedom.
    pub fn osc_power(n: usize, m: usize, extremum: Extremum, ec: f64, p1: f64) -> Result<SymbolModel> {
        let d = 2 * n;
        let order = 2 * m;
        let mut q = Jet::zero(d, order);
        for i in 0..d {
            let mut a = vec![0; d];
            a[i] = 2;
            q.set_coeff(&a, 1.0)?;
        }
        let mut p = Jet::constant(d, order, 1.0);
        for _ in 0..m {
            p = &p * &q;
        }
        if extremum == Extremum::Maximum {
            p = p.scale(-1.0);
        }
        make_symbol(n, ec, vec![p], p1)
    }
}

/// Validates and assembles a model from homogeneous components.
///
/// `k` is the lowest degree with a non-zero component. Definiteness of
/// `𝔭_k` is tested on a sphere sample (4096 angles for `n = 1`, a Halton
/// sample of 131072 points on `S³` for `n = 2`).
pub fn make_symbol(n: usize, ec: f64, components: Vec<Jet>, p1_at_z0: f64) -> Result<SymbolModel> {
    if n == 0 || n > 2 {
        return Err(Error::Domain(format!("n = {n} unsupported (1 or 2 degrees of freedom)")));
    }
    if components.is_empty() {
        return Err(Error::Structural("symbol needs at least one component".into()));
    }
    let dim = 2 * n;
    let mut by_degree: Vec<(usize, Jet)> = Vec::new();
    for (i, c) in components.iter().enumerate() {
        if c.dim() != dim {
            return Err(Error::Structural(format!("component {i} has dim {} (expected {dim})", c.dim())));
        }
        let Some(deg) = c.lowest_degree() else { continue };
        if c.degree() != Some(deg) {
            return Err(Error::Structural(format!("component {i} is not homogeneous")));
        }
        match by_degree.iter_mut().find(|(d, _)| *d == deg) {
            Some((_, acc)) => {
                let o = acc.order().max(c.order());
                *acc = &acc.with_order(o) + &c.with_order(o);
            }
            None => by_degree.push((deg, c.clone())),
        }
    }
    by_degree.retain(|(_, j)| !j.is_zero());
    by_degree.sort_by_key(|(d, _)| *d);
    let Some(&(k, _)) = by_degree.first() else {
        return Err(Error::Hypothesis {
            hypothesis: "H2",
            detail: "all components vanish, so z₀ is not an isolated critical point".into(),
            direction: None,
        });
    };
    if k <= 2 {
        return Err(Error::Hypothesis {
            hypothesis: "H2",
            detail: format!("the first non-vanishing component has degree {k}; a totally degenerate point needs k > 2"),
            direction: None,
        });
    }
    let taylor_order = by_degree.last().unwrap().0;
    let components: Vec<(usize, Jet)> = by_degree.into_iter().map(|(d, j)| (d, j.with_order(taylor_order))).collect();
    let extremum = classify(n, &components[0].1)?;
    Ok(SymbolModel { n, ec, components, k, extremum, p1_at_z0, taylor_order })
}

fn classify(n: usize, pk: &Jet) -> Result<Extremum> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut weakest = (f64::INFINITY, Vec::new());
    for_each_sphere_sample(n, |u| {
        let v = pk.eval(u);
        lo = lo.min(v);
        hi = hi.max(v);
        if v.abs() < weakest.0 {
            weakest = (v.abs(), u.to_vec());
        }
    });
    let scale = lo.abs().max(hi.abs());
    if lo < 0.0 && hi > 0.0 {
        return Err(Error::Hypothesis {
            hypothesis: "H4",
            detail: format!("𝔭_k changes sign on the unit sphere (range [{lo:.3e}, {hi:.3e}])"),
            direction: Some(weakest.1),
        });
    }
    if weakest.0 < DEFINITENESS_MARGIN * scale || scale == 0.0 {
        return Err(Error::Hypothesis {
            hypothesis: "H4",
            detail: format!("|𝔭_k| drops to {:.3e} on the unit sphere (max {scale:.3e})", weakest.0),
            direction: Some(weakest.1),
        });
    }
    Ok(if lo > 0.0 { Extremum::Minimum } else { Extremum::Maximum })
}

fn for_each_sphere_sample(n: usize, mut f: impl FnMut(&[f64])) {
    use std::f64::consts::PI;
    if n == 1 {
        for i in 0..CIRCLE_SAMPLES {
            let th = 2.0 * PI * i as f64 / CIRCLE_SAMPLES as f64;
            f(&[th.cos(), th.sin()]);
        }
        return;
    }
    // uniform on S³: (√u cos 2πv, √u sin 2πv, √(1−u) cos 2πw, √(1−u) sin 2πw)
    for i in 1..=S3_SAMPLES {
        let (u, v, w) = (halton(i, 2), halton(i, 3), halton(i, 5));
        let (r1, r2) = (u.sqrt(), (1.0 - u).sqrt());
        let (a, b) = (2.0 * PI * v, 2.0 * PI * w);
        f(&[r1 * a.cos(), r1 * a.sin(), r2 * b.cos(), r2 * b.sin()]);
    }
}

fn halton(mut i: usize, base: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `I_k = ∫_{S^{2n−1}} |𝔭_k(θ)|^{−2n/k} dθ`, refined until two successive
/// estimates differ by at most `tol`.
///
/// `n = 1`: trapezoid rule on the circle, doubling the node count.
/// `n = 2`: Gauss–Legendre in the two polar hyperspherical angles and the
/// trapezoid rule in the azimuth, doubling all three.
pub fn sphere_integral(s: &SymbolModel, tol: f64) -> Result<f64> {
    if tol <= 0.0 {
        return Err(Error::Domain("sphere_integral tolerance must be positive".into()));
    }
    let p = -(2.0 * s.n as f64) / s.k as f64;
    let pk = s.leading();
    let weight = |u: &[f64]| pk.eval(u).abs().powf(p);
    match s.n {
        1 => {
            use std::f64::consts::PI;
            let rule = |m: usize| {
                let h = 2.0 * PI / m as f64;
                (0..m).map(|i| { let t = i as f64 * h; weight(&[t.cos(), t.sin()]) }).sum::<f64>() * h
            };
            let mut m = 64;
            let mut prev = rule(m);
            while m < 1 << 20 {
                m *= 2;
                let cur = rule(m);
                if (cur - prev).abs() <= tol {
                    return Ok(cur);
                }
                prev = cur;
            }
            Err(Error::Convergence(format!("sphere integral did not reach tol {tol:.1e} with {m} nodes")))
        }
        2 => {
            let mut m = 8;
            let mut prev = s3_product_rule(&weight, m);
            while m < 256 {
                m *= 2;
                let cur = s3_product_rule(&weight, m);
                if (cur - prev).abs() <= tol {
                    return Ok(cur);
                }
                prev = cur;
            }
            Err(Error::Convergence(format!("S³ quadrature did not reach tol {tol:.1e} at {m} nodes per angle")))
        }
        n => Err(Error::Domain(format!("sphere integral for n = {n} not supported"))),
    }
}

fn s3_product_rule(f: &(impl Fn(&[f64]) -> f64 + Sync), m: usize) -> f64 {
    use rayon::prelude::*;
    use std::f64::consts::PI;
    let gl = gauss_legendre(m);
    let nodes: Vec<(f64, f64)> = gl.0.iter().zip(&gl.1).map(|(&x, &w)| (0.5 * PI * (x + 1.0), 0.5 * PI * w)).collect();
    let naz = 2 * m;
    let haz = 2.0 * PI / naz as f64;
    let rows: Vec<f64> = nodes
        .par_iter()
        .map(|&(psi, wpsi)| {
            let (sp, cp) = psi.sin_cos();
            let mut acc = 0.0;
            for &(th, wth) in &nodes {
                let (st, ct) = th.sin_cos();
                let mut inner = 0.0;
                for a in 0..naz {
                    let (sa, ca) = (a as f64 * haz).sin_cos();
                    inner += f(&[cp, sp * ct, sp * st * ca, sp * st * sa]);
                }
                acc += wth * st * inner * haz;
            }
            wpsi * sp * sp * acc
        })
        .collect();
    // summed in node order so the result does not depend on scheduling
    rows.iter().sum()
}

/// `H_{p₀} = (∂_ξ p₀, −∂_x p₀)` with components truncated at degree `N − 1`.
pub fn hamiltonian_field(s: &SymbolModel, order: usize) -> Result<VectorJet> {
    if order == 0 || order > s.taylor_order {
        return Err(Error::Domain(format!(
            "hamiltonian field order {order} outside 1..={} (taylor order)",
            s.taylor_order
        )));
    }
    let p = s.p0_jet(order);
    let n = s.n;
    let mut comps = Vec::with_capacity(2 * n);
    for i in 0..n {
        comps.push(p.diff(n + i)?.with_order(order - 1));
    }
    for i in 0..n {
        comps.push(p.diff(i)?.scale(-1.0).with_order(order - 1));
    }
    VectorJet::new(comps)
}

/// JSON form: `{"n":1,"Ec":0.0,"p1":0.0,"components":[{"degree":4,"terms":[...]}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub n: usize,
    #[serde(rename = "Ec", default)]
    pub ec: f64,
    #[serde(default)]
    pub p1: f64,
    pub components: Vec<ComponentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taylor_order: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub degree: usize,
    pub terms: Vec<TermSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermSpec {
    pub alpha: Vec<usize>,
    pub c: f64,
}

impl SymbolSpec {
    pub fn build(&self) -> Result<SymbolModel> {
        let dim = 2 * self.n;
        let mut comps = Vec::new();
        for c in &self.components {
            for t in &c.terms {
                if t.alpha.iter().sum::<usize>() != c.degree {
                    return Err(Error::Structural(format!(
                        "term {:?} does not have the declared degree {}",
                        t.alpha, c.degree
                    )));
                }
            }
            let terms: Vec<(Vec<usize>, f64)> = c.terms.iter().map(|t| (t.alpha.clone(), t.c)).collect();
            comps.push(Jet::from_terms(dim, c.degree, &terms)?);
        }
        let s = make_symbol(self.n, self.ec, comps, self.p1)?;
        match self.taylor_order {
            Some(o) => s.with_taylor_order(o),
            None => Ok(s),
        }
    }

    pub fn from_model(s: &SymbolModel) -> SymbolSpec {
        SymbolSpec {
            n: s.n,
            ec: s.ec,
            p1: s.p1_at_z0,
            components: s
                .components
                .iter()
                .map(|(d, j)| ComponentSpec {
                    degree: *d,
                    terms: j.terms().map(|(alpha, c)| TermSpec { alpha, c }).collect(),
                })
                .collect(),
            taylor_order: (s.taylor_order != s.max_degree()).then_some(s.taylor_order),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    pub(crate) fn quartic_xi() -> SymbolModel {
        let j = Jet::from_terms(2, 4, &[(vec![4, 0], 1.0), (vec![0, 4], 1.0)]).unwrap();
        make_symbol(1, 0.0, vec![j], 0.0).unwrap()
    }

    #[test]
    fn classify_examples() {
        let s = SymbolModel::osc_power(1, 2, Extremum::Minimum, 0.0, 0.0).unwrap();
        assert_eq!((s.k(), s.extremum()), (4, Extremum::Minimum));
        let s = SymbolModel::osc_power(1, 2, Extremum::Maximum, 0.0, 0.0).unwrap();
        assert_eq!((s.k(), s.extremum()), (4, Extremum::Maximum));
    }

    #[test]
    fn sign_change_is_h4() {
        let j = Jet::from_terms(2, 4, &[(vec![4, 0], 1.0), (vec![0, 4], -1.0)]).unwrap();
        match make_symbol(1, 0.0, vec![j], 0.0).unwrap_err() {
            Error::Hypothesis { hypothesis, direction: Some(d), .. } => {
                assert_eq!(hypothesis, "H4");
                // weakest direction lies on a diagonal
                assert!((d[0].abs() - d[1].abs()).abs() < 1e-12);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn semidefinite_is_h4() {
        let j = Jet::from_terms(2, 4, &[(vec![4, 0], 1.0)]).unwrap();
        let e = make_symbol(1, 0.0, vec![j], 0.0).unwrap_err();
        assert!(matches!(e, Error::Hypothesis { hypothesis: "H4", .. }));
    }

    #[test]
    fn quadratic_is_h2() {
        let j = Jet::from_terms(2, 2, &[(vec![2, 0], 1.0), (vec![0, 2], 1.0)]).unwrap();
        let e = make_symbol(1, 0.0, vec![j], 0.0).unwrap_err();
        assert!(matches!(e, Error::Hypothesis { hypothesis: "H2", .. }));
    }

    #[test]
    fn non_homogeneous_rejected() {
        let j = Jet::from_terms(2, 5, &[(vec![4, 0], 1.0), (vec![5, 0], 1.0)]).unwrap();
        assert!(matches!(make_symbol(1, 0.0, vec![j], 0.0).unwrap_err(), Error::Structural(_)));
    }

    #[test]
    fn sphere_integral_examples() {
        let s = SymbolModel::osc_power(1, 2, Extremum::Minimum, 0.0, 0.0).unwrap();
        assert!((sphere_integral(&s, 1e-12).unwrap() - 2.0 * PI).abs() < 1e-12);
        let s = SymbolModel::osc_power(2, 2, Extremum::Minimum, 0.0, 0.0).unwrap();
        assert!((sphere_integral(&s, 1e-12).unwrap() - 2.0 * PI * PI).abs() < 1e-10);
        // 4 K(1/2), pinned from an independent elliptic-integral evaluation
        let i = sphere_integral(&quartic_xi(), 1e-13).unwrap();
        assert!((i - 7.416298709205488).abs() < 1e-12, "{i}");
    }

    #[test]
    fn hamiltonian_field_examples() {
        let s = SymbolModel::osc_power(1, 2, Extremum::Minimum, 0.0, 0.0).unwrap();
        let h = hamiltonian_field(&s, 4).unwrap();
        let expect0 = Jet::from_terms(2, 3, &[(vec![2, 1], 4.0), (vec![0, 3], 4.0)]).unwrap();
        let expect1 = Jet::from_terms(2, 3, &[(vec![3, 0], -4.0), (vec![1, 2], -4.0)]).unwrap();
        assert_eq!(h.components()[0], expect0);
        assert_eq!(h.components()[1], expect1);

        let h = hamiltonian_field(&quartic_xi(), 4).unwrap();
        assert_eq!(h.components()[0], Jet::from_terms(2, 3, &[(vec![0, 3], 4.0)]).unwrap());
        assert_eq!(h.components()[1], Jet::from_terms(2, 3, &[(vec![3, 0], -4.0)]).unwrap());
    }

    #[test]
    fn constant_part_gives_no_field() {
        let s = SymbolModel::osc_power(1, 2, Extremum::Minimum, 3.5, 0.0).unwrap();
        let h = hamiltonian_field(&s, 1).unwrap();
        assert!(h.components().iter().all(|c| c.is_zero()));
    }

    #[test]
    fn spec_roundtrip() {
        let json = r#"{"n":1,"Ec":0.25,"p1":0.1,"components":[{"degree":4,"terms":[{"alpha":[4,0],"c":1.0},{"alpha":[0,4],"c":1.0}]}]}"#;
        let spec: SymbolSpec = serde_json::from_str(json).unwrap();
        let s = spec.build().unwrap();
        assert_eq!((s.k(), s.ec(), s.p1_at_z0()), (4, 0.25, 0.1));
        let again = SymbolSpec::from_model(&s).build().unwrap();
        assert_eq!(again, s);
    }
}
