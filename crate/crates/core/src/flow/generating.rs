//! Generating function `S(t, x, η)` of the flow near the critical point.
//!
//! Writing `S = ⟨x, η⟩ − tE_c + W`, the Hamilton–Jacobi equation
//! `∂_t S + p₀(x, ∂_x S) = 0` becomes
//! `∂_t W = −𝔭(x, η + ∂_x W)`, `W(0) = 0`, with `𝔭 = p₀ − E_c`.
//! Since `∂_x W` starts at degree `k − 1 ≥ 2`, the degree-`d` part of the
//! right side only involves `W` below degree `d`: each degree is an exact
//! time integral of already known data. The linear part of the map
//! `W_d ↦ (degree-d part of ∂_t W + …)` is the identity, so there is nothing
//! to invert; the independent check is the implicit relation
//! `Φ_t(∂_η S, η) = (x, ∂_x S)` against the flow jet.

use serde::Serialize;

use super::flow_time_jet;
use crate::error::{Error, Result};
use crate::jets::{Jet, TimeJet};
use crate::symbols::SymbolModel;

/// `W(t, x, η) = S − ⟨x, η⟩ + tE_c` through spatial degree `N`, exact in `t`.
#[derive(Clone, Debug)]
pub struct GeneratingTimeJet {
    pub order: usize,
    pub w: TimeJet,
}

impl GeneratingTimeJet {
    pub fn time_degree_by_spatial_degree(&self) -> Vec<(usize, usize)> {
        (0..=self.order).filter_map(|d| self.w.time_degree_at(d).map(|p| (d, p))).collect()
    }
}

/// `S` at a fixed time with the split `W = −t(𝔭_k + R + tG)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingJet {
    pub t: f64,
    /// `S(t, x, η)` in the variables `(x, η)`.
    pub s: Jet,
    /// `−t𝔭_k`.
    pub pk_part: Jet,
    /// `−tR`, `R = p₀ − E_c − 𝔭_k`.
    pub r_part: Jet,
    /// `−t²G`.
    pub g_part: Jet,
}

pub fn generating_time_jet(s: &SymbolModel, order: usize) -> Result<GeneratingTimeJet> {
    if order > s.taylor_order() {
        return Err(Error::Domain(format!(
            "generating jet order {order} exceeds the symbol's taylor order {}",
            s.taylor_order()
        )));
    }
    let n = s.n();
    let dim = 2 * n;
    let p = s.fluctuation(order);
    let mut w = TimeJet::zero(dim, order);
    for d in s.k()..=order {
        let inner = shifted_momenta(&w, n)?;
        let rhs = TimeJet::compose_static(&p, &inner)?;
        w = w.sub(&rhs.homogeneous_part(d).integrate());
    }
    Ok(GeneratingTimeJet { order, w })
}

/// `(x, η + ∂_x W)` as time jets.
fn shifted_momenta(w: &TimeJet, n: usize) -> Result<Vec<TimeJet>> {
    let (dim, order) = (w.dim(), w.order());
    let mut out = Vec::with_capacity(dim);
    for i in 0..n {
        out.push(TimeJet::from_jet(Jet::variable(dim, order, i)));
    }
    for i in 0..n {
        let eta = TimeJet::from_jet(Jet::variable(dim, order, n + i));
        out.push(eta.add(&w.diff(i)?));
    }
    Ok(out)
}

pub fn generating_jet(s: &SymbolModel, order: usize, t: f64) -> Result<GeneratingJet> {
    let g = generating_time_jet(s, order)?;
    let (dim, n) = (2 * s.n(), s.n());
    let pk = s.leading().with_order(order);
    let r = &s.fluctuation(order) - &pk;
    let g_t = g_polynomial(&g, &pk, &r)?;

    let mut sj = g.w.eval(t);
    for i in 0..n {
        let mut a = vec![0; dim];
        a[i] = 1;
        a[n + i] = 1;
        let c = sj.coeff(&a);
        sj.set_coeff(&a, c + 1.0)?;
    }
    sj.coeffs_mut()[0] -= t * s.ec();

    Ok(GeneratingJet {
        t,
        s: sj,
        pk_part: pk.scale(-t),
        r_part: r.scale(-t),
        g_part: g_t.eval(t).scale(-t * t),
    })
}

/// `G = −(W + t(𝔭_k + R))/t²`, which exists as a polynomial in `t` only if
/// the `t⁰` and `t¹` coefficients cancel exactly.
fn g_polynomial(g: &GeneratingTimeJet, pk: &Jet, r: &Jet) -> Result<TimeJet> {
    let lin = TimeJet::from_jet(pk + r).shift_up(1);
    g.w.add(&lin).scale(-1.0).shift_down(2).ok_or_else(|| {
        Error::Internal("W + t(𝔭_k + R) has non-zero t⁰ or t¹ coefficients".into())
    })
}

/// Report of the phase-structure identities for `Ψ = S − ⟨x, ξ⟩ + tE_c`.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseStructureReport {
    /// `max |W(t) + t(𝔭_k + R + tG(t))|` over the grid.
    pub decomposition_residual: f64,
    /// `max |R_from_W − (p₀ − E_c − 𝔭_k)|`, where `R_from_W` is read off
    /// the `t¹` coefficient of `W`.
    pub r_residual: f64,
    /// Largest `t⁰` coefficient of `W`.
    pub t0_residual: f64,
    /// `W + t(𝔭_k + R)` is divisible by `t²`.
    pub g_has_t2_factor: bool,
    /// Largest coefficient of the degree-`k` part of `G` (zero when the
    /// model is `𝔭_k` alone).
    pub g_degree_k_max: f64,
    /// `max |∂_t W + 𝔭(x, η + ∂_x W)|` over all coefficients.
    pub hj_equation_residual: f64,
    pub time_degree_by_spatial_degree: Vec<(usize, usize)>,
}

pub fn phase_structure_check(s: &SymbolModel, order: usize, t_grid: &[f64]) -> Result<PhaseStructureReport> {
    let g = generating_time_jet(s, order)?;
    let pk = s.leading().with_order(order);
    let r_ref = &s.fluctuation(order) - &pk;
    let r_from_w = &g.w.time_coeff(1).scale(-1.0) - &pk;
    let g_poly = g_polynomial(&g, &pk, &r_ref);
    let g_has_t2_factor = g_poly.is_ok();
    let g_poly = g_poly.unwrap_or_else(|_| TimeJet::zero(pk.dim(), order));

    let mut dec: f64 = 0.0;
    for &t in t_grid {
        let rebuilt = (&(&pk + &r_ref) + &g_poly.eval(t).scale(t)).scale(-t);
        dec = dec.max(g.w.eval(t).max_abs_diff(&rebuilt));
    }

    let inner = shifted_momenta(&g.w, s.n())?;
    let hj = g.w.derivative().add(&TimeJet::compose_static(&s.fluctuation(order), &inner)?);

    Ok(PhaseStructureReport {
        decomposition_residual: dec,
        r_residual: r_from_w.max_abs_diff(&r_ref),
        t0_residual: g.w.time_coeff(0).max_abs(),
        g_has_t2_factor,
        g_degree_k_max: g_poly.homogeneous_part(s.k()).max_abs(),
        hj_equation_residual: hj.max_abs(),
        time_degree_by_spatial_degree: g.time_degree_by_spatial_degree(),
    })
}

/// Largest coefficient, over all powers of `t`, of
/// `Φ_t(x + ∂_η W, η) − (x, η + ∂_x W)` through degree `N − 1`.
pub fn implicit_relation_residual(s: &SymbolModel, g: &GeneratingTimeJet) -> Result<f64> {
    let m = g.order - 1;
    let n = s.n();
    let dim = 2 * n;
    let phi = flow_time_jet(s, m)?;
    let mut inner = Vec::with_capacity(dim);
    let mut target = Vec::with_capacity(dim);
    for i in 0..n {
        let x = TimeJet::from_jet(Jet::variable(dim, m, i));
        let dw = g.w.diff(n + i)?.with_order(m);
        inner.push(x.add(&dw));
        target.push(x);
    }
    for i in 0..n {
        let eta = TimeJet::from_jet(Jet::variable(dim, m, n + i));
        inner.push(eta.clone());
        target.push(eta.add(&g.w.diff(i)?.with_order(m)));
    }
    let got = TimeJet::compose_many(&phi, dim, &inner)?;
    Ok(got.iter().zip(&target).fold(0.0, |acc, (a, b)| acc.max(a.sub(b).max_abs())))
}

/// `|𝔭_k(θ)|^{1/k}`, read off the generating function: the lowest
/// spatial part of `Ψ(t, rθ)` is `t·r^k·c(θ)`, and the normal-form radius
/// `χ₁ = r|c(θ)|^{1/k}` has `∂_r χ₁ = |c(θ)|^{1/k}` at `r = 0`. The time
/// factor is removed symbolically, so the result does not depend on `t`.
pub fn normal_form_jacobian(s: &SymbolModel, t: f64, theta: &[f64]) -> Result<f64> {
    if theta.len() != s.phase_dim() {
        return Err(Error::Structural(format!("sphere point has {} entries, expected {}", theta.len(), s.phase_dim())));
    }
    let norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Domain("sphere direction must be non-zero".into()));
    }
    let u: Vec<f64> = theta.iter().map(|x| x / norm).collect();
    let g = generating_time_jet(s, s.k())?;
    let lowest = g
        .w
        .homogeneous_part(s.k())
        .shift_down(1)
        .ok_or_else(|| Error::Internal("degree-k part of Ψ is not divisible by t".into()))?;
    Ok(lowest.eval(t).eval(&u).abs().powf(1.0 / s.k() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{make_symbol, Extremum};

    fn osc2() -> SymbolModel {
        SymbolModel::osc_power(1, 2, Extremum::Minimum, 0.0, 0.0).unwrap()
    }

    fn quartic_xi() -> SymbolModel {
        let j = Jet::from_terms(2, 4, &[(vec![4, 0], 1.0), (vec![0, 4], 1.0)]).unwrap();
        make_symbol(1, 0.0, vec![j], 0.0).unwrap()
    }

    #[test]
    fn s4_is_minus_t_p4() {
        for s in [osc2(), quartic_xi()] {
            for &t in &[0.0, 0.7, -1.9] {
                let g = generating_jet(&s, 4, t).unwrap();
                let s4 = g.s.homogeneous_part(4);
                assert_eq!(s4, s.leading().scale(-t));
                assert_eq!(g.pk_part, s4);
            }
        }
    }

    #[test]
    fn at_time_zero_s_is_pairing() {
        let s = osc2().with_taylor_order(8).unwrap();
        let g = generating_jet(&s, 8, 0.0).unwrap();
        let xeta = Jet::from_terms(2, 8, &[(vec![1, 1], 1.0)]).unwrap();
        assert_eq!(g.s, xeta);
    }

    #[test]
    fn ec_enters_linearly() {
        let s = SymbolModel::osc_power(1, 2, Extremum::Minimum, 2.5, 0.0).unwrap();
        let g = generating_jet(&s, 4, 0.4).unwrap();
        assert_eq!(g.s.coeff(&[0, 0]), -0.4 * 2.5);
    }

    #[test]
    fn phase_structure_quartic_only() {
        let s = osc2().with_taylor_order(9).unwrap();
        let grid = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let rep = phase_structure_check(&s, 9, &grid).unwrap();
        assert_eq!(rep.r_residual, 0.0);
        assert_eq!(rep.t0_residual, 0.0);
        assert!(rep.g_has_t2_factor);
        assert_eq!(rep.g_degree_k_max, 0.0);
        assert!(rep.decomposition_residual < 1e-12, "{}", rep.decomposition_residual);
        assert!(rep.hj_equation_residual < 1e-12);
    }

    #[test]
    fn r5_equals_p5() {
        let p4 = Jet::from_terms(2, 4, &[(vec![4, 0], 1.0), (vec![0, 4], 1.0)]).unwrap();
        let p5 = Jet::from_terms(2, 5, &[(vec![5, 0], 0.4), (vec![1, 4], -0.1)]).unwrap();
        let s = make_symbol(1, 0.0, vec![p4, p5.clone()], 0.0).unwrap().with_taylor_order(7).unwrap();
        let g = generating_jet(&s, 7, 1.3).unwrap();
        assert_eq!(g.r_part, p5.with_order(7).scale(-1.3));
        let rep = phase_structure_check(&s, 7, &[-2.0, 0.5, 2.0]).unwrap();
        assert_eq!(rep.r_residual, 0.0);
        assert!(rep.g_has_t2_factor);
    }

    #[test]
    fn implicit_relation_holds() {
        let s = quartic_xi().with_taylor_order(9).unwrap();
        let g = generating_time_jet(&s, 9).unwrap();
        let r = implicit_relation_residual(&s, &g).unwrap();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn implicit_relation_detects_a_wrong_w() {
        let s = quartic_xi().with_taylor_order(8).unwrap();
        let mut g = generating_time_jet(&s, 8).unwrap();
        let bump = TimeJet::from_jet(Jet::from_terms(2, 8, &[(vec![3, 3], 1e-3)]).unwrap()).shift_up(2);
        g.w = g.w.add(&bump);
        assert!(implicit_relation_residual(&s, &g).unwrap() > 1e-4);
    }

    #[test]
    fn jacobian_examples() {
        let s = osc2();
        assert!((normal_form_jacobian(&s, 1.0, &[0.3, -0.9]).unwrap() - 1.0).abs() < 1e-15);
        let q = quartic_xi();
        assert_eq!(normal_form_jacobian(&q, 2.0, &[1.0, 0.0]).unwrap(), 1.0);
        let diag = normal_form_jacobian(&q, 2.0, &[1.0, 1.0]).unwrap();
        assert!((diag - 0.5f64.powf(0.25)).abs() < 1e-15);
        let a = normal_form_jacobian(&q, 0.0, &[0.2, 0.7]).unwrap();
        let b = normal_form_jacobian(&q, 5.0, &[0.2, 0.7]).unwrap();
        assert_eq!(a, b);
    }
}
