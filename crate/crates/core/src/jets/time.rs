//! Jets whose coefficients are polynomials in an extra time variable.
//!
//! `TimeJet` is `Σ_p t^p J_p` with spatial jets `J_p` on a shared basis.
//! Time is never truncated; spatial products are. Integration in `t` is
//! exact monomial antidifferentiation.

use super::{check_inner, mul_acc, Basis, Jet};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct TimeJet {
    dim: usize,
    order: usize,
    coeffs: Vec<Jet>,
}

impl TimeJet {
    pub fn zero(dim: usize, order: usize) -> TimeJet {
        TimeJet { dim, order, coeffs: Vec::new() }
    }

    /// Time-independent jet.
    pub fn from_jet(j: Jet) -> TimeJet {
        let mut tj = TimeJet { dim: j.dim(), order: j.order(), coeffs: vec![j] };
        tj.trim();
        tj
    }

    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<Jet>) -> TimeJet {
        assert!(coeffs.iter().all(|c| c.dim() == dim && c.order() == order), "time jet shape mismatch");
        let mut tj = TimeJet { dim, order, coeffs };
        tj.trim();
        tj
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Spatial jet multiplying `t^p`.
    pub fn time_coeff(&self, p: usize) -> Jet {
        self.coeffs.get(p).cloned().unwrap_or_else(|| Jet::zero(self.dim, self.order))
    }

    pub fn time_coeffs(&self) -> &[Jet] {
        &self.coeffs
    }

    /// Highest power of `t` present; `None` for the zero jet.
    pub fn time_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|j| j.is_zero()) {
            self.coeffs.pop();
        }
    }

    fn zero_jet(&self) -> Jet {
        Jet::zero(self.dim, self.order)
    }

    pub fn add(&self, other: &TimeJet) -> TimeJet {
        assert!(self.dim == other.dim && self.order == other.order, "time jet shape mismatch");
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|p| match (self.coeffs.get(p), other.coeffs.get(p)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        TimeJet::from_coeffs(self.dim, self.order, coeffs)
    }

    pub fn sub(&self, other: &TimeJet) -> TimeJet {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> TimeJet {
        TimeJet::from_coeffs(self.dim, self.order, self.coeffs.iter().map(|c| c.scale(s)).collect())
    }

    pub fn mul(&self, other: &TimeJet) -> TimeJet {
        assert!(self.dim == other.dim && self.order == other.order, "time jet shape mismatch");
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return TimeJet::zero(self.dim, self.order);
        }
        let basis = Basis::get(self.dim, self.order);
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out: Vec<Jet> = (0..n).map(|_| self.zero_jet()).collect();
        for (p, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (q, b) in other.coeffs.iter().enumerate() {
                mul_acc(&basis, a.coeffs(), b.coeffs(), out[p + q].coeffs_mut());
            }
        }
        TimeJet::from_coeffs(self.dim, self.order, out)
    }

    /// `∫₀^t`, exact.
    pub fn integrate(&self) -> TimeJet {
        let mut coeffs = vec![self.zero_jet()];
        coeffs.extend(self.coeffs.iter().enumerate().map(|(p, c)| c.scale(1.0 / (p as f64 + 1.0))));
        TimeJet::from_coeffs(self.dim, self.order, coeffs)
    }

    /// `∂_t`.
    pub fn derivative(&self) -> TimeJet {
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(p, c)| c.scale(p as f64)).collect();
        TimeJet::from_coeffs(self.dim, self.order, coeffs)
    }

    /// Divides by `t^s`; the dropped low powers must be zero.
    pub fn shift_down(&self, s: usize) -> Option<TimeJet> {
        if self.coeffs.iter().take(s).any(|c| !c.is_zero()) {
            return None;
        }
        let coeffs = self.coeffs.iter().skip(s).cloned().collect();
        Some(TimeJet::from_coeffs(self.dim, self.order, coeffs))
    }

    /// Multiplies by `t^s`.
    pub fn shift_up(&self, s: usize) -> TimeJet {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let mut coeffs: Vec<Jet> = (0..s).map(|_| self.zero_jet()).collect();
        coeffs.extend(self.coeffs.iter().cloned());
        TimeJet::from_coeffs(self.dim, self.order, coeffs)
    }

    /// Applies a spatial map to every time coefficient.
    pub fn map_spatial(&self, f: impl Fn(&Jet) -> Jet) -> TimeJet {
        TimeJet::from_coeffs(self.dim, self.order, self.coeffs.iter().map(f).collect())
    }

    /// Truncates or extends every time coefficient to spatial order `order`.
    pub fn with_order(&self, order: usize) -> TimeJet {
        TimeJet::from_coeffs(self.dim, order, self.coeffs.iter().map(|c| c.with_order(order)).collect())
    }

    pub fn homogeneous_part(&self, d: usize) -> TimeJet {
        self.map_spatial(|c| c.homogeneous_part(d))
    }

    pub fn diff(&self, i: usize) -> Result<TimeJet> {
        let coeffs = self.coeffs.iter().map(|c| c.diff(i)).collect::<Result<Vec<_>>>()?;
        Ok(TimeJet::from_coeffs(self.dim, self.order, coeffs))
    }

    /// Spatial jet at time `t` (Horner in `t`).
    pub fn eval(&self, t: f64) -> Jet {
        let mut acc = self.zero_jet();
        for c in self.coeffs.iter().rev() {
            acc = acc.scale(t);
            acc.axpy(1.0, c);
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    /// Largest time power carried by the degree-`d` spatial component.
    pub fn time_degree_at(&self, d: usize) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.homogeneous_part(d).is_zero())
    }

    /// `f ∘ g` for a time-independent outer jet `f`.
    pub fn compose_static(f: &Jet, g: &[TimeJet]) -> Result<TimeJet> {
        let out = Self::compose_many(std::slice::from_ref(&TimeJet::from_jet(f.clone())), f.dim(), g)?;
        Ok(out.into_iter().next().unwrap())
    }

    /// `f_c(t) ∘ g(t)` for each time-dependent outer jet `f_c`, sharing the
    /// monomial products of `g`.
    pub fn compose_many(fs: &[TimeJet], outer_dim: usize, g: &[TimeJet]) -> Result<Vec<TimeJet>> {
        let (dim, order) = (g[0].dim, g[0].order);
        let heads: Vec<Jet> = g.iter().map(|gi| gi.time_coeff(0)).collect();
        check_inner(outer_dim, &heads)?;
        if g.iter().any(|gi| gi.dim != dim || gi.order != order) {
            return Err(crate::Error::Structural("compose: inner time jets differ in shape".into()));
        }
        for (i, gi) in g.iter().enumerate() {
            if gi.coeffs.iter().any(|c| c.coeffs()[0] != 0.0) {
                return Err(crate::Error::Domain(format!(
                    "compose: inner time jet {i} has a non-zero constant term"
                )));
            }
        }
        let top = fs.iter().map(|f| f.order).max().unwrap_or(0).min(order);
        let outer = Basis::get(outer_dim, top);
        let mut prods: Vec<TimeJet> = Vec::with_capacity(outer.len());
        prods.push(TimeJet::from_jet(Jet::constant(dim, order, 1.0)));
        for idx in 1..outer.len() {
            let (p, v) = outer.parent(idx);
            let next = if outer.degree_of(idx) > order {
                TimeJet::zero(dim, order)
            } else {
                prods[p].mul(&g[v])
            };
            prods.push(next);
        }
        let mut out = Vec::with_capacity(fs.len());
        for f in fs {
            let mut acc = TimeJet::zero(dim, order);
            for (q, fq) in f.coeffs.iter().enumerate() {
                let fq = fq.with_order(top);
                let mut part = TimeJet::zero(dim, order);
                for (idx, pr) in prods.iter().enumerate() {
                    let c = fq.coeffs()[idx];
                    if c != 0.0 {
                        part = part.add(&pr.scale(c));
                    }
                }
                acc = acc.add(&part.shift_up(q));
            }
            out.push(acc);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(order: usize) -> Jet {
        Jet::variable(1, order, 0)
    }

    #[test]
    fn integrate_and_differentiate() {
        let a = TimeJet::from_coeffs(1, 3, vec![x(3), x(3).scale(2.0)]);
        let i = a.integrate();
        assert_eq!(i.time_coeff(0), Jet::zero(1, 3));
        assert_eq!(i.time_coeff(1), x(3));
        assert_eq!(i.time_coeff(2), x(3));
        assert_eq!(i.derivative(), a);
    }

    #[test]
    fn eval_is_horner() {
        let a = TimeJet::from_coeffs(1, 2, vec![x(2), x(2).scale(3.0), x(2).scale(-1.0)]);
        let t = 0.7f64;
        let v = a.eval(t).coeff(&[1]);
        assert!((v - (1.0 + 3.0 * t - t * t)).abs() < 1e-15);
    }

    #[test]
    fn compose_static_matches_pointwise() {
        // f(y) = y², g(t, x) = x + t x²
        let f = Jet::from_terms(1, 4, &[(vec![2], 1.0)]).unwrap();
        let g = TimeJet::from_coeffs(1, 4, vec![x(4), &x(4) * &x(4)]);
        let h = TimeJet::compose_static(&f, std::slice::from_ref(&g)).unwrap();
        for &t in &[-1.5, 0.0, 0.4, 2.0] {
            let direct = f.compose(&[g.eval(t)]).unwrap();
            assert!(h.eval(t).max_abs_diff(&direct) < 1e-13);
        }
    }
}
