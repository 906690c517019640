//! Truncated multivariate Taylor polynomials.
//!
//! A [`Jet`] stores every coefficient of total degree ≤ `order` densely, in
//! the graded-lex order of [`basis::Basis`]. Products and compositions drop
//! everything above `order`.

pub mod basis;
pub mod partitions;
mod serial;
pub mod time;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use basis::Basis;

pub use time::TimeJet;

#[derive(Clone)]
pub struct Jet {
    basis: Arc<Basis>,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn zero(dim: usize, order: usize) -> Jet {
        let basis = Basis::get(dim, order);
        let coeffs = vec![0.0; basis.len()];
        Jet { basis, coeffs }
    }

    pub fn constant(dim: usize, order: usize, c: f64) -> Jet {
        let mut j = Jet::zero(dim, order);
        j.coeffs[0] = c;
        j
    }

    /// The coordinate function `z_i` (0-based). Zero when `order == 0`.
    pub fn variable(dim: usize, order: usize, i: usize) -> Jet {
        assert!(i < dim, "variable index {i} out of range for dim {dim}");
        let mut j = Jet::zero(dim, order);
        if order >= 1 {
            let mut a = vec![0; dim];
            a[i] = 1;
            let idx = j.basis.index_of(&a).unwrap();
            j.coeffs[idx] = 1.0;
        }
        j
    }

    /// Builds a jet from `(alpha, coefficient)` pairs; repeated multi-indices
    /// are summed.
    pub fn from_terms(dim: usize, order: usize, terms: &[(Vec<usize>, f64)]) -> Result<Jet> {
        if dim == 0 || dim > basis::MAX_DIM {
            return Err(Error::Domain(format!("jet dimension {dim} outside 1..={}", basis::MAX_DIM)));
        }
        let mut j = Jet::zero(dim, order);
        for (alpha, c) in terms {
            if alpha.len() != dim {
                return Err(Error::Structural(format!(
                    "multi-index {alpha:?} has length {} but dim is {dim}",
                    alpha.len()
                )));
            }
            let idx = j.basis.index_of(alpha).ok_or_else(|| {
                Error::Domain(format!("multi-index {alpha:?} exceeds order {order}"))
            })?;
            j.coeffs[idx] += c;
        }
        Ok(j)
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    pub fn order(&self) -> usize {
        self.basis.order
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Dense coefficient vector in graded-lex order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient of `z^alpha`; exactly 0 for anything not stored.
    pub fn coeff(&self, alpha: &[usize]) -> f64 {
        self.basis.index_of(alpha).map_or(0.0, |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, alpha: &[usize], c: f64) -> Result<()> {
        let idx = self.basis.index_of(alpha).ok_or_else(|| {
            Error::Domain(format!("multi-index {alpha:?} not representable at order {}", self.order()))
        })?;
        self.coeffs[idx] = c;
        Ok(())
    }

    /// Non-zero terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(i, &c)| {
            (self.basis.alpha(i).iter().map(|&a| a as usize).collect(), c)
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest coefficient difference. Jets of different order are compared
    /// up to the smaller order.
    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let order = self.order().min(other.order());
        let a = self.with_order(order);
        let b = other.with_order(order);
        a.coeffs.iter().zip(&b.coeffs).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    /// Lowest total degree carrying a non-zero coefficient.
    pub fn lowest_degree(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0.0).map(|i| self.basis.degree_of(i))
    }

    /// Highest total degree carrying a non-zero coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0).map(|i| self.basis.degree_of(i))
    }

    pub fn is_homogeneous_of(&self, d: usize) -> bool {
        let r = self.basis.degree_range(d);
        self.coeffs.iter().enumerate().all(|(i, &c)| c == 0.0 || r.contains(&i))
    }

    /// Same polynomial re-embedded at another truncation order. Raising the
    /// order pads with zeros; lowering it truncates.
    pub fn with_order(&self, order: usize) -> Jet {
        if order == self.order() {
            return self.clone();
        }
        let mut out = Jet::zero(self.dim(), order);
        let top = order.min(self.order());
        let n = self.basis.degree_range(top).end;
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        out
    }

    fn check_same(&self, other: &Jet, op: &str) -> Result<()> {
        if self.dim() != other.dim() || self.order() != other.order() {
            return Err(Error::Structural(format!(
                "{op}: (dim {}, order {}) vs (dim {}, order {})",
                self.dim(),
                self.order(),
                other.dim(),
                other.order()
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other, "add")?;
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a += b);
        Ok(out)
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other, "sub")?;
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a -= b);
        Ok(out)
    }

    /// Truncated Cauchy product.
    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other, "mul")?;
        let mut out = Jet::zero(self.dim(), self.order());
        mul_acc(&self.basis, &self.coeffs, &other.coeffs, &mut out.coeffs);
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Jet) {
        assert!(self.dim() == other.dim() && self.order() == other.order(), "axpy shape mismatch");
        self.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a += s * b);
    }

    /// Formal partial derivative in variable `i` (0-based). The stored order
    /// is kept; the top degree becomes zero.
    pub fn diff(&self, i: usize) -> Result<Jet> {
        if i >= self.dim() {
            return Err(Error::Domain(format!("variable index {i} out of range for dim {}", self.dim())));
        }
        let mut out = Jet::zero(self.dim(), self.order());
        let mut a = vec![0usize; self.dim()];
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let alpha = self.basis.alpha(idx);
            if alpha[i] == 0 {
                continue;
            }
            for (dst, &src) in a.iter_mut().zip(alpha) {
                *dst = src as usize;
            }
            let e = a[i];
            a[i] -= 1;
            let t = self.basis.index_of(&a).unwrap();
            out.coeffs[t] += c * e as f64;
        }
        Ok(out)
    }

    /// Degree-`j` homogeneous component; zero if `j > order`.
    pub fn homogeneous_part(&self, j: usize) -> Jet {
        let mut out = Jet::zero(self.dim(), self.order());
        let r = self.basis.degree_range(j);
        out.coeffs[r.clone()].copy_from_slice(&self.coeffs[r]);
        out
    }

    /// Sum of the components of degree `lo..=hi`.
    pub fn degree_band(&self, lo: usize, hi: usize) -> Jet {
        let mut out = Jet::zero(self.dim(), self.order());
        for d in lo..=hi.min(self.order()) {
            let r = self.basis.degree_range(d);
            out.coeffs[r.clone()].copy_from_slice(&self.coeffs[r]);
        }
        out
    }

    /// Taylor expansion of `self ∘ g` truncated at the common order of `g`.
    ///
    /// Each `g_i` must vanish at the base point. Monomial products
    /// `g^α` are built once along the basis parent chain, so each costs a
    /// single truncated product.
    pub fn compose(&self, g: &[Jet]) -> Result<Jet> {
        check_inner(self.dim(), g)?;
        let (dim, order) = (g[0].dim(), g[0].order());
        let prods = monomial_products(g, self.order().min(order));
        let mut out = Jet::zero(dim, order);
        for (idx, p) in prods.iter().enumerate() {
            let c = self.coeffs[idx];
            if c != 0.0 {
                out.axpy(c, p);
            }
        }
        Ok(out)
    }

    /// Value at a point.
    pub fn eval(&self, z: &[f64]) -> f64 {
        assert_eq!(z.len(), self.dim(), "point dimension mismatch");
        let mut mono = vec![0.0; self.basis.len()];
        mono[0] = 1.0;
        let mut acc = self.coeffs[0];
        for idx in 1..self.basis.len() {
            let (p, v) = self.basis.parent(idx);
            mono[idx] = mono[p] * z[v];
            acc += self.coeffs[idx] * mono[idx];
        }
        acc
    }
}

fn check_inner(outer_dim: usize, g: &[Jet]) -> Result<()> {
    if g.len() != outer_dim {
        return Err(Error::Structural(format!(
            "compose: outer jet has {outer_dim} variables, {} inner jets given",
            g.len()
        )));
    }
    let (dim, order) = (g[0].dim(), g[0].order());
    for (i, gi) in g.iter().enumerate() {
        if gi.dim() != dim || gi.order() != order {
            return Err(Error::Structural(format!("compose: inner jet {i} has mismatched shape")));
        }
        if gi.coeffs[0] != 0.0 {
            return Err(Error::Domain(format!(
                "compose: inner jet {i} has constant term {} (must vanish at the base point)",
                gi.coeffs[0]
            )));
        }
    }
    Ok(())
}

/// `g^α` for every monomial `α` of the outer basis up to `top` degree.
fn monomial_products(g: &[Jet], top: usize) -> Vec<Jet> {
    let (dim, order) = (g[0].dim(), g[0].order());
    let outer = Basis::get(g.len(), top);
    let mut prods: Vec<Jet> = Vec::with_capacity(outer.len());
    prods.push(Jet::constant(dim, order, 1.0));
    for idx in 1..outer.len() {
        let (p, v) = outer.parent(idx);
        let next = if outer.degree_of(idx) > order {
            Jet::zero(dim, order)
        } else {
            let mut out = Jet::zero(dim, order);
            mul_acc(&g[v].basis, &prods[p].coeffs, &g[v].coeffs, &mut out.coeffs);
            out
        };
        prods.push(next);
    }
    prods
}

/// `out += a * b`, truncated.
pub(crate) fn mul_acc(basis: &Basis, a: &[f64], b: &[f64], out: &mut [f64]) {
    let order = basis.order;
    for da in 0..=order {
        let ra = basis.degree_range(da);
        for i in ra {
            let ai = a[i];
            if ai == 0.0 {
                continue;
            }
            let rb = basis.degree_range(order - da);
            for j in 0..rb.end {
                let bj = b[j];
                if bj != 0.0 {
                    out[basis.sum_index(i, j)] += ai * bj;
                }
            }
        }
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Jet) -> bool {
        self.dim() == other.dim() && self.order() == other.order() && self.coeffs == other.coeffs
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(dim={}, order={}; ", self.dim(), self.order())?;
        let mut first = true;
        for (a, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}·{a:?}")?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.try_add(rhs).expect("jet add")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.try_sub(rhs).expect("jet sub")
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.try_mul(rhs).expect("jet mul")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// An ordered list of jets sharing one basis; the Taylor data of a map.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorJet {
    components: Vec<Jet>,
}

impl VectorJet {
    pub fn new(components: Vec<Jet>) -> Result<VectorJet> {
        let first = components
            .first()
            .ok_or_else(|| Error::Structural("vector jet needs at least one component".into()))?;
        let (dim, order) = (first.dim(), first.order());
        if components.iter().any(|c| c.dim() != dim || c.order() != order) {
            return Err(Error::Structural("vector jet components differ in dim/order".into()));
        }
        Ok(VectorJet { components })
    }

    /// The identity map `z ↦ z`.
    pub fn identity(dim: usize, order: usize) -> VectorJet {
        VectorJet { components: (0..dim).map(|i| Jet::variable(dim, order, i)).collect() }
    }

    pub fn components(&self) -> &[Jet] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Jet> {
        self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn order(&self) -> usize {
        self.components[0].order()
    }

    /// Component-wise `self ∘ g`.
    pub fn compose(&self, g: &VectorJet) -> Result<VectorJet> {
        check_inner(self.dim(), &g.components)?;
        let top = self.order().min(g.order());
        let prods = monomial_products(&g.components, top);
        let comps = self
            .components
            .iter()
            .map(|f| {
                let mut out = Jet::zero(g.dim(), g.order());
                for (idx, p) in prods.iter().enumerate() {
                    let c = f.coeffs[idx];
                    if c != 0.0 {
                        out.axpy(c, p);
                    }
                }
                out
            })
            .collect();
        Ok(VectorJet { components: comps })
    }

    pub fn homogeneous_part(&self, d: usize) -> VectorJet {
        VectorJet { components: self.components.iter().map(|c| c.homogeneous_part(d)).collect() }
    }

    pub fn with_order(&self, order: usize) -> VectorJet {
        VectorJet { components: self.components.iter().map(|c| c.with_order(order)).collect() }
    }

    pub fn scale(&self, s: f64) -> VectorJet {
        VectorJet { components: self.components.iter().map(|c| c.scale(s)).collect() }
    }

    pub fn eval(&self, z: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(z)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn max_abs_diff(&self, other: &VectorJet) -> f64 {
        assert_eq!(self.len(), other.len(), "vector jet length mismatch");
        self.components.iter().zip(&other.components).fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j1(order: usize, terms: &[(usize, f64)]) -> Jet {
        let t: Vec<(Vec<usize>, f64)> = terms.iter().map(|&(a, c)| (vec![a], c)).collect();
        Jet::from_terms(1, order, &t).unwrap()
    }

    fn j2(order: usize, terms: &[([usize; 2], f64)]) -> Jet {
        let t: Vec<(Vec<usize>, f64)> = terms.iter().map(|&(a, c)| (a.to_vec(), c)).collect();
        Jet::from_terms(2, order, &t).unwrap()
    }

    #[test]
    fn add_examples() {
        let a = j1(2, &[(0, 1.0), (1, 1.0)]);
        let b = j1(2, &[(0, 1.0), (1, -1.0)]);
        assert_eq!(&a + &b, j1(2, &[(0, 2.0)]));
        assert_eq!(&a + &Jet::zero(1, 2), a);
        assert_eq!(&j1(2, &[(2, 1.0)]) + &j1(2, &[(2, 2.0)]), j1(2, &[(2, 3.0)]));
    }

    #[test]
    fn add_mismatch_is_structural() {
        let e = Jet::zero(1, 2).try_add(&Jet::zero(1, 3)).unwrap_err();
        assert!(matches!(e, Error::Structural(_)));
        let e = Jet::zero(1, 2).try_mul(&Jet::zero(2, 2)).unwrap_err();
        assert!(matches!(e, Error::Structural(_)));
    }

    #[test]
    fn mul_examples() {
        let a = j1(2, &[(0, 1.0), (1, 1.0)]);
        assert_eq!(&a * &a, j1(2, &[(0, 1.0), (1, 2.0), (2, 1.0)]));
        let x = j1(1, &[(1, 1.0)]);
        assert!((&x * &x).is_zero());
        let p = j2(2, &[([1, 0], 1.0), ([0, 1], 1.0)]);
        let m = j2(2, &[([1, 0], 1.0), ([0, 1], -1.0)]);
        assert_eq!(&p * &m, j2(2, &[([2, 0], 1.0), ([0, 2], -1.0)]));
    }

    #[test]
    fn compose_examples() {
        let f = j1(3, &[(2, 1.0)]);
        let g = j1(3, &[(1, 1.0), (2, 1.0)]);
        assert_eq!(f.compose(std::slice::from_ref(&g)).unwrap(), j1(3, &[(2, 1.0), (3, 2.0)]));

        let id = VectorJet::identity(2, 3);
        let g2 = VectorJet::new(vec![
            j2(3, &[([1, 0], 1.0), ([1, 1], 2.0)]),
            j2(3, &[([0, 1], 3.0), ([0, 3], -1.0)]),
        ])
        .unwrap();
        assert_eq!(id.compose(&g2).unwrap(), g2);

        let f = j2(3, &[([1, 1], 1.0)]);
        let gx = j1(3, &[(1, 1.0)]);
        let gxx = j1(3, &[(2, 1.0)]);
        assert_eq!(f.compose(&[gx, gxx]).unwrap(), j1(3, &[(3, 1.0)]));
    }

    #[test]
    fn compose_rejects_base_point_shift() {
        let f = j1(2, &[(2, 1.0)]);
        let g = j1(2, &[(0, 0.5), (1, 1.0)]);
        assert!(matches!(f.compose(&[g]).unwrap_err(), Error::Domain(_)));
    }

    #[test]
    fn diff_examples() {
        let a = j2(3, &[([2, 1], 1.0)]);
        assert_eq!(a.diff(0).unwrap(), j2(3, &[([1, 1], 2.0)]));
        assert!(j2(3, &[([2, 0], 1.0)]).diff(1).unwrap().is_zero());
        let q = j2(4, &[([2, 0], 1.0), ([0, 2], 1.0)]);
        let q2 = &q * &q;
        let expect = j2(4, &[([3, 0], 4.0), ([1, 2], 4.0)]);
        assert_eq!(q2.diff(0).unwrap(), expect);
        assert!(matches!(q2.diff(2).unwrap_err(), Error::Domain(_)));
    }

    #[test]
    fn homogeneous_examples() {
        let q = j2(5, &[([2, 0], 1.0), ([0, 2], 1.0)]);
        let q2 = &q * &q;
        assert_eq!(q2.homogeneous_part(4), q2);
        assert!(j1(3, &[(0, 1.0), (3, 1.0)]).homogeneous_part(2).is_zero());
        let a = j2(5, &[([4, 0], 1.0), ([0, 4], 1.0), ([5, 0], 1.0)]);
        assert_eq!(a.homogeneous_part(4), j2(5, &[([4, 0], 1.0), ([0, 4], 1.0)]));
    }

    #[test]
    fn absent_coefficients_are_zero() {
        let a = j2(2, &[([1, 1], 3.0)]);
        assert_eq!(a.coeff(&[1, 1]), 3.0);
        assert_eq!(a.coeff(&[5, 0]), 0.0);
        assert_eq!(a.coeff(&[1]), 0.0);
    }

    #[test]
    fn eval_matches_terms() {
        let a = j2(4, &[([0, 0], 1.0), ([3, 1], -2.0), ([0, 2], 0.5)]);
        let v = a.eval(&[0.3, -1.2]);
        let expect = 1.0 - 2.0 * 0.3f64.powi(3) * -1.2 + 0.5 * 1.44;
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn with_order_roundtrip() {
        let a = j2(3, &[([1, 0], 1.0), ([2, 1], 2.0)]);
        assert_eq!(a.with_order(5).with_order(3), a);
        assert_eq!(a.with_order(2), j2(2, &[([1, 0], 1.0)]));
    }
}
