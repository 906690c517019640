//! Faà di Bruno coefficients from explicit set partitions.
//!
//! `d^m (f∘g) = Σ_π f^{(|π|)}(g) Π_{B∈π} g^{(|B|)}`, summed over set
//! partitions `π` of `{1..m}`. Grouping partitions by their multiset of
//! block sizes gives the integer weights used here; they are counted by
//! enumeration rather than taken from a closed form.

use std::collections::BTreeMap;

/// Multisets of block sizes (descending) with the number of set
/// partitions of `{1..m}` realising each.
pub fn block_size_counts(m: usize) -> Vec<(Vec<usize>, u64)> {
    let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    if m == 0 {
        return vec![(Vec::new(), 1)];
    }
    // restricted growth strings: a[0] = 0, a[i] ≤ 1 + max(a[..i])
    let mut a = vec![0usize; m];
    loop {
        let blocks = a.iter().max().unwrap() + 1;
        let mut sizes = vec![0usize; blocks];
        for &b in &a {
            sizes[b] += 1;
        }
        sizes.sort_unstable_by(|x, y| y.cmp(x));
        *counts.entry(sizes).or_insert(0) += 1;

        let mut i = m - 1;
        loop {
            if i == 0 {
                return counts.into_iter().collect();
            }
            let prefix_max = a[..i].iter().copied().max().unwrap();
            if a[i] <= prefix_max {
                a[i] += 1;
                for x in a.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Derivatives `(f∘g)^{(j)}(0)` for `j = 0..=m`, given the derivatives of
/// `f` at `g(0)` and of `g` at 0 (both with at least `m + 1` entries).
pub fn compose_derivatives(f_derivs: &[f64], g_derivs: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![f_derivs[0]];
    for order in 1..=m {
        let mut acc = 0.0;
        for (sizes, count) in block_size_counts(order) {
            let prod: f64 = sizes.iter().map(|&s| g_derivs[s]).product();
            acc += count as f64 * f_derivs[sizes.len()] * prod;
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Jet;

    #[test]
    fn bell_numbers() {
        let bell = [1u64, 1, 2, 5, 15, 52, 203, 877, 4140];
        for (m, &b) in bell.iter().enumerate() {
            let total: u64 = block_size_counts(m).iter().map(|(_, c)| c).sum();
            assert_eq!(total, b, "m = {m}");
        }
    }

    #[test]
    fn known_weights_m4() {
        let c = block_size_counts(4);
        let get = |s: &[usize]| c.iter().find(|(k, _)| k == s).map(|(_, v)| *v).unwrap();
        assert_eq!(get(&[4]), 1);
        assert_eq!(get(&[3, 1]), 4);
        assert_eq!(get(&[2, 2]), 3);
        assert_eq!(get(&[2, 1, 1]), 6);
        assert_eq!(get(&[1, 1, 1, 1]), 1);
    }

    #[test]
    fn agrees_with_jet_composition() {
        // f(y) = Σ a_i y^i, g(x) = Σ b_i x^i with b_0 = 0, order 6
        let m = 6;
        let a = [0.7, -1.1, 0.4, 2.0, -0.3, 0.9, 1.3];
        let b = [0.0, 1.5, -0.2, 0.8, 0.05, -0.6, 0.25];
        let fa: Vec<(Vec<usize>, f64)> = a.iter().enumerate().map(|(i, &c)| (vec![i], c)).collect();
        let gb: Vec<(Vec<usize>, f64)> = b.iter().enumerate().map(|(i, &c)| (vec![i], c)).collect();
        let f = Jet::from_terms(1, m, &fa).unwrap();
        let g = Jet::from_terms(1, m, &gb).unwrap();
        let h = f.compose(&[g]).unwrap();

        let fact = |n: usize| (1..=n).product::<usize>() as f64;
        let fd: Vec<f64> = a.iter().enumerate().map(|(i, c)| c * fact(i)).collect();
        let gd: Vec<f64> = b.iter().enumerate().map(|(i, c)| c * fact(i)).collect();
        let d = compose_derivatives(&fd, &gd, m);
        for (j, dj) in d.iter().enumerate().take(m + 1) {
            let via_jet = h.coeff(&[j]) * fact(j);
            assert!((via_jet - dj).abs() < 1e-10 * (1.0 + dj.abs()), "order {j}: {via_jet} vs {dj}");
        }
    }
}
