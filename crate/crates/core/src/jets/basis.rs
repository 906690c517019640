//! Monomial bases for dense jets.
//!
//! Monomials of total degree ≤ `order` in `dim` variables are listed in
//! graded-lex order: by total degree, then lexicographically with larger
//! leading exponents first (`x²` before `xy` before `y²`).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub const MAX_DIM: usize = 4;

const ABSENT: u32 = u32::MAX;

#[derive(Debug)]
pub struct Basis {
    pub dim: usize,
    pub order: usize,
    alphas: Vec<[u8; MAX_DIM]>,
    degree_start: Vec<usize>,
    keys: Vec<u32>,
    table: Vec<u32>,
    parents: Vec<(usize, usize)>,
}

impl Basis {
    fn build(dim: usize, order: usize) -> Basis {
        assert!((1..=MAX_DIM).contains(&dim), "jet dimension {dim} outside 1..={MAX_DIM}");
        let mut alphas = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for d in 0..=order {
            degree_start.push(alphas.len());
            let mut cur = [0u8; MAX_DIM];
            push_degree(&mut alphas, &mut cur, 0, dim, d);
        }
        degree_start.push(alphas.len());

        let radix = order as u32 + 1;
        let table_len = (radix as usize).pow(dim as u32);
        let mut table = vec![ABSENT; table_len];
        let mut keys = Vec::with_capacity(alphas.len());
        for (idx, a) in alphas.iter().enumerate() {
            let key = key_of(a, dim, radix);
            table[key as usize] = idx as u32;
            keys.push(key);
        }

        // parent = alpha minus one unit in its first non-zero slot
        let mut parents = vec![(0, 0); alphas.len()];
        for (idx, a) in alphas.iter().enumerate().skip(1) {
            let var = (0..dim).find(|&i| a[i] > 0).unwrap();
            let mut p = *a;
            p[var] -= 1;
            parents[idx] = (table[key_of(&p, dim, radix) as usize] as usize, var);
        }

        Basis { dim, order, alphas, degree_start, keys, table, parents }
    }

    /// Shared basis for `(dim, order)`.
    pub fn get(dim: usize, order: usize) -> Arc<Basis> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Basis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((dim, order))
            .or_insert_with(|| Arc::new(Basis::build(dim, order)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Index range of the monomials of total degree `d`.
    pub fn degree_range(&self, d: usize) -> std::ops::Range<usize> {
        if d > self.order {
            return 0..0;
        }
        self.degree_start[d]..self.degree_start[d + 1]
    }

    pub fn degree_of(&self, idx: usize) -> usize {
        self.degree_start.partition_point(|&s| s <= idx) - 1
    }

    pub fn alpha(&self, idx: usize) -> &[u8] {
        &self.alphas[idx][..self.dim]
    }

    pub fn index_of(&self, alpha: &[usize]) -> Option<usize> {
        if alpha.len() != self.dim || alpha.iter().sum::<usize>() > self.order {
            return None;
        }
        let radix = self.order + 1;
        let key = alpha.iter().fold(0usize, |k, &a| k * radix + a);
        match self.table[key] {
            ABSENT => None,
            i => Some(i as usize),
        }
    }

    /// Index of `alpha(i) + alpha(j)`; the caller guarantees the total
    /// degree stays within `order`.
    #[inline]
    pub fn sum_index(&self, i: usize, j: usize) -> usize {
        self.table[(self.keys[i] + self.keys[j]) as usize] as usize
    }

    /// Index of `alpha(idx) - e_var` and `var`, for `idx > 0`.
    #[inline]
    pub fn parent(&self, idx: usize) -> (usize, usize) {
        self.parents[idx]
    }
}

fn push_degree(out: &mut Vec<[u8; MAX_DIM]>, cur: &mut [u8; MAX_DIM], slot: usize, dim: usize, left: usize) {
    if slot + 1 == dim {
        cur[slot] = left as u8;
        out.push(*cur);
        return;
    }
    for a in (0..=left).rev() {
        cur[slot] = a as u8;
        push_degree(out, cur, slot + 1, dim, left - a);
    }
    cur[slot] = 0;
}

fn key_of(a: &[u8; MAX_DIM], dim: usize, radix: u32) -> u32 {
    a[..dim].iter().fold(0u32, |k, &x| k * radix + x as u32)
}

/// Number of monomials of total degree ≤ `order` in `dim` variables.
pub fn basis_size(dim: usize, order: usize) -> usize {
    binomial(order + dim, dim) as usize
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order_dim2() {
        let b = Basis::get(2, 2);
        let listed: Vec<Vec<u8>> = (0..b.len()).map(|i| b.alpha(i).to_vec()).collect();
        assert_eq!(
            listed,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }

    #[test]
    fn sizes_and_lookup_roundtrip() {
        for dim in 1..=4 {
            for order in 0..=7 {
                let b = Basis::get(dim, order);
                assert_eq!(b.len(), basis_size(dim, order));
                for i in 0..b.len() {
                    let a: Vec<usize> = b.alpha(i).iter().map(|&x| x as usize).collect();
                    assert_eq!(b.index_of(&a), Some(i));
                    assert_eq!(b.degree_of(i), a.iter().sum::<usize>());
                    if i > 0 {
                        let (p, v) = b.parent(i);
                        let mut pa = a.clone();
                        pa[v] -= 1;
                        assert_eq!(b.index_of(&pa), Some(p));
                    }
                }
            }
        }
    }

    #[test]
    fn out_of_range_lookup() {
        let b = Basis::get(2, 3);
        assert_eq!(b.index_of(&[2, 2]), None);
        assert_eq!(b.index_of(&[1]), None);
    }
}
