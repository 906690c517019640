//! Symmetric eigenvalue solvers.
//!
//! Dense path: Householder tridiagonalisation followed by implicit QL.
//! Banded path: Givens bulge chasing reduces a symmetric band matrix one
//! bandwidth at a time to tridiagonal form, in `O(n² b)` work, then QL.
//! Complex Hermitian matrices go through the real embedding
//! `[[S, −K], [K, S]]`, whose spectrum is that of `S + iK` doubled.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Matrix {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Matrix {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Matrix { n, data: rows.concat() }
    }

    pub fn from_diag(d: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        out.data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for (r, b) in row.iter_mut().zip(&other.data[k * n..(k + 1) * n]) {
                    *r += a * b;
                }
            }
        });
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        Matrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    /// Replaces the matrix by `(A + Aᵀ)/2`.
    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    /// Leading `k × k` block.
    pub fn leading_block(&self, k: usize) -> Matrix {
        let mut out = Matrix::zeros(k);
        for i in 0..k {
            out.data[i * k..(i + 1) * k].copy_from_slice(&self.data[i * self.n..i * self.n + k]);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Complex square matrix stored as real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub re: Matrix,
    pub im: Matrix,
}

impl CMatrix {
    pub fn zeros(n: usize) -> CMatrix {
        CMatrix { re: Matrix::zeros(n), im: Matrix::zeros(n) }
    }

    pub fn real(re: Matrix) -> CMatrix {
        let n = re.n();
        CMatrix { re, im: Matrix::zeros(n) }
    }

    pub fn n(&self) -> usize {
        self.re.n()
    }

    pub fn matmul(&self, o: &CMatrix) -> CMatrix {
        CMatrix {
            re: self.re.matmul(&o.re).sub(&self.im.matmul(&o.im)),
            im: self.re.matmul(&o.im).add(&self.im.matmul(&o.re)),
        }
    }

    pub fn add(&self, o: &CMatrix) -> CMatrix {
        CMatrix { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &CMatrix) -> CMatrix {
        CMatrix { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        CMatrix { re: self.re.scale(s), im: self.im.scale(s) }
    }

    /// Multiplication by `i`.
    pub fn times_i(&self) -> CMatrix {
        CMatrix { re: self.im.scale(-1.0), im: self.re.clone() }
    }

    /// Largest entry of `M − M^†`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                m = m.max((self.re[(i, j)] - self.re[(j, i)]).abs());
                m = m.max((self.im[(i, j)] + self.im[(j, i)]).abs());
            }
        }
        m
    }

    /// Replaces the matrix by `(M + M^†)/2`.
    pub fn hermitize(&mut self) {
        self.re.symmetrize();
        let n = self.n();
        for i in 0..n {
            self.im[(i, i)] = 0.0;
            for j in 0..i {
                let v = 0.5 * (self.im[(i, j)] - self.im[(j, i)]);
                self.im[(i, j)] = v;
                self.im[(j, i)] = -v;
            }
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.max_abs() == 0.0
    }

    pub fn leading_block(&self, k: usize) -> CMatrix {
        CMatrix { re: self.re.leading_block(k), im: self.im.leading_block(k) }
    }
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns the diagonal and the sub-diagonal (length `n − 1`).
pub fn tridiagonalize(a: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.n();
    let mut a = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        d[k] = a[(k, k)];
        let m0 = k + 1;
        let norm = (m0..n).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let x0 = a[(m0, k)];
        let alpha = if x0 > 0.0 { -norm } else { norm };
        e[k] = alpha;
        for i in m0..n {
            v[i] = a[(i, k)];
        }
        v[m0] -= alpha;
        let vn = (m0..n).map(|i| v[i] * v[i]).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for x in &mut v[m0..n] {
            *x /= vn;
        }
        // p = B v on the trailing block
        let vv = &v;
        let data = &a.data;
        p[m0..n].par_iter_mut().enumerate().with_min_len(64).for_each(|(ii, pi)| {
            let i = m0 + ii;
            let row = &data[i * n + m0..i * n + n];
            *pi = row.iter().zip(&vv[m0..n]).map(|(x, y)| x * y).sum();
        });
        let kk: f64 = (m0..n).map(|i| v[i] * p[i]).sum();
        for i in m0..n {
            p[i] = 2.0 * (p[i] - kk * v[i]);
        }
        let (vv, pp) = (&v, &p);
        a.data.par_chunks_mut(n).enumerate().skip(m0).with_min_len(32).for_each(|(i, row)| {
            let (vi, qi) = (vv[i], pp[i]);
            for j in m0..n {
                row[j] -= vi * pp[j] + qi * vv[j];
            }
        });
    }
    if n > 0 {
        d[n - 1] = a[(n - 1, n - 1)];
    }
    (d, e)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// sub-diagonal `e`, by implicit QL with Wilkinson-type shifts. Sorted
/// ascending.
pub fn tridiagonal_eigenvalues(d: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    assert_eq!(e.len(), n - 1, "sub-diagonal length");
    let mut d = d.to_vec();
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Convergence(format!("implicit QL: eigenvalue {l} did not converge in 60 sweeps")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Full spectrum of a real symmetric matrix, ascending.
pub fn eigenvalues_sym(a: &Matrix) -> Result<Vec<f64>> {
    let (d, e) = tridiagonalize(a);
    tridiagonal_eigenvalues(&d, &e)
}

/// Full spectrum of a Hermitian matrix, ascending.
pub fn eigenvalues_hermitian(a: &CMatrix) -> Result<Vec<f64>> {
    if a.is_real() {
        return eigenvalues_sym(&a.re);
    }
    let n = a.n();
    let mut big = Matrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let (s, k) = (a.re[(i, j)], a.im[(i, j)]);
            big[(i, j)] = s;
            big[(i + n, j + n)] = s;
            big[(i, j + n)] = -k;
            big[(i + n, j)] = k;
        }
    }
    let all = eigenvalues_sym(&big)?;
    Ok(all.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// Symmetric band matrix, lower storage with room for one bulge diagonal.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    /// Zero matrix of size `n` with half-bandwidth `bw`.
    pub fn zeros(n: usize, bw: usize) -> BandMatrix {
        let width = bw + 2;
        BandMatrix { n, bw, width, data: vec![0.0; n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j < self.width, "({i}, {j}) outside band storage");
        j * self.width + (i - j)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo >= self.width {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    /// Sets the symmetric pair `(i, j)`, `(j, i)`; must lie within the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        assert!(hi - lo <= self.bw, "({i}, {j}) outside bandwidth {}", self.bw);
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..=i {
                let v = self.get(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// Applies the rotation `[c s; −s c]` in the plane `(p, p+1)` as
    /// `A ← Gᵀ A G`, touching only entries inside the storage.
    fn rotate(&mut self, p: usize, c: f64, s: f64) {
        let q = p + 1;
        let w = self.width - 1;
        let lo = p.saturating_sub(w);
        let hi = (q + w).min(self.n - 1);
        for j in lo..=hi {
            if j == p || j == q {
                continue;
            }
            let in_p = j.abs_diff(p) <= w;
            let in_q = j.abs_diff(q) <= w;
            let apj = if in_p { self.data[self.slot(p, j)] } else { 0.0 };
            let aqj = if in_q { self.data[self.slot(q, j)] } else { 0.0 };
            let np = c * apj - s * aqj;
            let nq = s * apj + c * aqj;
            debug_assert!(in_p || np == 0.0, "band rotation spilled outside storage at ({p}, {j})");
            debug_assert!(in_q || nq == 0.0, "band rotation spilled outside storage at ({q}, {j})");
            if in_p {
                let k = self.slot(p, j);
                self.data[k] = np;
            }
            if in_q {
                let k = self.slot(q, j);
                self.data[k] = nq;
            }
        }
        let (spp, sqq, spq) = (self.slot(p, p), self.slot(q, q), self.slot(q, p));
        let (app, aqq, apq) = (self.data[spp], self.data[sqq], self.data[spq]);
        self.data[spp] = c * c * app - 2.0 * c * s * apq + s * s * aqq;
        self.data[sqq] = s * s * app + 2.0 * c * s * apq + c * c * aqq;
        self.data[spq] = c * s * (app - aqq) + (c * c - s * s) * apq;
    }

    /// Rotation in plane `(p, p+1)` that zeroes entry `(p+1, j)` against
    /// `(p, j)`.
    fn annihilate(&mut self, p: usize, j: usize) {
        let a = self.get(p, j);
        let b = self.get(p + 1, j);
        if b == 0.0 {
            return;
        }
        let r = a.hypot(b);
        let (c, s) = (a / r, -b / r);
        self.rotate(p, c, s);
        let k = self.slot(p + 1, j);
        self.data[k] = 0.0;
    }

    /// Reduction to tridiagonal form by successive bandwidth reductions
    /// with bulge chasing. Returns diagonal and sub-diagonal.
    pub fn tridiagonalize(mut self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        while self.bw > 1 {
            let b = self.bw;
            for k in 0..n.saturating_sub(b) {
                // zero (k+b, k) using (k+b−1, k)
                self.annihilate(k + b - 1, k);
                // chase the bulge at (j+b+1, j)
                let mut j = k + b - 1;
                while j + b + 1 < n {
                    let r = j + b + 1;
                    if self.get(r, j) == 0.0 {
                        break;
                    }
                    self.annihilate(r - 1, j);
                    j = r - 1;
                }
            }
            self.bw -= 1;
        }
        let d = (0..n).map(|i| self.get(i, i)).collect();
        let e = (1..n).map(|i| if self.bw >= 1 { self.get(i, i - 1) } else { 0.0 }).collect();
        (d, e)
    }

    pub fn eigenvalues(self) -> Result<Vec<f64>> {
        let (d, e) = self.tridiagonalize();
        tridiagonal_eigenvalues(&d, &e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_sym(n: usize, seed: u64) -> Matrix {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn small_examples() {
        let ev = eigenvalues_sym(&Matrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(ev, vec![1.0, 2.0, 3.0]);
        let ev = eigenvalues_sym(&Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trace_identity_random_50() {
        let m = random_sym(50, 7);
        let ev = eigenvalues_sym(&m).unwrap();
        assert!((ev.iter().sum::<f64>() - m.trace()).abs() < 1e-9);
        // and the Frobenius norm
        let fro: f64 = (0..50).flat_map(|i| (0..50).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].powi(2)).sum();
        assert!((ev.iter().map(|x| x * x).sum::<f64>() - fro).abs() < 1e-9);
    }

    #[test]
    fn second_difference_operator() {
        // tridiag(-1, 2, -1): λ_j = 2 − 2cos(jπ/(n+1))
        let n = 200;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let ev = tridiagonal_eigenvalues(&d, &e).unwrap();
        for (j, &l) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((l - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn band_matches_dense() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for &(n, bw) in &[(30usize, 2usize), (57, 3), (80, 4), (5, 4), (3, 1)] {
            let mut b = BandMatrix::zeros(n, bw);
            for i in 0..n {
                for j in i.saturating_sub(bw)..=i {
                    b.set(i, j, rng.gen_range(-1.0..1.0));
                }
            }
            let dense = eigenvalues_sym(&b.to_dense()).unwrap();
            let band = b.eigenvalues().unwrap();
            for (x, y) in dense.iter().zip(&band) {
                assert!((x - y).abs() < 1e-12, "n={n} bw={bw}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn hermitian_embedding() {
        // [[2, i], [−i, 2]] has eigenvalues 1 and 3
        let mut m = CMatrix::zeros(2);
        m.re[(0, 0)] = 2.0;
        m.re[(1, 1)] = 2.0;
        m.im[(0, 1)] = 1.0;
        m.im[(1, 0)] = -1.0;
        let ev = eigenvalues_hermitian(&m).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }
}
