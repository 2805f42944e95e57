//! Banded and small dense linear algebra used by the assembly, eigen and
//! propagation code.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Square real matrix with `lower`/`upper` half-bandwidths, row-major band storage.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self {
            n,
            lower,
            upper,
            data: vec![0.0; n * (lower + upper + 1)],
        }
    }

    pub fn from_raw(n: usize, lower: usize, upper: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * (lower + upper + 1) {
            return Err(Error::Dimension(alloc::format!(
                "band data length {} != {}",
                data.len(),
                n * (lower + upper + 1)
            )));
        }
        Ok(Self { n, lower, upper, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.lower >= i && j <= i + self.upper
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i >= self.n || j >= self.n || !self.in_band(i, j) {
            0.0
        } else {
            self.data[i * self.width() + j + self.lower - i]
        }
    }

    /// Panics when (i, j) lies outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i},{j}) outside band");
        let w = self.width();
        self.data[i * w + j + self.lower - i] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i},{j}) outside band");
        let w = self.width();
        self.data[i * w + j + self.lower - i] = v;
    }

    /// Column range of row `i` inside the band.
    #[inline]
    fn row_range(&self, i: usize) -> (usize, usize) {
        let lo = i.saturating_sub(self.lower);
        let hi = (i + self.upper + 1).min(self.n);
        (lo, hi)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n, self.upper, self.lower);
        for i in 0..self.n {
            let (lo, hi) = self.row_range(i);
            for j in lo..hi {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `self + s * other`, widening the band when needed.
    pub fn add_scaled(&self, other: &BandMatrix, s: f64) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n, self.lower.max(other.lower), self.upper.max(other.upper));
        for i in 0..self.n {
            let (lo, hi) = self.row_range(i);
            for j in lo..hi {
                out.add(i, j, self.get(i, j));
            }
            let (lo, hi) = other.row_range(i);
            for j in lo..hi {
                out.add(i, j, s * other.get(i, j));
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= s);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// max |A − Aᵀ| over the band.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            let (lo, hi) = self.row_range(i);
            for j in lo..hi {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (lo, hi) = self.row_range(i);
            for (j, v) in row.iter_mut().enumerate().take(hi).skip(lo) {
                *v = self.get(i, j);
            }
        }
        d
    }

    /// y += s · A x for complex x, y.
    #[inline]
    pub fn mul_add_complex(&self, x: &[C64], y: &mut [C64], s: C64) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        let w = self.width();
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = self.row_range(i);
            let row = &self.data[i * w + lo + self.lower - i..i * w + hi + self.lower - i];
            let mut re = 0.0;
            let mut im = 0.0;
            for (a, xj) in row.iter().zip(&x[lo..hi]) {
                re += a * xj.re;
                im += a * xj.im;
            }
            *yi += s * C64::new(re, im);
        }
    }

    /// y += s · A x for real x, y.
    pub fn mul_add_real(&self, x: &[f64], y: &mut [f64], s: f64) {
        let w = self.width();
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = self.row_range(i);
            let row = &self.data[i * w + lo + self.lower - i..i * w + hi + self.lower - i];
            let acc: f64 = row.iter().zip(&x[lo..hi]).map(|(a, b)| a * b).sum();
            *yi += s * acc;
        }
    }

    /// xᵀ A y for complex vectors, conjugating x.
    pub fn bilinear(&self, x: &[C64], y: &[C64]) -> C64 {
        let mut tmp = vec![C64::new(0.0, 0.0); self.n];
        self.mul_add_complex(y, &mut tmp, C64::new(1.0, 0.0));
        dot(x, &tmp)
    }
}

/// Cholesky factor L (lower band) of a symmetric positive-definite band matrix.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    // row-major, row i holds L[i, i-bw..=i]
    l: Vec<f64>,
}

impl BandCholesky {
    /// Factorizes using only the lower half of `a`, which must be symmetric.
    pub fn new(a: &BandMatrix) -> Result<Self> {
        let n = a.dim();
        let bw = a.lower();
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut s = a.get(i, j);
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    s -= l[i * w + k + bw - i] * l[j * w + k + bw - j];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + j + bw - i] = s / l[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * (self.bw + 1) + j + self.bw - i]
    }

    /// Solves A x = b in place for complex b.
    pub fn solve_complex(&self, b: &mut [C64]) {
        let n = self.n;
        for i in 0..n {
            let mut re = b[i].re;
            let mut im = b[i].im;
            for k in i.saturating_sub(self.bw)..i {
                let a = self.at(i, k);
                re -= a * b[k].re;
                im -= a * b[k].im;
            }
            let d = self.at(i, i);
            b[i] = C64::new(re / d, im / d);
        }
        for i in (0..n).rev() {
            let mut re = b[i].re;
            let mut im = b[i].im;
            for k in i + 1..(i + self.bw + 1).min(n) {
                let a = self.at(k, i);
                re -= a * b[k].re;
                im -= a * b[k].im;
            }
            let d = self.at(i, i);
            b[i] = C64::new(re / d, im / d);
        }
    }

    pub fn solve_real(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.at(i, k) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + self.bw + 1).min(n) {
                s -= self.at(k, i) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
    }

    /// x ← L⁻¹ x (forward substitution only).
    pub fn forward_real(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let mut s = b[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.at(i, k) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
    }

    /// x ← L⁻ᵀ x (backward substitution only).
    pub fn backward_real(&self, b: &mut [f64]) {
        for i in (0..self.n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + self.bw + 1).min(self.n) {
                s -= self.at(k, i) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
    }
}

#[inline]
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (a, b) in x.iter().zip(y) {
        re += a.re * b.re + a.im * b.im;
        im += a.re * b.im - a.im * b.re;
    }
    C64::new(re, im)
}

#[inline]
pub fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum()
}

/// Eigen-decomposition of a real symmetric dense matrix (row-major, n×n).
///
/// Householder tridiagonalization followed by implicit QL. Returns the
/// eigenvalues in ascending order and the eigenvectors as columns of a
/// row-major matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut z = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut z, n, &mut d, &mut e);
    tql2(&mut z, n, &mut d, &mut e);
    // sort ascending
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(core::cmp::Ordering::Equal));
    let vals: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (new, &old) in idx.iter().enumerate() {
        for r in 0..n {
            vecs[r * n + new] = z[r * n + old];
        }
    }
    (vals, vecs)
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    // tql2 expects e[i] = subdiagonal element (i, i-1)
    for i in 1..n {
        e[i] = off[i - 1];
    }
    tql2(&mut z, n, &mut d, &mut e);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(core::cmp::Ordering::Equal));
    let vals: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (new, &old) in idx.iter().enumerate() {
        for r in 0..n {
            vecs[r * n + new] = z[r * n + old];
        }
    }
    (vals, vecs)
}

// EISPACK tred2: z holds the matrix on entry, the orthogonal transform on exit.
fn tred2(z: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    if n == 0 {
        return;
    }
    for j in 0..n {
        d[j] = z[(n - 1) * n + j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = z[(i - 1) * n + j];
                z[i * n + j] = 0.0;
                z[j * n + i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                z[j * n + i] = f;
                let mut g = e[j] + z[j * n + j] * f;
                for k in j + 1..i {
                    g += z[k * n + j] * d[k];
                    e[k] += z[k * n + j] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    z[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = z[(i - 1) * n + j];
                z[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        z[(n - 1) * n + i] = z[i * n + i];
        z[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = z[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += z[k * n + i + 1] * z[k * n + j];
                }
                for k in 0..=i {
                    z[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            z[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = z[(n - 1) * n + j];
        z[(n - 1) * n + j] = 0.0;
    }
    z[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;
}

// EISPACK tql2 (implicit QL with Wilkinson-like shifts).
fn tql2(z: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    if n == 0 {
        return;
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in l + 2..n {
                    d[i] -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zk = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * zk;
                        z[k * n + i] = c * z[k * n + i] - s * zk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(e[l].abs() > eps * tst1) || iter >= 60 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

/// Lowest eigenpairs of the symmetric-definite pencil (H, S) for dense
/// matrices given as band matrices. Returns (values, vectors in S-orthonormal
/// columns, row-major n×n).
pub fn generalized_eigen_dense(h: &BandMatrix, s: &BandMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = h.dim();
    let chol = BandCholesky::new(s)?;
    // C = L⁻¹ H L⁻ᵀ
    let mut c = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    // first W = L⁻¹ H (column by column of H)
    let mut w = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            col[i] = h.get(i, j);
        }
        chol.forward_real(&mut col);
        for i in 0..n {
            w[i * n + j] = col[i];
        }
    }
    // C = W L⁻ᵀ = (L⁻¹ Wᵀ)ᵀ
    for i in 0..n {
        col.copy_from_slice(&w[i * n..(i + 1) * n]);
        chol.forward_real(&mut col);
        for j in 0..n {
            c[j * n + i] = col[j];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (c[i * n + j] + c[j * n + i]);
            c[i * n + j] = m;
            c[j * n + i] = m;
        }
    }
    let (vals, y) = symmetric_eigen(&c, n);
    // x = L⁻ᵀ y
    let mut x = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            col[i] = y[i * n + j];
        }
        chol.backward_real(&mut col);
        for i in 0..n {
            x[i * n + j] = col[i];
        }
    }
    Ok((vals, x))
}
