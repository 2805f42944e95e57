//! Lowest eigenpairs of banded symmetric-definite pencils H x = E S x by
//! shift-invert subspace iteration.
//!
//! The shift is always kept below the lowest eigenvalue, so H − σS stays
//! positive definite and a banded Cholesky factorization suffices; a failed
//! factorization is itself the signal that σ was not low enough.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, BandCholesky, BandMatrix};

#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// S-orthonormal eigenvectors.
    pub vectors: Vec<Vec<f64>>,
}

fn s_inner(s: &BandMatrix, x: &[f64], y: &[f64]) -> f64 {
    let mut sy = vec![0.0; y.len()];
    s.mul_add_real(y, &mut sy, 1.0);
    x.iter().zip(&sy).map(|(a, b)| a * b).sum()
}

fn s_orthonormalize(s: &BandMatrix, xs: &mut [Vec<f64>]) {
    for pass in 0..2 {
        for i in 0..xs.len() {
            let (done, rest) = xs.split_at_mut(i);
            let xi = &mut rest[0];
            for xj in done.iter() {
                let c = s_inner(s, xj, xi);
                xi.iter_mut().zip(xj).for_each(|(a, b)| *a -= c * b);
            }
            let nrm = s_inner(s, xi, xi).sqrt();
            if nrm > 0.0 {
                xi.iter_mut().for_each(|a| *a /= nrm);
            } else if pass == 0 {
                // deterministic replacement for a collapsed direction
                for (k, a) in xi.iter_mut().enumerate() {
                    *a = ((k * (i + 3)) as f64 * 0.7).sin();
                }
            }
        }
    }
}

fn factor_below(h: &BandMatrix, s: &BandMatrix, sigma: f64) -> Result<BandCholesky> {
    BandCholesky::new(&h.add_scaled(s, -sigma))
}

/// Finds the `count` lowest eigenpairs to relative residual `tol`.
pub fn lowest_eigenpairs(h: &BandMatrix, s: &BandMatrix, count: usize, tol: f64) -> Result<EigenPairs> {
    let n = h.dim();
    let count = count.min(n);
    let p = (count + 6).min(n);

    // Rayleigh quotients of unit vectors bound E0 from above; walk down
    // until the shifted matrix is positive definite.
    let mut sigma = (0..n).map(|i| h.get(i, i) / s.get(i, i)).fold(f64::INFINITY, f64::min);
    let mut step = sigma.abs().max(1.0);
    let mut chol = loop {
        sigma -= step;
        match factor_below(h, s, sigma) {
            Ok(c) => break c,
            Err(Error::NotPositiveDefinite { .. }) => step *= 2.0,
            Err(e) => return Err(e),
        }
        if !sigma.is_finite() {
            return Err(Error::NoConvergence {
                iterations: 0,
                last_change: f64::NAN,
                trace: Vec::new(),
            });
        }
    };

    let mut xs: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            (0..n)
                .map(|i| 1.0 + ((i as f64 + 1.0) * (j as f64 + 1.0) * 0.61803).sin())
                .collect()
        })
        .collect();
    s_orthonormalize(s, &mut xs);

    let mut values = vec![0.0; p];
    let mut refined = false;
    let mut sx = vec![0.0; n];
    let mut hx = vec![0.0; n];
    for iter in 0..2000 {
        // Y = (H − σS)⁻¹ S X
        for x in xs.iter_mut() {
            sx.iter_mut().for_each(|v| *v = 0.0);
            s.mul_add_real(x, &mut sx, 1.0);
            chol.solve_real(&mut sx);
            x.copy_from_slice(&sx);
        }
        s_orthonormalize(s, &mut xs);
        // Rayleigh–Ritz
        let hxs: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| {
                let mut y = vec![0.0; n];
                h.mul_add_real(x, &mut y, 1.0);
                y
            })
            .collect();
        let mut small = vec![0.0; p * p];
        for a in 0..p {
            for b in 0..p {
                small[a * p + b] = xs[a].iter().zip(&hxs[b]).map(|(u, v)| u * v).sum();
            }
        }
        for a in 0..p {
            for b in 0..a {
                let m = 0.5 * (small[a * p + b] + small[b * p + a]);
                small[a * p + b] = m;
                small[b * p + a] = m;
            }
        }
        let (vals, vecs) = symmetric_eigen(&small, p);
        let mut new_xs = vec![vec![0.0; n]; p];
        for (c, nx) in new_xs.iter_mut().enumerate() {
            for (a, x) in xs.iter().enumerate() {
                let w = vecs[a * p + c];
                nx.iter_mut().zip(x).for_each(|(u, v)| *u += w * v);
            }
        }
        xs = new_xs;
        values = vals;

        // residuals of the wanted pairs
        let mut res: f64 = 0.0;
        for (j, x) in xs.iter().enumerate().take(count) {
            hx.iter_mut().for_each(|v| *v = 0.0);
            sx.iter_mut().for_each(|v| *v = 0.0);
            h.mul_add_real(x, &mut hx, 1.0);
            s.mul_add_real(x, &mut sx, 1.0);
            let r: f64 = hx
                .iter()
                .zip(&sx)
                .map(|(a, b)| (a - values[j] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            res = res.max(r / (1.0 + values[j].abs()));
        }
        if res < tol {
            break;
        }
        if !refined && res < 1e-3 && count < p {
            // move the shift up towards the spectrum, keeping it below E0
            let gap = values[1.min(p - 1)] - values[0];
            let target = values[0] - 0.1 * gap.max(1e-3);
            if target > sigma {
                if let Ok(c) = factor_below(h, s, target) {
                    chol = c;
                    sigma = target;
                }
            }
            refined = true;
        }
        if iter == 1999 {
            return Err(Error::NoConvergence {
                iterations: iter + 1,
                last_change: res,
                trace: Vec::new(),
            });
        }
    }
    // fix sign convention: largest-magnitude component positive
    for x in xs.iter_mut() {
        let big = x.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if big < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
    xs.truncate(count);
    values.truncate(count);
    Ok(EigenPairs { values, vectors: xs })
}

/// A bound eigenstate of one angular channel.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub l: usize,
    pub energy: f64,
    /// Radial coefficients, S-normalized.
    pub vector: Vec<f64>,
}

/// All negative-energy eigenstates of a block-diagonal field-free
/// Hamiltonian, sorted by energy.
#[derive(Debug, Clone, Default)]
pub struct BoundStates {
    pub states: Vec<BoundState>,
}

impl BoundStates {
    /// `blocks[l]` is the radial Hamiltonian of channel l, `s` the radial overlap.
    pub fn compute(blocks: &[BandMatrix], s: &BandMatrix) -> Result<Self> {
        let mut states = Vec::new();
        for (l, h) in blocks.iter().enumerate() {
            let mut count = 12.min(h.dim());
            loop {
                let pairs = lowest_eigenpairs(h, s, count, 1e-10)?;
                let all_bound = pairs.values.last().map_or(false, |&e| e < 0.0);
                if all_bound && count < h.dim() {
                    count = (2 * count).min(h.dim());
                    continue;
                }
                for (energy, vector) in pairs.values.into_iter().zip(pairs.vectors) {
                    if energy < 0.0 {
                        states.push(BoundState { l, energy, vector });
                    }
                }
                break;
            }
        }
        states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        Ok(Self { states })
    }

    /// Σ |⟨φ|S|c⟩|² over the lowest `limit` states (all when `None`), for a
    /// coefficient vector in the l-major layout.
    pub fn population(&self, coeffs: &[num_complex::Complex64], s: &BandMatrix, limit: Option<usize>) -> f64 {
        let nr = s.dim();
        let take = limit.unwrap_or(self.states.len());
        let mut sphi = vec![0.0; nr];
        self.states
            .iter()
            .take(take)
            .filter(|st| (st.l + 1) * nr <= coeffs.len())
            .map(|st| {
                sphi.iter_mut().for_each(|v| *v = 0.0);
                s.mul_add_real(&st.vector, &mut sphi, 1.0);
                let c = &coeffs[st.l * nr..(st.l + 1) * nr];
                let amp: num_complex::Complex64 = sphi.iter().zip(c).map(|(a, b)| b * *a).sum();
                amp.norm_sqr()
            })
            .sum()
    }
}
