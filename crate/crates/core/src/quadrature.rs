//! Gauss–Legendre rules.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1],
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            pp = dp;
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        pp = if dp != 0.0 { dp } else { pp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// P_n(x) and P_n'(x).
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint limit
        let s = if x > 0.0 || n % 2 == 0 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// All Legendre polynomials P_0..=P_lmax at x.
pub fn legendre_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; lmax + 1];
    p[0] = 1.0;
    if lmax >= 1 {
        p[1] = x;
    }
    for k in 2..=lmax {
        let kf = k as f64;
        p[k] = ((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
    }
    p
}

/// Matrix C (row-major n×n) with ∫_{-1}^{x_i} f ≈ Σ_j C_ij f(x_j), exact for
/// polynomials of degree < n through the Gauss nodes.
pub fn cumulative_integration_matrix(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    // Lagrange basis ℓ_j expressed in Legendre polynomials via the discrete
    // orthogonality of the Gauss rule: ℓ_j(x) = w_j Σ_k (2k+1)/2 P_k(x_j) P_k(x).
    let (_, w) = gauss_legendre(n);
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        let xi = nodes[i];
        let p = legendre_all(n, xi);
        // ∫_{-1}^{x} P_k = (P_{k+1} - P_{k-1}) / (2k+1), k ≥ 1; ∫ P_0 = x + 1
        let mut integ = vec![0.0; n];
        integ[0] = xi + 1.0;
        for k in 1..n {
            integ[k] = (p[k + 1] - p[k - 1]) / (2.0 * k as f64 + 1.0);
        }
        for j in 0..n {
            let pj = legendre_all(n - 1, nodes[j]);
            let mut s = 0.0;
            for k in 0..n {
                s += (2.0 * k as f64 + 1.0) / 2.0 * pj[k] * integ[k];
            }
            c[i * n + j] = w[j] * s;
        }
    }
    c
}
