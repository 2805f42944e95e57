//! B-spline knot sequences and local evaluation (de Boor recurrences).

use alloc::vec;
use alloc::vec::Vec;

/// Clamped knot sequence: multiplicity `order` at both ends, simple interior knots.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotSequence {
    order: usize,
    breakpoints: Vec<f64>,
    knots: Vec<f64>,
}

impl KnotSequence {
    pub fn new(order: usize, breakpoints: Vec<f64>) -> Self {
        assert!(order >= 2 && breakpoints.len() >= 2);
        let first = breakpoints[0];
        let last = *breakpoints.last().unwrap();
        let mut knots = Vec::with_capacity(breakpoints.len() + 2 * (order - 1));
        knots.extend(core::iter::repeat(first).take(order - 1));
        knots.extend_from_slice(&breakpoints);
        knots.extend(core::iter::repeat(last).take(order - 1));
        Self {
            order,
            breakpoints,
            knots,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn n_intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Number of splines in the full (clamped) set.
    pub fn n_splines(&self) -> usize {
        self.n_intervals() + self.order - 1
    }

    /// Interval index containing x (last interval is closed on the right).
    pub fn interval_of(&self, x: f64) -> usize {
        let bp = &self.breakpoints;
        if x >= bp[bp.len() - 2] {
            return bp.len() - 2;
        }
        match bp.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    /// Values and first derivatives of the `order` splines that are nonzero on
    /// interval `interval`; these are full-set indices `interval..interval+order`.
    pub fn eval_local(&self, interval: usize, x: f64, values: &mut [f64], derivs: &mut [f64]) {
        let k = self.order;
        let t = &self.knots;
        let m = interval + k - 1;
        let mut left = vec![0.0; k];
        let mut right = vec![0.0; k];
        let mut b = vec![0.0; k];
        let mut lower = vec![0.0; k];
        b[0] = 1.0;
        for j in 1..k {
            if j == k - 1 {
                lower[..j].copy_from_slice(&b[..j]);
            }
            left[j] = x - t[m + 1 - j];
            right[j] = t[m + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = b[r] / (right[r + 1] + left[j - r]);
                b[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            b[j] = saved;
        }
        values[..k].copy_from_slice(&b);
        if k == 1 {
            derivs[0] = 0.0;
            return;
        }
        // order-(k-1) values `lower[s]` belong to full spline m-k+2+s
        let kk = (k - 1) as f64;
        for r in 0..k {
            let i = m + 1 - k + r;
            let mut d = 0.0;
            if r >= 1 {
                let den = t[i + k - 1] - t[i];
                if den > 0.0 {
                    d += lower[r - 1] / den;
                }
            }
            if r + 1 <= k - 1 {
                let den = t[i + k] - t[i + 1];
                if den > 0.0 {
                    d -= lower[r] / den;
                }
            }
            derivs[r] = kk * d;
        }
    }

    /// Value of full-set spline `j` at x.
    pub fn eval(&self, j: usize, x: f64) -> f64 {
        let i = self.interval_of(x);
        if j < i || j >= i + self.order {
            return 0.0;
        }
        let mut v = vec![0.0; self.order];
        let mut d = vec![0.0; self.order];
        self.eval_local(i, x, &mut v, &mut d);
        v[j - i]
    }
}
