//! Radial B-spline × Legendre angular basis and banded block operators.
//!
//! A wavefunction is expanded as ψ(r, θ) = Σ c_{nl} B_n(r)/r · Y_l^0(θ), with
//! the two boundary splines removed so that ψ vanishes at r = 0 and at
//! r = r_max. With the 1/r factor the r² Jacobian cancels and all radial
//! integrals are plain ∫ dr. Coefficients are stored l-major:
//! index = l · n_radial + n.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bspline::KnotSequence;
use crate::codec::{Reader, Writer};
use crate::error::{invalid, Error, Result};
use crate::linalg::{BandCholesky, BandMatrix};
use crate::quadrature::gauss_legendre;

/// Breakpoint placement on [0, r_max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KnotDistribution {
    Linear,
    /// r(x) = r_max sinh(βx)/sinh(β), with β chosen so that `inner_fraction`
    /// of the breakpoints lie inside `inner_radius`.
    Sinh { inner_radius: f64, inner_fraction: f64 },
}

impl Default for KnotDistribution {
    fn default() -> Self {
        KnotDistribution::Sinh {
            inner_radius: 10.0,
            inner_fraction: 1.0 / 3.0,
        }
    }
}

impl KnotDistribution {
    fn breakpoints(&self, r_max: f64, n_intervals: usize) -> Result<Vec<f64>> {
        let xs = (0..=n_intervals).map(|i| i as f64 / n_intervals as f64);
        match *self {
            KnotDistribution::Linear => Ok(xs.map(|x| r_max * x).collect()),
            KnotDistribution::Sinh {
                inner_radius,
                inner_fraction,
            } => {
                if !(inner_radius > 0.0) || !(inner_fraction > 0.0 && inner_fraction < 1.0) {
                    return Err(invalid("basis.knots", "sinh parameters out of range"));
                }
                if inner_radius >= r_max || inner_fraction <= inner_radius / r_max {
                    return Ok(xs.map(|x| r_max * x).collect());
                }
                let frac = |beta: f64| (inner_radius / r_max * beta.sinh()).asinh() / beta;
                // frac increases monotonically from inner_radius/r_max towards 1
                let (mut lo, mut hi) = (1e-6, 1.0);
                while frac(hi) < inner_fraction {
                    hi *= 2.0;
                    if hi > 700.0 {
                        return Err(invalid("basis.knots", "inner fraction unreachable"));
                    }
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if frac(mid) < inner_fraction {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let beta = 0.5 * (lo + hi);
                let s = beta.sinh();
                let mut bp: Vec<f64> = xs.map(|x| r_max * (beta * x).sinh() / s).collect();
                bp[n_intervals] = r_max;
                Ok(bp)
            }
        }
    }
}

/// Gauss–Legendre nodes on every knot interval together with the local
/// spline values and derivatives there.
#[derive(Debug, Clone)]
pub struct RadialQuadrature {
    order: usize,
    points_per_interval: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    interval: Vec<usize>,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl RadialQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn points_per_interval(&self) -> usize {
        self.points_per_interval
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Full-set index of the first spline nonzero at node q.
    #[inline]
    pub fn first_spline(&self, q: usize) -> usize {
        self.interval[q]
    }

    #[inline]
    pub fn values(&self, q: usize) -> &[f64] {
        &self.values[q * self.order..(q + 1) * self.order]
    }

    #[inline]
    pub fn derivs(&self, q: usize) -> &[f64] {
        &self.derivs[q * self.order..(q + 1) * self.order]
    }
}

/// B-spline radial basis with Legendre angular channels l = 0..=l_max.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    knots: KnotSequence,
    r_max: f64,
    l_max: usize,
    distribution: KnotDistribution,
    quad: RadialQuadrature,
}

impl SpectralBasis {
    /// `n_splines` counts the full clamped set; the two boundary splines are
    /// dropped, leaving `n_splines - 2` radial functions.
    pub fn new(
        r_max: f64,
        n_splines: usize,
        order: usize,
        l_max: usize,
        distribution: KnotDistribution,
    ) -> Result<Self> {
        Self::with_quadrature(r_max, n_splines, order, l_max, distribution, order + 2)
    }

    pub fn with_quadrature(
        r_max: f64,
        n_splines: usize,
        order: usize,
        l_max: usize,
        distribution: KnotDistribution,
        points_per_interval: usize,
    ) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(invalid("basis.r_max", "must be positive"));
        }
        if order < 3 {
            return Err(invalid("basis.order", "spline order must be at least 3"));
        }
        if n_splines < order + 2 {
            return Err(invalid(
                "basis.n_splines",
                alloc::format!("need at least order + 2 = {} splines", order + 2),
            ));
        }
        if points_per_interval < order {
            return Err(invalid(
                "basis.quadrature",
                "need at least `order` points per interval for exact overlaps",
            ));
        }
        let n_intervals = n_splines - order + 1;
        let bp = distribution.breakpoints(r_max, n_intervals)?;
        if bp.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("basis.knots", "breakpoints not strictly increasing"));
        }
        let knots = KnotSequence::new(order, bp);
        let quad = build_quadrature(&knots, points_per_interval);
        Ok(Self {
            knots,
            r_max,
            l_max,
            distribution,
            quad,
        })
    }

    pub fn order(&self) -> usize {
        self.knots.order()
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn n_l(&self) -> usize {
        self.l_max + 1
    }

    pub fn distribution(&self) -> KnotDistribution {
        self.distribution
    }

    /// Number of retained radial functions.
    pub fn n_radial(&self) -> usize {
        self.knots.n_splines() - 2
    }

    pub fn dim(&self) -> usize {
        self.n_radial() * self.n_l()
    }

    pub fn knots(&self) -> &KnotSequence {
        &self.knots
    }

    pub fn quadrature(&self) -> &RadialQuadrature {
        &self.quad
    }

    pub fn half_bandwidth(&self) -> usize {
        self.order() - 1
    }

    /// Same radial basis with a different angular truncation.
    pub fn with_l_max(&self, l_max: usize) -> Self {
        let mut b = self.clone();
        b.l_max = l_max;
        b
    }

    /// Σ w (a·B_i B_j + b·B_i B'_j + c·B'_i B_j + d·B'_i B'_j) over all nodes,
    /// where `kernel(q, r)` returns (a, b, c, d).
    fn assemble(&self, kernel: impl Fn(usize, f64) -> [f64; 4]) -> BandMatrix {
        let k = self.order();
        let nr = self.n_radial();
        let mut m = BandMatrix::zeros(nr, k - 1, k - 1);
        let q = &self.quad;
        for iq in 0..q.len() {
            let r = q.nodes[iq];
            let w = q.weights[iq];
            let [a, b, c, d] = kernel(iq, r);
            let first = q.first_spline(iq);
            let v = q.values(iq);
            let dv = q.derivs(iq);
            for s in 0..k {
                let js = first + s;
                if js == 0 || js > nr {
                    continue;
                }
                for t in 0..k {
                    let jt = first + t;
                    if jt == 0 || jt > nr {
                        continue;
                    }
                    let val = a * v[s] * v[t] + b * v[s] * dv[t] + c * dv[s] * v[t] + d * dv[s] * dv[t];
                    m.add(js - 1, jt - 1, w * val);
                }
            }
        }
        m
    }

    /// ∫ B_i B_j dr.
    pub fn overlap_radial(&self) -> BandMatrix {
        self.assemble(|_, _| [1.0, 0.0, 0.0, 0.0])
    }

    /// ½ ∫ B'_i B'_j dr.
    pub fn kinetic_radial(&self) -> BandMatrix {
        self.assemble(|_, _| [0.0, 0.0, 0.0, 0.5])
    }

    /// ∫ B_i g(r) B_j dr.
    pub fn radial_function_matrix(&self, g: impl Fn(f64) -> f64) -> BandMatrix {
        self.assemble(|_, r| [g(r), 0.0, 0.0, 0.0])
    }

    /// ∫ B_i g B_j dr with g given at the quadrature nodes.
    pub fn radial_node_matrix(&self, g: &[f64]) -> BandMatrix {
        assert_eq!(g.len(), self.quad.len());
        self.assemble(|q, _| [g[q], 0.0, 0.0, 0.0])
    }

    /// Several `radial_node_matrix` results sharing one pass over the nodes.
    pub fn radial_node_matrices(&self, gs: &[&[f64]]) -> Vec<BandMatrix> {
        let k = self.order();
        let nr = self.n_radial();
        let width = 2 * k - 1;
        let q = &self.quad;
        let mut data: Vec<Vec<f64>> = gs.iter().map(|_| vec![0.0; nr * width]).collect();
        let mut gq = vec![0.0; gs.len()];
        for iq in 0..q.len() {
            let w = q.weights[iq];
            let first = q.first_spline(iq);
            let v = q.values(iq);
            for (x, g) in gq.iter_mut().zip(gs) {
                *x = w * g[iq];
            }
            for s in 0..k {
                let js = first + s;
                if js == 0 || js > nr {
                    continue;
                }
                for t in 0..k {
                    let jt = first + t;
                    if jt == 0 || jt > nr {
                        continue;
                    }
                    let idx = (js - 1) * width + jt + k - 1 - js;
                    let p = v[s] * v[t];
                    for (d, g) in data.iter_mut().zip(&gq) {
                        d[idx] += p * g;
                    }
                }
            }
        }
        data.into_iter()
            .map(|d| BandMatrix::from_raw(nr, k - 1, k - 1, d).expect("band layout"))
            .collect()
    }

    /// ∫ B_i B'_j dr (antisymmetric).
    pub fn derivative_radial(&self) -> BandMatrix {
        self.assemble(|_, _| [0.0, 1.0, 0.0, 0.0])
    }

    /// Values of all retained splines at r: (first retained index, values).
    pub fn eval_radial(&self, r: f64) -> (usize, Vec<f64>) {
        let k = self.order();
        let i = self.knots.interval_of(r);
        let mut v = vec![0.0; k];
        let mut d = vec![0.0; k];
        self.knots.eval_local(i, r, &mut v, &mut d);
        (i, v)
    }

    /// Radial function u_l(r) = Σ_n c_n B_n(r) for one channel.
    pub fn radial_value(&self, coeffs: &[C64], r: f64) -> C64 {
        let nr = self.n_radial();
        let (first, v) = self.eval_radial(r);
        let mut s = C64::new(0.0, 0.0);
        for (t, b) in v.iter().enumerate() {
            let j = first + t;
            if j >= 1 && j <= nr {
                s += coeffs[j - 1] * b;
            }
        }
        s
    }

    pub fn breakpoint_summary(&self) -> (f64, f64) {
        let bp = self.knots.breakpoints();
        (bp[1] - bp[0], bp[bp.len() - 1] - bp[bp.len() - 2])
    }
}

fn build_quadrature(knots: &KnotSequence, npts: usize) -> RadialQuadrature {
    let k = knots.order();
    let (gx, gw) = gauss_legendre(npts);
    let bp = knots.breakpoints();
    let nint = knots.n_intervals();
    let total = nint * npts;
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut interval = Vec::with_capacity(total);
    let mut values = vec![0.0; total * k];
    let mut derivs = vec![0.0; total * k];
    for i in 0..nint {
        let (a, b) = (bp[i], bp[i + 1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in gx.iter().zip(&gw) {
            let q = nodes.len();
            let r = mid + half * x;
            nodes.push(r);
            weights.push(half * w);
            interval.push(i);
            knots.eval_local(i, r, &mut values[q * k..(q + 1) * k], &mut derivs[q * k..(q + 1) * k]);
        }
    }
    RadialQuadrature {
        order: k,
        points_per_interval: npts,
        nodes,
        weights,
        interval,
        values,
        derivs,
    }
}

/// Laser coupling form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gauge {
    /// z·E(t)
    Length,
    /// A(t)·p_z = −i A(t) ∂/∂z
    Velocity,
}

/// ⟨Y_{l+1}^0| cos θ |Y_l^0⟩.
pub fn cos_theta_coupling(l: usize) -> f64 {
    let l = l as f64;
    (l + 1.0) / ((2.0 * l + 1.0) * (2.0 * l + 3.0)).sqrt()
}

/// One radial block of a [`BandedBlockOperator`].
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub row_l: usize,
    pub col_l: usize,
    pub matrix: BandMatrix,
}

/// Operator over the (n, l) basis stored as banded radial blocks per (l′, l).
/// The represented matrix is `scale · Σ blocks`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedBlockOperator {
    n_radial: usize,
    n_l: usize,
    scale: C64,
    blocks: Vec<Block>,
    hermitian: bool,
}

const OPERATOR_MAGIC: &[u8; 8] = b"HHGBBOP\0";
const OPERATOR_VERSION: u32 = 1;

impl BandedBlockOperator {
    pub fn new(n_radial: usize, n_l: usize, scale: C64, blocks: Vec<Block>, hermitian: bool) -> Self {
        for b in &blocks {
            assert!(b.row_l < n_l && b.col_l < n_l, "block index out of range");
            assert_eq!(b.matrix.dim(), n_radial);
        }
        Self {
            n_radial,
            n_l,
            scale,
            blocks,
            hermitian,
        }
    }

    pub fn n_radial(&self) -> usize {
        self.n_radial
    }

    pub fn n_l(&self) -> usize {
        self.n_l
    }

    pub fn dim(&self) -> usize {
        self.n_radial * self.n_l
    }

    pub fn scale(&self) -> C64 {
        self.scale
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    pub fn block(&self, row_l: usize, col_l: usize) -> Option<&BandMatrix> {
        self.blocks
            .iter()
            .find(|b| b.row_l == row_l && b.col_l == col_l)
            .map(|b| &b.matrix)
    }

    /// y += s · M x.
    pub fn apply_add(&self, x: &[C64], y: &mut [C64], s: C64) {
        let nr = self.n_radial;
        let f = s * self.scale;
        for b in &self.blocks {
            let xs = &x[b.col_l * nr..(b.col_l + 1) * nr];
            let ys = &mut y[b.row_l * nr..(b.row_l + 1) * nr];
            b.matrix.mul_add_complex(xs, ys, f);
        }
    }

    /// Entry (row, col) of the represented matrix, in global indices.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        let nr = self.n_radial;
        let (lr, nrow) = (row / nr, row % nr);
        let (lc, ncol) = (col / nr, col % nr);
        self.blocks
            .iter()
            .filter(|b| b.row_l == lr && b.col_l == lc)
            .map(|b| self.scale * b.matrix.get(nrow, ncol))
            .sum()
    }

    /// max |M − M†| over all stored entries.
    pub fn hermiticity_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for b in &self.blocks {
            let partner = self.block(b.col_l, b.row_l);
            for i in 0..self.n_radial {
                for j in i.saturating_sub(b.matrix.lower())..(i + b.matrix.upper() + 1).min(self.n_radial) {
                    let mij = self.scale * b.matrix.get(i, j);
                    let mji = partner.map(|p| self.scale * p.get(j, i)).unwrap_or(C64::new(0.0, 0.0));
                    err = err.max((mij - mji.conj()).norm());
                }
            }
        }
        err
    }

    /// Largest |i − j| with a nonzero entry in any block.
    pub fn max_band_offset(&self) -> usize {
        let mut off = 0;
        for b in &self.blocks {
            for i in 0..self.n_radial {
                for j in 0..self.n_radial {
                    if b.matrix.get(i, j) != 0.0 {
                        off = off.max(i.abs_diff(j));
                    }
                }
            }
        }
        off
    }

    /// Self-describing binary blob: magic, version, dimensions, scale,
    /// hermitian flag, then per block its (l′, l), band widths and data.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new(OPERATOR_MAGIC, OPERATOR_VERSION);
        w.u64(self.n_radial as u64);
        w.u64(self.n_l as u64);
        w.f64(self.scale.re);
        w.f64(self.scale.im);
        w.u64(self.hermitian as u64);
        w.u64(self.blocks.len() as u64);
        for b in &self.blocks {
            w.u64(b.row_l as u64);
            w.u64(b.col_l as u64);
            w.u64(b.matrix.lower() as u64);
            w.u64(b.matrix.upper() as u64);
            w.f64s(b.matrix.raw());
        }
        w.buf
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let (mut r, _) = Reader::new(data, OPERATOR_MAGIC, OPERATOR_VERSION)?;
        let n_radial = r.usize()?;
        let n_l = r.usize()?;
        let scale = C64::new(r.f64()?, r.f64()?);
        let hermitian = r.u64()? != 0;
        let nb = r.usize()?;
        let mut blocks = Vec::new();
        for _ in 0..nb {
            let row_l = r.usize()?;
            let col_l = r.usize()?;
            let lower = r.usize()?;
            let upper = r.usize()?;
            let data = r.f64s()?;
            if row_l >= n_l || col_l >= n_l {
                return Err(Error::Decode(String::from("block index out of range")));
            }
            let matrix = BandMatrix::from_raw(n_radial, lower, upper, data)
                .map_err(|e| Error::Decode(alloc::format!("{e}")))?;
            blocks.push(Block { row_l, col_l, matrix });
        }
        r.finish()?;
        Ok(Self {
            n_radial,
            n_l,
            scale,
            blocks,
            hermitian,
        })
    }
}

/// Block-diagonal operator with the same radial matrix in every channel.
pub fn block_diagonal(basis: &SpectralBasis, m: &BandMatrix) -> BandedBlockOperator {
    let blocks = (0..basis.n_l())
        .map(|l| Block {
            row_l: l,
            col_l: l,
            matrix: m.clone(),
        })
        .collect();
    BandedBlockOperator::new(basis.n_radial(), basis.n_l(), C64::new(1.0, 0.0), blocks, true)
}

pub fn build_basis(
    r_max: f64,
    n_splines: usize,
    order: usize,
    l_max: usize,
    distribution: KnotDistribution,
) -> Result<SpectralBasis> {
    if l_max < 1 {
        return Err(invalid("basis.l_max", "must be at least 1"));
    }
    SpectralBasis::new(r_max, n_splines, order, l_max, distribution)
}

pub fn overlap_matrix(basis: &SpectralBasis) -> BandedBlockOperator {
    block_diagonal(basis, &basis.overlap_radial())
}

/// Galerkin matrix of −½ d²/dr² + l(l+1)/(2r²) + V(r) for one channel.
pub fn radial_hamiltonian_block(basis: &SpectralBasis, l: usize, v: impl Fn(f64) -> f64) -> Result<BandMatrix> {
    if l > basis.l_max() {
        return Err(invalid("l", "exceeds basis l_max"));
    }
    let cent = (l * (l + 1)) as f64 / 2.0;
    let m = basis.assemble(|_, r| [v(r) + cent / (r * r), 0.0, 0.0, 0.5]);
    if m.raw().iter().any(|x| !x.is_finite()) {
        return Err(invalid("potential", "not integrable against the basis"));
    }
    Ok(m)
}

/// Laser coupling operator stored field-free: blocks only for l′ = l ± 1.
///
/// Length gauge: cos θ · r. Velocity gauge: −i ∂/∂z, stored as the real
/// antisymmetric ∂/∂z blocks with scale −i.
pub fn dipole_coupling(basis: &SpectralBasis, gauge: Gauge) -> BandedBlockOperator {
    let mut blocks = Vec::new();
    match gauge {
        Gauge::Length => {
            let r1 = basis.radial_function_matrix(|r| r);
            for l in 0..basis.l_max() {
                let a = cos_theta_coupling(l);
                blocks.push(Block {
                    row_l: l + 1,
                    col_l: l,
                    matrix: r1.scaled(a),
                });
                blocks.push(Block {
                    row_l: l,
                    col_l: l + 1,
                    matrix: r1.scaled(a),
                });
            }
            BandedBlockOperator::new(basis.n_radial(), basis.n_l(), C64::new(1.0, 0.0), blocks, true)
        }
        Gauge::Velocity => {
            let d = basis.derivative_radial();
            let q = basis.radial_function_matrix(|r| 1.0 / r);
            for l in 0..basis.l_max() {
                let a = cos_theta_coupling(l);
                let lp1 = (l + 1) as f64;
                // ⟨l+1| ∂z |l⟩ = a_l (D − (l+1) Q);  ⟨l| ∂z |l+1⟩ = a_l (D + (l+1) Q)
                blocks.push(Block {
                    row_l: l + 1,
                    col_l: l,
                    matrix: d.add_scaled(&q, -lp1).scaled(a),
                });
                blocks.push(Block {
                    row_l: l,
                    col_l: l + 1,
                    matrix: d.add_scaled(&q, lp1).scaled(a),
                });
            }
            BandedBlockOperator::new(basis.n_radial(), basis.n_l(), C64::new(0.0, -1.0), blocks, true)
        }
    }
}

/// cos θ · g(r) coupling, e.g. the force operator ∂V/∂z = V′(r) cos θ.
pub fn cos_theta_radial_coupling(basis: &SpectralBasis, g: impl Fn(f64) -> f64) -> BandedBlockOperator {
    let m = basis.radial_function_matrix(g);
    let mut blocks = Vec::new();
    for l in 0..basis.l_max() {
        let a = cos_theta_coupling(l);
        blocks.push(Block {
            row_l: l + 1,
            col_l: l,
            matrix: m.scaled(a),
        });
        blocks.push(Block {
            row_l: l,
            col_l: l + 1,
            matrix: m.scaled(a),
        });
    }
    BandedBlockOperator::new(basis.n_radial(), basis.n_l(), C64::new(1.0, 0.0), blocks, true)
}

/// Factorized radial overlap, shared by all l channels.
#[derive(Debug, Clone)]
pub struct Overlap {
    n_l: usize,
    matrix: BandMatrix,
    chol: BandCholesky,
}

impl Overlap {
    pub fn new(basis: &SpectralBasis) -> Result<Self> {
        let matrix = basis.overlap_radial();
        let chol = BandCholesky::new(&matrix)?;
        Ok(Self {
            n_l: basis.n_l(),
            matrix,
            chol,
        })
    }

    pub fn radial(&self) -> &BandMatrix {
        &self.matrix
    }

    pub fn cholesky(&self) -> &BandCholesky {
        &self.chol
    }

    pub fn n_l(&self) -> usize {
        self.n_l
    }

    pub fn dim(&self) -> usize {
        self.n_l * self.matrix.dim()
    }

    /// x ← S⁻¹ x.
    pub fn solve(&self, x: &mut [C64]) {
        let nr = self.matrix.dim();
        for chunk in x.chunks_mut(nr) {
            self.chol.solve_complex(chunk);
        }
    }

    /// y ← S x.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        let nr = self.matrix.dim();
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (xs, ys) in x.chunks(nr).zip(y.chunks_mut(nr)) {
            self.matrix.mul_add_complex(xs, ys, C64::new(1.0, 0.0));
        }
    }

    /// ⟨x|S|y⟩.
    pub fn inner(&self, x: &[C64], y: &[C64]) -> C64 {
        let nr = self.matrix.dim();
        x.chunks(nr)
            .zip(y.chunks(nr))
            .map(|(a, b)| self.matrix.bilinear(a, b))
            .sum()
    }

    pub fn norm_sqr(&self, x: &[C64]) -> f64 {
        self.inner(x, x).re
    }
}
