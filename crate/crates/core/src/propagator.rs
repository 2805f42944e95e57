//! Krylov (Arnoldi) short-time propagation of S ċ = −i H(t) c.
//!
//! The Krylov space is built for S⁻¹H, which is self-adjoint in the
//! S-inner product ⟨x, y⟩_S = x† S y, so every basis vector is
//! S-orthonormalized. The projected matrix is then Hermitian and, up to
//! rounding, tridiagonal; its exponential is taken through a symmetric
//! tridiagonal eigendecomposition.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::{block_diagonal, BandedBlockOperator, Gauge, Overlap, SpectralBasis};
use crate::codec::{Reader, Writer};
use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, generalized_eigen_dense, tridiagonal_eigen, BandMatrix};

/// Matrix-free Hamiltonian in the (n, l) coefficient space.
pub trait Hamiltonian {
    fn dim(&self) -> usize;
    /// y ← H x
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

/// Coefficient vector with its time and absorbed probability.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub coeffs: Vec<C64>,
    pub t: f64,
    /// Completed steps of the outer time grid; t = step · dt.
    pub step: u64,
    pub gauge: Gauge,
    pub absorbed: f64,
}

const STATE_MAGIC: &[u8; 8] = b"HHGSTAT\0";
const STATE_VERSION: u32 = 1;

impl WaveState {
    pub fn new(coeffs: Vec<C64>, gauge: Gauge) -> Self {
        Self {
            coeffs,
            t: 0.0,
            step: 0,
            gauge,
            absorbed: 0.0,
        }
    }

    pub fn s_norm(&self, overlap: &Overlap) -> f64 {
        overlap.norm_sqr(&self.coeffs)
    }

    /// Binary blob: magic, version, `tag` (e.g. a config hash), step, t,
    /// gauge, absorbed norm, coefficients.
    pub fn to_bytes(&self, tag: &[u8]) -> Vec<u8> {
        let mut w = Writer::new(STATE_MAGIC, STATE_VERSION);
        w.bytes(tag);
        w.u64(self.step);
        w.f64(self.t);
        w.u64(match self.gauge {
            Gauge::Length => 0,
            Gauge::Velocity => 1,
        });
        w.f64(self.absorbed);
        let flat: Vec<f64> = self.coeffs.iter().flat_map(|c| [c.re, c.im]).collect();
        w.f64s(&flat);
        w.buf
    }

    /// Returns the state and the stored tag.
    pub fn from_bytes(data: &[u8]) -> Result<(Self, Vec<u8>)> {
        let (mut r, _) = Reader::new(data, STATE_MAGIC, STATE_VERSION)?;
        let tag = r.bytes()?;
        let step = r.u64()?;
        let t = r.f64()?;
        let gauge = match r.u64()? {
            0 => Gauge::Length,
            1 => Gauge::Velocity,
            g => return Err(Error::Decode(alloc::format!("unknown gauge tag {g}"))),
        };
        let absorbed = r.f64()?;
        let flat = r.f64s()?;
        r.finish()?;
        if flat.len() % 2 != 0 {
            return Err(Error::Decode(alloc::string::String::from("odd coefficient array")));
        }
        let coeffs = flat.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
        Ok((
            Self {
                coeffs,
                t,
                step,
                gauge,
                absorbed,
            },
            tag,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub krylov_dim: usize,
    pub residual_tol: f64,
    pub absorber_start: f64,
    /// Mask is cos^(1/absorber_exponent).
    pub absorber_exponent: f64,
    /// Maximum recursive step halvings before giving up.
    pub max_halvings: u32,
    /// Field-free states above this energy are excluded from the dynamics;
    /// `None` propagates in the full B-spline space.
    pub energy_cutoff: Option<f64>,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            krylov_dim: 18,
            residual_tol: 1e-10,
            absorber_start: 80.0,
            absorber_exponent: 8.0,
            max_halvings: 12,
            energy_cutoff: Some(50.0),
        }
    }
}

impl PropagatorConfig {
    pub fn validate(&self, r_max: f64) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(invalid("propagator.dt", "must be positive"));
        }
        if self.krylov_dim < 4 {
            return Err(invalid("propagator.krylov_dim", "must be at least 4"));
        }
        if !(self.residual_tol > 0.0) {
            return Err(invalid("propagator.residual_tol", "must be positive"));
        }
        if !(self.absorber_start > 0.0 && self.absorber_start < r_max) {
            return Err(invalid("propagator.absorber_start", "must lie in (0, r_max)"));
        }
        if !(self.absorber_exponent > 0.0) {
            return Err(invalid("propagator.absorber_exponent", "must be positive"));
        }
        if let Some(e) = self.energy_cutoff {
            if !(e > 0.0) {
                return Err(invalid("propagator.energy_cutoff", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Diagnostics of one (possibly subdivided) step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub substeps: u32,
    pub applies: u32,
    pub max_error: f64,
}

/// Inner-product metric of the propagation space.
///
/// `solve` maps a dual vector (such as H v) back to coefficients; for the
/// plain B-spline space this is S⁻¹, for a spectrally filtered space it is
/// the S-orthogonal projection P S⁻¹ = V Vᵀ.
pub trait Metric {
    /// y ← S x
    fn apply(&self, x: &[C64], y: &mut [C64]);
    /// x ← S⁻¹ x, restricted to the propagation space.
    fn solve(&self, x: &mut [C64]);

    fn norm_sqr(&self, x: &[C64]) -> f64 {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        self.apply(x, &mut y);
        dot(x, &y).re
    }
}

impl Metric for Overlap {
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        Overlap::apply(self, x, y)
    }

    fn solve(&self, x: &mut [C64]) {
        Overlap::solve(self, x)
    }

    fn norm_sqr(&self, x: &[C64]) -> f64 {
        Overlap::norm_sqr(self, x)
    }
}

/// Field-free eigenvectors below an energy cutoff, per angular channel.
///
/// Restricting the dynamics to their span removes the stiff part of the
/// spectrum (large kinetic and centrifugal energies at the innermost knots),
/// which would otherwise force tiny Krylov steps.
#[derive(Debug, Clone)]
pub struct SpectralFilter {
    n_radial: usize,
    energy_cut: f64,
    /// Per l: kept eigenvectors, row-major (n_keep × n_radial).
    vectors: Vec<Vec<f64>>,
    kept: Vec<usize>,
}

impl SpectralFilter {
    /// `blocks[l]` is the field-free radial Hamiltonian of channel l.
    pub fn new(blocks: &[BandMatrix], overlap: &BandMatrix, energy_cut: f64) -> Result<Self> {
        if !(energy_cut > 0.0) {
            return Err(invalid("propagator.energy_cutoff", "must be positive"));
        }
        let n = overlap.dim();
        let mut vectors = Vec::with_capacity(blocks.len());
        let mut kept = Vec::with_capacity(blocks.len());
        for h in blocks {
            let (vals, vecs) = generalized_eigen_dense(h, overlap)?;
            let keep = vals.iter().take_while(|&&e| e < energy_cut).count();
            let mut rows = vec![0.0; keep * n];
            for j in 0..keep {
                for i in 0..n {
                    rows[j * n + i] = vecs[i * n + j];
                }
            }
            vectors.push(rows);
            kept.push(keep);
        }
        Ok(Self {
            n_radial: n,
            energy_cut,
            vectors,
            kept,
        })
    }

    pub fn energy_cut(&self) -> f64 {
        self.energy_cut
    }

    /// Number of kept states per channel.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    /// x ← V Vᵀ x per channel.
    pub fn apply_dual(&self, x: &mut [C64]) {
        let n = self.n_radial;
        let mut xr = vec![0.0; n];
        let mut xi = vec![0.0; n];
        let mut ar = Vec::new();
        let mut ai = Vec::new();
        for (chunk, (rows, &keep)) in x.chunks_mut(n).zip(self.vectors.iter().zip(&self.kept)) {
            for (k, c) in chunk.iter().enumerate() {
                xr[k] = c.re;
                xi[k] = c.im;
            }
            ar.clear();
            ai.clear();
            for v in rows.chunks_exact(n).take(keep) {
                ar.push(dot_real(v, &xr));
                ai.push(dot_real(v, &xi));
            }
            xr.iter_mut().for_each(|v| *v = 0.0);
            xi.iter_mut().for_each(|v| *v = 0.0);
            for (v, (&pr, &pi)) in rows.chunks_exact(n).zip(ar.iter().zip(&ai)) {
                for ((r, i), vk) in xr.iter_mut().zip(xi.iter_mut()).zip(v) {
                    *r += pr * vk;
                    *i += pi * vk;
                }
            }
            for (k, c) in chunk.iter_mut().enumerate() {
                *c = C64::new(xr[k], xi[k]);
            }
        }
    }
}

/// Real dot product with four independent accumulators.
#[inline]
fn dot_real(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ac, bc) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ar, br) = (ac.remainder(), bc.remainder());
    for (x, y) in ac.zip(bc) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ar.iter().zip(br).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Overlap metric, optionally restricted by a [`SpectralFilter`].
#[derive(Debug, Clone, Copy)]
pub struct KrylovMetric<'a> {
    pub overlap: &'a Overlap,
    pub filter: Option<&'a SpectralFilter>,
}

impl Metric for KrylovMetric<'_> {
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.overlap.apply(x, y)
    }

    fn solve(&self, x: &mut [C64]) {
        match &self.filter {
            Some(f) => f.apply_dual(x),
            None => self.overlap.solve(x),
        }
    }

    fn norm_sqr(&self, x: &[C64]) -> f64 {
        self.overlap.norm_sqr(x)
    }
}

/// Reusable Krylov storage.
#[derive(Debug, Clone)]
pub struct KrylovWorkspace {
    v: Vec<Vec<C64>>,
    sv: Vec<Vec<C64>>,
    w: Vec<C64>,
    sw: Vec<C64>,
}

impl KrylovWorkspace {
    pub fn new(dim: usize, krylov_dim: usize) -> Self {
        Self {
            v: vec![vec![C64::new(0.0, 0.0); dim]; krylov_dim + 1],
            sv: vec![vec![C64::new(0.0, 0.0); dim]; krylov_dim + 1],
            w: vec![C64::new(0.0, 0.0); dim],
            sw: vec![C64::new(0.0, 0.0); dim],
        }
    }
}

#[derive(Clone, Copy)]
enum Exponent {
    /// exp(−i τ A)
    Real(f64),
    /// exp(−τ A)
    Imaginary(f64),
}

/// exp(..) e₁ for the projected tridiagonal matrix.
fn projected_exp(alpha: &[f64], beta: &[f64], exponent: Exponent) -> Vec<C64> {
    let m = alpha.len();
    let (vals, vecs) = tridiagonal_eigen(alpha, &beta[..m - 1]);
    let mut y = vec![C64::new(0.0, 0.0); m];
    for k in 0..m {
        let f = match exponent {
            Exponent::Real(tau) => C64::from_polar(1.0, -tau * vals[k]),
            Exponent::Imaginary(tau) => C64::new((-tau * vals[k]).exp(), 0.0),
        };
        let z0 = vecs[k];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += f * (z0 * vecs[i * m + k]);
        }
    }
    y
}

/// Builds the S-orthonormal Krylov basis for S⁻¹H from `c` and overwrites
/// `c` with the projected exponential. The space grows until the error
/// estimate β_j |e_jᵀ exp(..) e₁| drops below `tol` or `m` vectors are used.
/// Returns (error estimate, number of H applies).
fn krylov_exp<H: Hamiltonian, M: Metric + ?Sized>(
    h: &H,
    metric: &M,
    c: &mut [C64],
    exponent: Exponent,
    m: usize,
    tol: f64,
    ws: &mut KrylovWorkspace,
) -> (f64, u32) {
    let n = c.len();
    let norm = metric.norm_sqr(c).sqrt();
    if norm == 0.0 {
        return (0.0, 0);
    }
    ws.v[0].copy_from_slice(c);
    ws.v[0].iter_mut().for_each(|x| *x /= norm);
    metric.apply(&ws.v[0], &mut ws.sv[0]);

    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let mut applies = 0;
    let mut err = 0.0;
    let mut y = vec![C64::new(1.0, 0.0)];
    for j in 0..m {
        h.apply(&ws.v[j], &mut ws.w);
        applies += 1;
        metric.solve(&mut ws.w);
        metric.apply(&ws.w, &mut ws.sw);
        // Gram–Schmidt in the S metric, two passes
        let mut diag = 0.0;
        for _ in 0..2 {
            for i in 0..=j {
                let hij = dot(&ws.sv[i], &ws.w);
                if i == j {
                    diag += hij.re;
                }
                for k in 0..n {
                    ws.w[k] -= hij * ws.v[i][k];
                    ws.sw[k] -= hij * ws.sv[i][k];
                }
            }
        }
        alpha.push(diag);
        let b = dot(&ws.w, &ws.sw).re.max(0.0).sqrt();
        beta.push(b);
        y = projected_exp(&alpha, &beta, exponent);
        let scale = alpha.iter().fold(0.0f64, |s, a| s.max(a.abs())).max(1.0);
        if b <= 1e-13 * scale {
            // invariant subspace: the projection is exact
            err = 0.0;
            break;
        }
        err = b * y[j].norm() * norm;
        if err <= tol || j + 1 == m {
            break;
        }
        let inv = 1.0 / b;
        for k in 0..n {
            ws.v[j + 1][k] = ws.w[k] * inv;
            ws.sv[j + 1][k] = ws.sw[k] * inv;
        }
    }
    c.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
    for (i, yi) in y.iter().enumerate() {
        let s = yi * norm;
        for (ck, vk) in c.iter_mut().zip(&ws.v[i]) {
            *ck += s * vk;
        }
    }
    (err, applies)
}

/// One real-time step c(t) → c(t + dt) ≈ exp(−i dt S⁻¹H(t + dt/2)) c(t).
///
/// `make_h(t_mid)` supplies the Hamiltonian for a (sub)step centred at
/// `t_mid`. When the Krylov error estimate exceeds the tolerance the step is
/// split into two halves, recursively.
pub fn arnoldi_step<H, F, M>(
    coeffs: &mut [C64],
    t: f64,
    dt: f64,
    make_h: &F,
    metric: &M,
    cfg: &PropagatorConfig,
    ws: &mut KrylovWorkspace,
) -> Result<StepStats>
where
    H: Hamiltonian,
    F: Fn(f64) -> H,
    M: Metric + ?Sized,
{
    let mut stats = StepStats::default();
    step_recursive(coeffs, t, dt, make_h, metric, cfg, ws, 0, &mut stats)?;
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite { t: t + dt });
    }
    Ok(stats)
}

#[allow(clippy::too_many_arguments)]
fn step_recursive<H, F, M>(
    coeffs: &mut [C64],
    t: f64,
    dt: f64,
    make_h: &F,
    metric: &M,
    cfg: &PropagatorConfig,
    ws: &mut KrylovWorkspace,
    depth: u32,
    stats: &mut StepStats,
) -> Result<()>
where
    H: Hamiltonian,
    F: Fn(f64) -> H,
    M: Metric + ?Sized,
{
    let h = make_h(t + 0.5 * dt);
    let mut trial = coeffs.to_vec();
    let (err, applies) = krylov_exp(
        &h,
        metric,
        &mut trial,
        Exponent::Real(dt),
        cfg.krylov_dim,
        0.5 * cfg.residual_tol,
        ws,
    );
    stats.applies += applies;
    if err <= cfg.residual_tol || !err.is_finite() && depth >= cfg.max_halvings {
        coeffs.copy_from_slice(&trial);
        stats.substeps += 1;
        stats.max_error = stats.max_error.max(err);
        return Ok(());
    }
    if depth >= cfg.max_halvings {
        return Err(Error::StepRejected {
            t,
            tol: cfg.residual_tol,
            halvings: depth,
        });
    }
    step_recursive(coeffs, t, 0.5 * dt, make_h, metric, cfg, ws, depth + 1, stats)?;
    step_recursive(coeffs, t + 0.5 * dt, 0.5 * dt, make_h, metric, cfg, ws, depth + 1, stats)
}

/// c ← exp(−dτ S⁻¹H) c, then S-renormalized. Returns the Rayleigh quotient
/// ⟨c|H|c⟩ of the renormalized vector.
pub fn imaginary_time_step<H: Hamiltonian, M: Metric + ?Sized>(
    coeffs: &mut [C64],
    h: &H,
    metric: &M,
    dtau: f64,
    krylov_dim: usize,
    ws: &mut KrylovWorkspace,
) -> Result<f64> {
    krylov_exp(h, metric, coeffs, Exponent::Imaginary(dtau), krylov_dim, 1e-15, ws);
    let nrm = metric.norm_sqr(coeffs).sqrt();
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::NonFinite { t: dtau });
    }
    coeffs.iter_mut().for_each(|c| *c /= nrm);
    let mut hc = vec![C64::new(0.0, 0.0); coeffs.len()];
    h.apply(coeffs, &mut hc);
    Ok(dot(coeffs, &hc).re)
}

/// Radial mask cos^(1/exponent)(π (r − r₀) / (2 (r_max − r₀))) beyond r₀.
pub fn mask_value(r: f64, r0: f64, r_max: f64, exponent: f64) -> f64 {
    if r <= r0 {
        return 1.0;
    }
    if r >= r_max {
        return 0.0;
    }
    let c = (core::f64::consts::PI * (r - r0) / (2.0 * (r_max - r0))).cos();
    c.max(0.0).powf(1.0 / exponent)
}

/// Precomputed Galerkin mask S⁻¹M applied once per step.
#[derive(Debug, Clone)]
pub struct Absorber {
    mask: BandedBlockOperator,
}

impl Absorber {
    pub fn new(basis: &SpectralBasis, cfg: &PropagatorConfig) -> Result<Self> {
        cfg.validate(basis.r_max())?;
        let (r0, rm, ex) = (cfg.absorber_start, basis.r_max(), cfg.absorber_exponent);
        let m = basis.radial_function_matrix(|r| mask_value(r, r0, rm, ex));
        Ok(Self {
            mask: block_diagonal(basis, &m),
        })
    }

    /// Masks the state and returns the norm removed (also added to `absorbed`).
    pub fn apply<M: Metric + ?Sized>(&self, state: &mut WaveState, metric: &M) -> f64 {
        let before = metric.norm_sqr(&state.coeffs);
        let mut out = vec![C64::new(0.0, 0.0); state.coeffs.len()];
        self.mask.apply_add(&state.coeffs, &mut out, C64::new(1.0, 0.0));
        metric.solve(&mut out);
        state.coeffs = out;
        let after = metric.norm_sqr(&state.coeffs);
        let lost = (before - after).max(0.0);
        state.absorbed += lost;
        lost
    }
}
