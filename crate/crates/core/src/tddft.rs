//! Exchange-only time-dependent Kohn–Sham model of helium on the shared
//! B-spline × Legendre basis.
//!
//! Both electrons occupy one spatial orbital. The mean-field potential
//! V_H + V_x is kept as Legendre multipoles V_L(r) on the radial quadrature
//! nodes, so its Galerkin matrix couples channels through the Gaunt factors
//! ⟨Y_l′|P_L|Y_l⟩.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::{cos_theta_radial_coupling, dipole_coupling, radial_hamiltonian_block, Overlap, SpectralBasis};
use crate::basis::{BandedBlockOperator, Block, Gauge};
use crate::eigen::{lowest_eigenpairs, BoundStates};
use crate::error::{invalid, Error, Result};
use crate::evolution::{restrict_with, Dynamics};
use crate::linalg::{dot, BandCholesky, BandMatrix};
use crate::propagator::{
    arnoldi_step, imaginary_time_step, Absorber, Hamiltonian, KrylovMetric, KrylovWorkspace, PropagatorConfig,
    SpectralFilter, StepStats, WaveState,
};
use crate::pulse::PulseParams;
use crate::quadrature::{gauss_legendre, legendre_all};
use crate::sae::{expectation, LaserCoupling};

/// Spin occupations of the single spatial orbital.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupation {
    pub up: f64,
    pub down: f64,
}

impl Occupation {
    /// Helium: one electron of each spin.
    pub const CLOSED_SHELL: Self = Self { up: 1.0, down: 1.0 };
    /// One electron, fully spin-polarized.
    pub const POLARIZED_ONE: Self = Self { up: 1.0, down: 0.0 };
    /// One electron shared equally between both spin channels.
    pub const UNPOLARIZED_ONE: Self = Self { up: 0.5, down: 0.5 };

    pub fn total(&self) -> f64 {
        self.up + self.down
    }
}

/// Exchange-correlation functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Functional {
    /// Local exchange only.
    Xlda,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsSettings {
    pub nuclear_charge: f64,
    pub occupation: Occupation,
    pub functional: Functional,
    /// Include Hartree and exchange; `false` leaves the bare ionic problem.
    pub interacting: bool,
}

impl Default for KsSettings {
    fn default() -> Self {
        Self {
            nuclear_charge: 2.0,
            occupation: Occupation::CLOSED_SHELL,
            functional: Functional::Xlda,
            interacting: true,
        }
    }
}

/// V_x for one spin channel: −(6/π)^{1/3} n_σ^{1/3}.
pub fn xlda(n_sigma: f64) -> f64 {
    if n_sigma <= 0.0 {
        return 0.0;
    }
    -(6.0 / PI).cbrt() * n_sigma.cbrt()
}

/// Exchange energy density of one spin channel, −(3/2)(3/4π)^{1/3} n_σ^{4/3}.
pub fn xlda_energy_density(n_sigma: f64) -> f64 {
    if n_sigma <= 0.0 {
        return 0.0;
    }
    -1.5 * (3.0 / (4.0 * PI)).cbrt() * n_sigma * n_sigma.cbrt()
}

/// Gauss–Legendre grid in cos θ with the normalized Y_l^0 and P_L tabulated.
#[derive(Debug, Clone)]
pub struct AngularGrid {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    /// Y_l^0(x_a), row-major (l, a).
    ylm: Vec<f64>,
    /// P_L(x_a), row-major (L, a).
    pl: Vec<f64>,
}

impl AngularGrid {
    pub fn new(l_max: usize, l_multipole: usize, points: usize) -> Self {
        let (x, w) = gauss_legendre(points);
        let n_l = l_max + 1;
        let n_multipole = l_multipole + 1;
        let top = l_max.max(l_multipole);
        let mut ylm = vec![0.0; n_l * points];
        let mut pl = vec![0.0; n_multipole * points];
        for (a, &xa) in x.iter().enumerate() {
            let p = legendre_all(top, xa);
            for l in 0..n_l {
                ylm[l * points + a] = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt() * p[l];
            }
            for big_l in 0..n_multipole {
                pl[big_l * points + a] = p[big_l];
            }
        }
        Self {
            x,
            w,
            ylm,
            pl,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    #[inline]
    pub fn y(&self, l: usize, a: usize) -> f64 {
        self.ylm[l * self.x.len() + a]
    }

    #[inline]
    pub fn p(&self, big_l: usize, a: usize) -> f64 {
        self.pl[big_l * self.x.len() + a]
    }

    /// ⟨Y_l′|P_L|Y_l⟩ = 2π ∫ Y_l′ P_L Y_l dx.
    pub fn gaunt(&self, lp: usize, big_l: usize, l: usize) -> f64 {
        2.0 * PI
            * (0..self.len())
                .map(|a| self.w[a] * self.y(lp, a) * self.p(big_l, a) * self.y(l, a))
                .sum::<f64>()
    }
}

/// Density on the (radial node × angular node) grid and its multipoles.
#[derive(Debug, Clone)]
pub struct DensityField {
    /// |ψ|², row-major (q, a).
    pub orbital: Vec<f64>,
    pub occupation: Occupation,
    /// n_L(r_q) with n(r, x) = Σ_L n_L(r) P_L(x).
    pub multipoles: Vec<Vec<f64>>,
    n_angular: usize,
}

impl DensityField {
    pub fn total(&self, q: usize, a: usize) -> f64 {
        self.occupation.total() * self.orbital[q * self.n_angular + a]
    }
}

/// Radial functions u_l(r_q) = Σ_n c_nl B_n(r_q), row-major (l, q).
fn radial_functions(basis: &SpectralBasis, coeffs: &[C64]) -> Vec<C64> {
    let quad = basis.quadrature();
    let nq = quad.len();
    let nr = basis.n_radial();
    let k = basis.order();
    let mut u = vec![C64::new(0.0, 0.0); basis.n_l() * nq];
    for q in 0..nq {
        let first = quad.first_spline(q);
        let vals = quad.values(q);
        for l in 0..basis.n_l() {
            let c = &coeffs[l * nr..(l + 1) * nr];
            let mut s = C64::new(0.0, 0.0);
            for (t, b) in vals.iter().enumerate().take(k) {
                let j = first + t;
                if j >= 1 && j <= nr {
                    s += c[j - 1] * b;
                }
            }
            u[l * nq + q] = s;
        }
    }
    u
}

/// 2|ψ|²-type density of an orbital on the model grid.
pub fn density(
    basis: &SpectralBasis,
    grid: &AngularGrid,
    coeffs: &[C64],
    occupation: Occupation,
    l_multipole: usize,
) -> DensityField {
    let quad = basis.quadrature();
    let nq = quad.len();
    let na = grid.len();
    let u = radial_functions(basis, coeffs);
    let mut orbital = vec![0.0; nq * na];
    for q in 0..nq {
        let r = quad.nodes()[q];
        for a in 0..na {
            let mut psi = C64::new(0.0, 0.0);
            for l in 0..basis.n_l() {
                psi += u[l * nq + q] * grid.y(l, a);
            }
            orbital[q * na + a] = psi.norm_sqr() / (r * r);
        }
    }
    let multipoles = project_multipoles(grid, &orbital, nq, l_multipole, occupation.total());
    DensityField {
        orbital,
        occupation,
        multipoles,
        n_angular: na,
    }
}

/// f_L(r_q) = (2L+1)/2 ∫ f(r_q, x) P_L(x) dx, scaled by `factor`.
fn project_multipoles(grid: &AngularGrid, f: &[f64], nq: usize, l_max: usize, factor: f64) -> Vec<Vec<f64>> {
    let na = grid.len();
    (0..=l_max)
        .map(|big_l| {
            let c = factor * (2 * big_l + 1) as f64 / 2.0;
            (0..nq)
                .map(|q| {
                    let row = &f[q * na..(q + 1) * na];
                    c * (0..na).map(|a| grid.w[a] * grid.p(big_l, a) * row[a]).sum::<f64>()
                })
                .collect()
        })
        .collect()
}

/// Radial Poisson solver for the Hartree multipoles.
///
/// For each L, U = r V_H,L solves U″ − L(L+1)U/r² = −4π r n_L. The part with
/// U(0) = U(r_max) = 0 is a Galerkin solve in the retained splines; the
/// boundary value is carried by the homogeneous solution (r/r_max)^{L+1},
/// fixed from the multipole moment ∫ n_L r^{L+2} dr.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    factors: Vec<BandCholesky>,
}

impl PoissonSolver {
    pub fn new(basis: &SpectralBasis, l_multipole: usize) -> Result<Self> {
        let stiffness = basis.kinetic_radial().scaled(2.0);
        let factors = (0..=l_multipole)
            .map(|big_l| {
                let c = (big_l * (big_l + 1)) as f64;
                let a = if big_l == 0 {
                    stiffness.clone()
                } else {
                    stiffness.add_scaled(&basis.radial_function_matrix(|r| 1.0 / (r * r)), c)
                };
                BandCholesky::new(&a)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { factors })
    }

    /// V_H,L at the radial nodes from n_L at the radial nodes.
    pub fn solve(&self, basis: &SpectralBasis, multipoles: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let quad = basis.quadrature();
        let nodes = quad.nodes();
        let weights = quad.weights();
        let nr = basis.n_radial();
        let k = basis.order();
        let r_max = basis.r_max();
        multipoles
            .iter()
            .zip(&self.factors)
            .enumerate()
            .map(|(big_l, (n_l, chol))| {
                let lf = big_l as i32;
                let mut rhs = vec![0.0; nr];
                let mut moment = 0.0;
                for q in 0..nodes.len() {
                    let r = nodes[q];
                    let f = 4.0 * PI * weights[q] * r * n_l[q];
                    moment += weights[q] * n_l[q] * r.powi(lf + 2);
                    let first = quad.first_spline(q);
                    for (t, b) in quad.values(q).iter().enumerate().take(k) {
                        let j = first + t;
                        if j >= 1 && j <= nr {
                            rhs[j - 1] += f * b;
                        }
                    }
                }
                chol.solve_real(&mut rhs);
                let u_edge = 4.0 * PI / (2 * big_l + 1) as f64 * moment * r_max.powi(-lf);
                (0..nodes.len())
                    .map(|q| {
                        let r = nodes[q];
                        let first = quad.first_spline(q);
                        let mut u = 0.0;
                        for (t, b) in quad.values(q).iter().enumerate().take(k) {
                            let j = first + t;
                            if j >= 1 && j <= nr {
                                u += rhs[j - 1] * b;
                            }
                        }
                        u += u_edge * (r / r_max).powi(lf + 1);
                        u / r
                    })
                    .collect()
            })
            .collect()
    }
}

/// Hartree multipoles V_H,L(r_q) from density multipoles n_L(r_q), with
/// V_H(r, x) = Σ_L V_H,L(r) P_L(x).
pub fn hartree(basis: &SpectralBasis, multipoles: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let solver = PoissonSolver::new(basis, multipoles.len().saturating_sub(1))?;
    Ok(solver.solve(basis, multipoles))
}

/// Mean-field potential V_H + V_x as multipoles on the radial nodes.
#[derive(Debug, Clone)]
pub struct MeanFieldPotential {
    pub multipoles: Vec<Vec<f64>>,
    pub hartree_energy: f64,
    pub exchange_energy: f64,
    /// ∫ n d³r.
    pub electrons: f64,
}

impl MeanFieldPotential {
    pub fn average(a: &Self, b: &Self) -> Self {
        Self {
            multipoles: a
                .multipoles
                .iter()
                .zip(&b.multipoles)
                .map(|(x, y)| x.iter().zip(y).map(|(p, q)| 0.5 * (p + q)).collect())
                .collect(),
            hartree_energy: 0.5 * (a.hartree_energy + b.hartree_energy),
            exchange_energy: 0.5 * (a.exchange_energy + b.exchange_energy),
            electrons: 0.5 * (a.electrons + b.electrons),
        }
    }
}

/// Galerkin matrices ∫ B_i V_L B_j dr of the mean-field multipoles; `None`
/// for multipoles below the skip threshold.
#[derive(Debug, Clone)]
pub struct MeanFieldOperator {
    pub matrices: Vec<Option<BandMatrix>>,
}

impl MeanFieldOperator {
    pub fn none(n_multipole: usize) -> Self {
        Self {
            matrices: vec![None; n_multipole],
        }
    }
}

/// Kohn–Sham model with everything that does not depend on the density
/// precomputed.
#[derive(Debug, Clone)]
pub struct KsModel {
    pub basis: SpectralBasis,
    pub settings: KsSettings,
    pub overlap: Overlap,
    /// Kinetic + centrifugal + ionic −Z/r, block-diagonal.
    pub h0: BandedBlockOperator,
    pub coupling: LaserCoupling,
    pub z: BandedBlockOperator,
    /// cos θ · Z/r², the ionic ∂V/∂z.
    pub ion_force: BandedBlockOperator,
    pub grid: AngularGrid,
    poisson: PoissonSolver,
    /// Highest multipole kept for V_H and V_x.
    pub l_multipole: usize,
    /// gaunt[(L · n_l + l′) · n_l + l].
    gaunt: Vec<f64>,
    pub filter: Option<SpectralFilter>,
}

impl KsModel {
    pub fn new(basis: SpectralBasis, settings: KsSettings, gauge: Gauge) -> Result<Self> {
        if !(settings.nuclear_charge > 0.0) {
            return Err(invalid("tddft.nuclear_charge", "must be positive"));
        }
        if !(settings.occupation.up >= 0.0 && settings.occupation.down >= 0.0 && settings.occupation.total() > 0.0) {
            return Err(invalid("tddft.occupation", "occupations must be non-negative and not both zero"));
        }
        let overlap = Overlap::new(&basis)?;
        let zc = settings.nuclear_charge;
        let blocks = (0..basis.n_l())
            .map(|l| {
                Ok(Block {
                    row_l: l,
                    col_l: l,
                    matrix: radial_hamiltonian_block(&basis, l, |r| -zc / r)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let h0 = BandedBlockOperator::new(basis.n_radial(), basis.n_l(), C64::new(1.0, 0.0), blocks, true);
        let coupling = LaserCoupling::new(&basis, gauge);
        let z = dipole_coupling(&basis, Gauge::Length);
        let ion_force = cos_theta_radial_coupling(&basis, |r| zc / (r * r));
        let l_multipole = (2 * basis.l_max()).min(8);
        let grid = AngularGrid::new(basis.l_max(), l_multipole, basis.l_max() + l_multipole / 2 + 2);
        let n_l = basis.n_l();
        let poisson = PoissonSolver::new(&basis, l_multipole)?;
        let mut gaunt = vec![0.0; (l_multipole + 1) * n_l * n_l];
        for big_l in 0..=l_multipole {
            for lp in 0..n_l {
                for l in 0..n_l {
                    let g = grid.gaunt(lp, big_l, l);
                    gaunt[(big_l * n_l + lp) * n_l + l] = if g.abs() < 1e-14 { 0.0 } else { g };
                }
            }
        }
        Ok(Self {
            basis,
            settings,
            overlap,
            h0,
            coupling,
            z,
            ion_force,
            grid,
            poisson,
            l_multipole,
            gaunt,
            filter: None,
        })
    }

    /// Same model with a different angular truncation.
    pub fn with_l_max(&self, l_max: usize) -> Result<Self> {
        Self::new(self.basis.with_l_max(l_max), self.settings, self.coupling.gauge)
    }

    pub fn gauge(&self) -> Gauge {
        self.coupling.gauge
    }

    #[inline]
    pub fn gaunt(&self, big_l: usize, lp: usize, l: usize) -> f64 {
        let n_l = self.basis.n_l();
        self.gaunt[(big_l * n_l + lp) * n_l + l]
    }

    pub fn density(&self, coeffs: &[C64]) -> DensityField {
        density(&self.basis, &self.grid, coeffs, self.settings.occupation, self.l_multipole)
    }

    /// V_H + V_x of the orbital `coeffs`, with the Hartree and exchange energies.
    pub fn mean_field(&self, coeffs: &[C64]) -> MeanFieldPotential {
        let nq = self.basis.quadrature().len();
        let n_mult = self.l_multipole + 1;
        if !self.settings.interacting {
            return MeanFieldPotential {
                multipoles: vec![vec![0.0; nq]; n_mult],
                hartree_energy: 0.0,
                exchange_energy: 0.0,
                electrons: self.settings.occupation.total() * self.overlap.norm_sqr(coeffs),
            };
        }
        let dens = self.density(coeffs);
        let vh = self.poisson.solve(&self.basis, &dens.multipoles);
        let occ = self.settings.occupation;
        let na = self.grid.len();
        let quad = self.basis.quadrature();
        // the orbital carries the majority spin
        let orbital_spin = occ.up.max(occ.down);
        let vx_scale = -(6.0 / PI * orbital_spin).cbrt();
        let ex_scale = -1.5 * (3.0 / (4.0 * PI)).cbrt() * (occ.up * occ.up.cbrt() + occ.down * occ.down.cbrt());
        let mut vx = vec![0.0; nq * na];
        let (mut e_x, mut electrons) = (0.0, 0.0);
        for q in 0..nq {
            let r = quad.nodes()[q];
            let wr = quad.weights()[q] * r * r * 2.0 * PI;
            for a in 0..na {
                let rho = dens.orbital[q * na + a].max(0.0);
                let c = rho.cbrt();
                vx[q * na + a] = vx_scale * c;
                let w = wr * self.grid.w[a];
                e_x += w * ex_scale * rho * c;
                electrons += w * rho;
            }
        }
        electrons *= occ.total();
        // ∫ V_H n d³r = Σ_L 4π/(2L+1) ∫ V_H,L n_L r² dr
        let e_h = 0.5
            * (0..n_mult)
                .map(|big_l| {
                    4.0 * PI / (2 * big_l + 1) as f64
                        * (0..nq)
                            .map(|q| {
                                let r = quad.nodes()[q];
                                quad.weights()[q] * r * r * vh[big_l][q] * dens.multipoles[big_l][q]
                            })
                            .sum::<f64>()
                })
                .sum::<f64>();
        let vxl = project_multipoles(&self.grid, &vx, nq, self.l_multipole, 1.0);
        let multipoles = vh.iter().zip(&vxl).map(|(h, x)| h.iter().zip(x).map(|(a, b)| a + b).collect()).collect();
        MeanFieldPotential {
            multipoles,
            hartree_energy: e_h,
            exchange_energy: e_x,
            electrons,
        }
    }

    pub fn mean_field_operator(&self, pot: &MeanFieldPotential) -> MeanFieldOperator {
        if !self.settings.interacting {
            return MeanFieldOperator::none(self.l_multipole + 1);
        }
        let scale = pot.multipoles[0].iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let kept: Vec<usize> = (0..pot.multipoles.len())
            .filter(|&big_l| pot.multipoles[big_l].iter().fold(0.0f64, |m, x| m.max(x.abs())) > 1e-13 * scale)
            .collect();
        let gs: Vec<&[f64]> = kept.iter().map(|&big_l| pot.multipoles[big_l].as_slice()).collect();
        let mut matrices = vec![None; pot.multipoles.len()];
        for (big_l, m) in kept.into_iter().zip(self.basis.radial_node_matrices(&gs)) {
            matrices[big_l] = Some(m);
        }
        MeanFieldOperator { matrices }
    }

    /// Matrix-free H_KS + strength · coupling.
    pub fn hamiltonian<'a>(
        &'a self,
        mean: &'a MeanFieldOperator,
        coupling: &'a BandedBlockOperator,
        strength: f64,
    ) -> KsHamiltonian<'a> {
        KsHamiltonian {
            model: self,
            mean,
            coupling,
            strength,
        }
    }

    /// Total energy Σ_σ occ_σ ⟨T + V_ion (+ static field)⟩ + E_H + E_x.
    pub fn total_energy(&self, coeffs: &[C64], pot: &MeanFieldPotential, static_field: f64) -> f64 {
        let mut e1 = expectation(&self.h0, coeffs);
        if static_field != 0.0 {
            e1 += static_field * expectation(&self.z, coeffs);
        }
        self.settings.occupation.total() * e1 + pot.hartree_energy + pot.exchange_energy
    }

    /// d = −N⟨z⟩.
    pub fn dipole(&self, coeffs: &[C64]) -> f64 {
        -self.settings.occupation.total() * expectation(&self.z, coeffs)
    }

    /// Ehrenfest d̈ = N(⟨∂V_ion/∂z⟩ + E(t)). The mean-field contribution
    /// integrates to zero (no net self-force of the Hartree and local
    /// exchange potentials), so it is not evaluated.
    pub fn acceleration(&self, coeffs: &[C64], field: f64) -> f64 {
        self.settings.occupation.total() * (expectation(&self.ion_force, coeffs) + field)
    }

    /// Field-free radial blocks of H_KS for a spherical mean field.
    pub fn field_free_blocks(&self, mean: &MeanFieldOperator) -> Vec<BandMatrix> {
        (0..self.basis.n_l())
            .map(|l| {
                let h = self.h0.block(l, l).expect("diagonal block").clone();
                match &mean.matrices[0] {
                    Some(m0) => h.add_scaled(m0, self.gaunt(0, l, l)),
                    None => h,
                }
            })
            .collect()
    }

    pub fn set_filter(&mut self, mean: &MeanFieldOperator, cutoff: Option<f64>) -> Result<()> {
        self.filter = match cutoff {
            Some(e) => Some(SpectralFilter::new(&self.field_free_blocks(mean), self.overlap.radial(), e)?),
            None => None,
        };
        Ok(())
    }

    pub fn metric(&self) -> KrylovMetric<'_> {
        KrylovMetric {
            overlap: &self.overlap,
            filter: self.filter.as_ref(),
        }
    }

    /// Bound states of the field-free Kohn–Sham Hamiltonian at a frozen
    /// (spherical) mean field.
    pub fn bound_states(&self, mean: &MeanFieldOperator) -> Result<BoundStates> {
        BoundStates::compute(&self.field_free_blocks(mean), self.overlap.radial())
    }
}

/// H_KS(t) apply.
#[derive(Debug, Clone, Copy)]
pub struct KsHamiltonian<'a> {
    model: &'a KsModel,
    mean: &'a MeanFieldOperator,
    coupling: &'a BandedBlockOperator,
    strength: f64,
}

impl Hamiltonian for KsHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.model.basis.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let m = self.model;
        let nr = m.basis.n_radial();
        let n_l = m.basis.n_l();
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        m.h0.apply_add(x, y, C64::new(1.0, 0.0));
        if self.strength != 0.0 {
            self.coupling.apply_add(x, y, C64::new(self.strength, 0.0));
        }
        let mut t = vec![C64::new(0.0, 0.0); nr];
        for (big_l, mat) in self.mean.matrices.iter().enumerate() {
            let Some(mat) = mat else { continue };
            for l in 0..n_l {
                let xl = &x[l * nr..(l + 1) * nr];
                if xl.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
                    continue;
                }
                t.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                mat.mul_add_complex(xl, &mut t, C64::new(1.0, 0.0));
                let lo = l.saturating_sub(big_l);
                let hi = (l + big_l).min(n_l - 1);
                for lp in lo..=hi {
                    let g = m.gaunt(big_l, lp, l);
                    if g == 0.0 {
                        continue;
                    }
                    for (yi, ti) in y[lp * nr..(lp + 1) * nr].iter_mut().zip(&t) {
                        *yi += ti * g;
                    }
                }
            }
        }
    }
}

/// Controls for the imaginary-time ground-state search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImaginaryTimeConfig {
    pub dtau: f64,
    pub krylov_dim: usize,
    /// Stop when the total energy changes by less than this per step.
    pub energy_tol: f64,
    pub max_steps: usize,
}

impl Default for ImaginaryTimeConfig {
    fn default() -> Self {
        Self {
            dtau: 0.2,
            krylov_dim: 40,
            energy_tol: 1e-10,
            max_steps: 4000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KsGroundState {
    pub coeffs: Vec<C64>,
    pub total_energy: f64,
    pub orbital_energy: f64,
    /// Total energy after every imaginary-time step.
    pub trace: Vec<f64>,
}

/// Imaginary-time Kohn–Sham ground state, optionally in a static field
/// V = +ε z. Without a field the search runs in the l = 0 channel only (the
/// spherical problem is closed there) and the result is embedded.
pub fn ks_ground_state(model: &KsModel, cfg: &ImaginaryTimeConfig, static_field: f64) -> Result<KsGroundState> {
    if !(cfg.dtau > 0.0) || cfg.krylov_dim < 4 {
        return Err(invalid("imaginary_time", "dtau must be positive and krylov_dim ≥ 4"));
    }
    if static_field == 0.0 && model.basis.l_max() > 0 {
        let small = model.with_l_max(0)?;
        let g = ks_ground_state(&small, cfg, 0.0)?;
        let mut coeffs = vec![C64::new(0.0, 0.0); model.basis.dim()];
        coeffs[..g.coeffs.len()].copy_from_slice(&g.coeffs);
        return Ok(KsGroundState { coeffs, ..g });
    }
    // start from the bare ionic 1s orbital
    let h00 = model.h0.block(0, 0).expect("l = 0 block");
    let start = lowest_eigenpairs(h00, model.overlap.radial(), 1, 1e-12)?;
    let mut c = vec![C64::new(0.0, 0.0); model.basis.dim()];
    for (ci, v) in c.iter_mut().zip(&start.vectors[0]) {
        *ci = C64::new(*v, 0.0);
    }
    let mut ws = KrylovWorkspace::new(model.basis.dim(), cfg.krylov_dim);
    let mut pot = model.mean_field(&c);
    let mut trace = Vec::new();
    let mut last = model.total_energy(&c, &pot, static_field);
    let mut orbital_energy = 0.0;
    for step in 0..cfg.max_steps {
        let mean = model.mean_field_operator(&pot);
        let h = model.hamiltonian(&mean, &model.z, static_field);
        orbital_energy = imaginary_time_step(&mut c, &h, &model.overlap, cfg.dtau, cfg.krylov_dim, &mut ws)
            .map_err(|_| Error::NonFinite { t: step as f64 * cfg.dtau })?;
        pot = model.mean_field(&c);
        let e = model.total_energy(&c, &pot, static_field);
        trace.push(e);
        if !e.is_finite() {
            return Err(Error::NonFinite { t: step as f64 * cfg.dtau });
        }
        if (e - last).abs() < cfg.energy_tol {
            return Ok(KsGroundState {
                coeffs: c,
                total_energy: e,
                orbital_energy,
                trace,
            });
        }
        last = e;
    }
    let _ = orbital_energy;
    let n = trace.len();
    let last_change = if n >= 2 { (trace[n - 1] - trace[n - 2]).abs() } else { f64::NAN };
    Err(Error::NoConvergence {
        iterations: cfg.max_steps,
        last_change,
        trace,
    })
}

/// Residual ‖H_KS ψ − ε S ψ‖ of a converged orbital.
pub fn self_consistency_residual(model: &KsModel, coeffs: &[C64]) -> (f64, f64) {
    let pot = model.mean_field(coeffs);
    let mean = model.mean_field_operator(&pot);
    let h = model.hamiltonian(&mean, &model.z, 0.0);
    let mut hc = vec![C64::new(0.0, 0.0); coeffs.len()];
    h.apply(coeffs, &mut hc);
    let eps = dot(coeffs, &hc).re / model.overlap.norm_sqr(coeffs);
    let mut sc = vec![C64::new(0.0, 0.0); coeffs.len()];
    model.overlap.apply(coeffs, &mut sc);
    let res: f64 = hc.iter().zip(&sc).map(|(a, b)| (a - b * eps).norm_sqr()).sum::<f64>().sqrt();
    (eps, res)
}

/// Finite-field static polarizability with Richardson extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarizability {
    /// Central-difference estimate at ε.
    pub coarse: f64,
    /// Central-difference estimate at ε/2.
    pub fine: f64,
    /// (4·fine − coarse)/3.
    pub extrapolated: f64,
}

/// α from d(±ε) and d(±ε/2) with V = +ε z, d = −N⟨z⟩, so that d ≈ α ε.
pub fn static_polarizability(model: &KsModel, field_step: f64, cfg: &ImaginaryTimeConfig) -> Result<Polarizability> {
    if !(field_step > 0.0) {
        return Err(invalid("field_step", "must be positive"));
    }
    let alpha_at = |eps: f64| -> Result<f64> {
        let plus = ks_ground_state(model, cfg, eps)?;
        let minus = ks_ground_state(model, cfg, -eps)?;
        Ok((model.dipole(&plus.coeffs) - model.dipole(&minus.coeffs)) / (2.0 * eps))
    };
    let coarse = alpha_at(field_step)?;
    let fine = alpha_at(0.5 * field_step)?;
    let disagreement = ((coarse - fine) / fine).abs();
    if disagreement > 0.02 {
        return Err(Error::NonlinearResponse(disagreement));
    }
    Ok(Polarizability {
        coarse,
        fine,
        extrapolated: (4.0 * fine - coarse) / 3.0,
    })
}

/// Real-time Kohn–Sham propagation around a converged ground state.
///
/// Each step predicts the orbital at t + dt with the mean field of the
/// current density, then repeats the step from t with the average of the
/// start and predicted mean fields.
#[derive(Debug, Clone)]
pub struct KsPropagation {
    pub model: KsModel,
    /// Mean field of the ground state the run starts from.
    pub reference: MeanFieldPotential,
    current: Option<(u64, MeanFieldPotential)>,
}

impl KsPropagation {
    pub fn new(model: KsModel, ground: &[C64]) -> Self {
        let reference = model.mean_field(ground);
        Self {
            model,
            reference,
            current: None,
        }
    }

    fn reference_operator(&self) -> MeanFieldOperator {
        self.model.mean_field_operator(&self.reference)
    }

    /// Field-free bound states with the reference mean field frozen.
    pub fn bound_states(&self) -> Result<BoundStates> {
        self.model.bound_states(&self.reference_operator())
    }

    fn potential_at(&mut self, state: &WaveState) -> MeanFieldPotential {
        match &self.current {
            Some((step, pot)) if *step == state.step => pot.clone(),
            _ => {
                let pot = self.model.mean_field(&state.coeffs);
                self.current = Some((state.step, pot.clone()));
                pot
            }
        }
    }
}

impl Dynamics for KsPropagation {
    fn basis(&self) -> &SpectralBasis {
        &self.model.basis
    }

    fn overlap(&self) -> &Overlap {
        &self.model.overlap
    }

    fn gauge(&self) -> Gauge {
        self.model.gauge()
    }

    fn prepare(&mut self, cfg: &PropagatorConfig) -> Result<()> {
        let op = self.reference_operator();
        self.current = None;
        self.model.set_filter(&op, cfg.energy_cutoff)
    }

    fn restrict(&self, coeffs: &mut [C64]) {
        restrict_with(self.model.filter.as_ref(), &self.model.overlap, coeffs)
    }

    fn absorb(&self, absorber: &Absorber, state: &mut WaveState) -> f64 {
        absorber.apply(state, &self.model.metric())
    }

    fn advance(
        &mut self,
        state: &mut WaveState,
        pulse: &PulseParams,
        dt: f64,
        cfg: &PropagatorConfig,
        ws: &mut KrylovWorkspace,
    ) -> Result<StepStats> {
        let start_pot = self.potential_at(state);
        let model = &self.model;
        let coupling = &model.coupling;
        let metric = model.metric();

        let start_op = model.mean_field_operator(&start_pot);
        let mut predicted = state.coeffs.clone();
        let make_h = |t: f64| model.hamiltonian(&start_op, &coupling.operator, coupling.strength(pulse, t));
        let first = arnoldi_step(&mut predicted, state.t, dt, &make_h, &metric, cfg, ws)?;

        let end_pot = model.mean_field(&predicted);
        let mid_op = model.mean_field_operator(&MeanFieldPotential::average(&start_pot, &end_pot));
        let make_h = |t: f64| model.hamiltonian(&mid_op, &coupling.operator, coupling.strength(pulse, t));
        let second = arnoldi_step(&mut state.coeffs, state.t, dt, &make_h, &metric, cfg, ws)?;
        self.current = None;
        Ok(StepStats {
            substeps: first.substeps.max(second.substeps),
            applies: first.applies + second.applies,
            max_error: first.max_error.max(second.max_error),
        })
    }

    fn observe(&mut self, state: &WaveState, pulse: &PulseParams) -> (f64, f64) {
        let field = pulse.electric_field(state.t);
        (
            self.model.dipole(&state.coeffs),
            self.model.acceleration(&state.coeffs, field),
        )
    }
}
