//! Single-active-electron model of helium with the Tong–Lin effective
//! potential.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::{
    cos_theta_radial_coupling, dipole_coupling, radial_hamiltonian_block, BandedBlockOperator, Block, Gauge,
    Overlap, SpectralBasis,
};
use crate::eigen::{lowest_eigenpairs, BoundStates};
use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, BandMatrix};
use crate::propagator::{Hamiltonian, KrylovMetric, SpectralFilter};
use crate::pulse::PulseParams;

/// V(r) = −(Z + a₁e^{−a₂r} + a₃ r e^{−a₄r} + a₅e^{−a₆r}) / r
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPotential {
    pub z: f64,
    pub a: [f64; 6],
}

impl Default for ModelPotential {
    /// Helium parameters.
    fn default() -> Self {
        Self {
            z: 1.0,
            a: [1.231, 0.662, -1.325, 1.236, -0.231, 0.480],
        }
    }
}

impl ModelPotential {
    /// Effective charge Z(r) = −r V(r).
    pub fn charge(&self, r: f64) -> f64 {
        let a = &self.a;
        self.z + a[0] * (-a[1] * r).exp() + a[2] * r * (-a[3] * r).exp() + a[4] * (-a[5] * r).exp()
    }

    fn charge_derivative(&self, r: f64) -> f64 {
        let a = &self.a;
        -a[0] * a[1] * (-a[1] * r).exp() + a[2] * (1.0 - a[3] * r) * (-a[3] * r).exp()
            - a[4] * a[5] * (-a[5] * r).exp()
    }

    /// Unchecked evaluation for r > 0.
    pub fn value(&self, r: f64) -> f64 {
        -self.charge(r) / r
    }

    /// dV/dr.
    pub fn derivative(&self, r: f64) -> f64 {
        self.charge(r) / (r * r) - self.charge_derivative(r) / r
    }

    pub fn tong_lin(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(invalid("r", "potential is defined for r > 0 only"));
        }
        Ok(self.value(r))
    }
}

/// Field-free SAE Hamiltonian: block-diagonal in l.
pub fn assemble_sae(basis: &SpectralBasis, potential: &ModelPotential) -> Result<BandedBlockOperator> {
    let blocks = (0..basis.n_l())
        .map(|l| {
            Ok(Block {
                row_l: l,
                col_l: l,
                matrix: radial_hamiltonian_block(basis, l, |r| potential.value(r))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BandedBlockOperator::new(
        basis.n_radial(),
        basis.n_l(),
        C64::new(1.0, 0.0),
        blocks,
        true,
    ))
}

/// Field-free laser coupling tagged with its gauge.
#[derive(Debug, Clone)]
pub struct LaserCoupling {
    pub gauge: Gauge,
    pub operator: BandedBlockOperator,
}

impl LaserCoupling {
    pub fn new(basis: &SpectralBasis, gauge: Gauge) -> Self {
        Self {
            gauge,
            operator: dipole_coupling(basis, gauge),
        }
    }

    /// E(t) in the length gauge, A(t) in the velocity gauge.
    pub fn strength(&self, pulse: &PulseParams, t: f64) -> f64 {
        match self.gauge {
            Gauge::Length => pulse.electric_field(t),
            Gauge::Velocity => pulse.vector_potential(t),
        }
    }
}

/// H0 + s·D as a matrix-free apply.
#[derive(Debug, Clone, Copy)]
pub struct FieldHamiltonian<'a> {
    pub h0: &'a BandedBlockOperator,
    pub coupling: &'a BandedBlockOperator,
    pub strength: f64,
}

impl Hamiltonian for FieldHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.h0.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        self.h0.apply_add(x, y, C64::new(1.0, 0.0));
        if self.strength != 0.0 {
            self.coupling.apply_add(x, y, C64::new(self.strength, 0.0));
        }
    }
}

/// H(t) = H0 + E(t) z (length) or H0 + A(t) p_z (velocity).
pub fn sae_hamiltonian_at<'a>(
    t: f64,
    h0: &'a BandedBlockOperator,
    coupling: &'a LaserCoupling,
    pulse: &PulseParams,
    gauge: Gauge,
) -> Result<FieldHamiltonian<'a>> {
    if coupling.gauge != gauge {
        return Err(Error::GaugeMismatch {
            built: coupling.gauge,
            requested: gauge,
        });
    }
    Ok(FieldHamiltonian {
        h0,
        coupling: &coupling.operator,
        strength: coupling.strength(pulse, t),
    })
}

/// Ground-state eigenpair embedded in the full (n, l) space.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub coeffs: Vec<C64>,
}

/// Everything the SAE propagation needs, assembled once.
#[derive(Debug, Clone)]
pub struct SaeModel {
    pub basis: SpectralBasis,
    pub potential: ModelPotential,
    pub overlap: Overlap,
    pub h0: BandedBlockOperator,
    pub coupling: LaserCoupling,
    /// cos θ · r, the z operator.
    pub z: BandedBlockOperator,
    /// cos θ · V′(r) = ∂V/∂z.
    pub force: BandedBlockOperator,
    /// Spectral restriction used during propagation, built on demand.
    pub filter: Option<SpectralFilter>,
}

impl SaeModel {
    pub fn new(basis: SpectralBasis, potential: ModelPotential, gauge: Gauge) -> Result<Self> {
        let overlap = Overlap::new(&basis)?;
        let h0 = assemble_sae(&basis, &potential)?;
        let coupling = LaserCoupling::new(&basis, gauge);
        let z = match gauge {
            Gauge::Length => coupling.operator.clone(),
            Gauge::Velocity => dipole_coupling(&basis, Gauge::Length),
        };
        let force = cos_theta_radial_coupling(&basis, |r| potential.derivative(r));
        Ok(Self {
            basis,
            potential,
            overlap,
            h0,
            coupling,
            z,
            force,
            filter: None,
        })
    }

    /// Builds (or drops) the spectral filter for the given cutoff.
    pub fn set_energy_cutoff(&mut self, cutoff: Option<f64>) -> Result<()> {
        if self.filter.as_ref().map(|f| f.energy_cut()) == cutoff {
            return Ok(());
        }
        self.filter = match cutoff {
            Some(e) => {
                let blocks: Vec<BandMatrix> = (0..self.basis.n_l()).map(|l| self.radial_block(l).clone()).collect();
                Some(SpectralFilter::new(&blocks, self.overlap.radial(), e)?)
            }
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

    pub fn gauge(&self) -> Gauge {
        self.coupling.gauge
    }

    pub fn radial_block(&self, l: usize) -> &BandMatrix {
        self.h0.block(l, l).expect("diagonal block present")
    }

    pub fn ground_state(&self) -> Result<GroundState> {
        let pairs = lowest_eigenpairs(self.radial_block(0), self.overlap.radial(), 1, 1e-12)?;
        let mut coeffs = vec![C64::new(0.0, 0.0); self.basis.dim()];
        for (c, v) in coeffs.iter_mut().zip(&pairs.vectors[0]) {
            *c = C64::new(*v, 0.0);
        }
        Ok(GroundState {
            energy: pairs.values[0],
            coeffs,
        })
    }

    /// Lowest eigenvalue of channel l.
    pub fn lowest_in_channel(&self, l: usize) -> Result<f64> {
        if l >= self.basis.n_l() {
            return Err(invalid("l", "exceeds basis l_max"));
        }
        Ok(lowest_eigenpairs(self.radial_block(l), self.overlap.radial(), 1, 1e-12)?.values[0])
    }

    pub fn bound_states(&self) -> Result<BoundStates> {
        let blocks: Vec<BandMatrix> = (0..self.basis.n_l()).map(|l| self.radial_block(l).clone()).collect();
        BoundStates::compute(&blocks, self.overlap.radial())
    }

    /// d = −2⟨z⟩ (occupancy two).
    pub fn dipole(&self, coeffs: &[C64]) -> f64 {
        expectation(&self.z, coeffs) * -2.0
    }

    /// d̈ = 2(⟨∂V/∂z⟩ + E(t)) from Ehrenfest's theorem with the electron
    /// charge −1 and occupancy two.
    pub fn acceleration(&self, coeffs: &[C64], field: f64) -> f64 {
        2.0 * (expectation(&self.force, coeffs) + field)
    }
}

/// Re ⟨c|M|c⟩.
pub fn expectation(op: &BandedBlockOperator, coeffs: &[C64]) -> f64 {
    let mut y = vec![C64::new(0.0, 0.0); coeffs.len()];
    op.apply_add(coeffs, &mut y, C64::new(1.0, 0.0));
    dot(coeffs, &y).re
}
