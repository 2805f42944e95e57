//! Linearly polarized few-cycle laser pulse with a sin² envelope.
//!
//! Every other module works in atomic units; the conversions from
//! laboratory quantities (nm, W/cm², fs) are all collected in [`units`].

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};

/// Conversion constants between laboratory and atomic units.
pub mod units {
    /// Speed of light in atomic units.
    pub const SPEED_OF_LIGHT: f64 = 137.035_999_084;
    /// Bohr radius in nm.
    pub const BOHR_NM: f64 = 0.052_917_721_090_3;
    /// Atomic unit of intensity in W/cm² (cycle-averaged, E0 = 1 a.u.).
    pub const INTENSITY_WCM2: f64 = 3.509_45e16;
    /// Atomic unit of time in attoseconds.
    pub const TIME_AS: f64 = 24.188_843_265_857;
    /// Atomic unit of time in femtoseconds.
    pub const TIME_FS: f64 = TIME_AS * 1e-3;

    /// Angular frequency (a.u.) of light with the given vacuum wavelength.
    pub fn omega_from_wavelength_nm(wavelength_nm: f64) -> f64 {
        2.0 * core::f64::consts::PI * SPEED_OF_LIGHT * BOHR_NM / wavelength_nm
    }

    /// Peak field amplitude (a.u.) for a cycle-averaged intensity in W/cm².
    pub fn field_from_intensity(intensity_wcm2: f64) -> f64 {
        num_traits::Float::sqrt(intensity_wcm2 / INTENSITY_WCM2)
    }

    pub fn au_to_fs(t: f64) -> f64 {
        t * TIME_FS
    }

    pub fn fs_to_au(t_fs: f64) -> f64 {
        t_fs / TIME_FS
    }
}

/// Laser parameters with all derived quantities in atomic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    pub wavelength_nm: f64,
    pub intensity: f64,
    pub n_cycles: f64,
    pub cep: f64,
    pub omega: f64,
    pub e0: f64,
    pub a0: f64,
    pub duration: f64,
}

impl PulseParams {
    /// Builds a pulse from laboratory parameters.
    ///
    /// An intensity of exactly zero is accepted here and gives a field-free
    /// pulse of the same duration, which is handy as a reference run. Use
    /// [`make_pulse`] for the strictly validated constructor.
    pub fn new(wavelength_nm: f64, intensity_wcm2: f64, n_cycles: f64, cep: f64) -> Result<Self> {
        if !(wavelength_nm > 0.0) || !wavelength_nm.is_finite() {
            return Err(invalid("pulse.wavelength_nm", "must be positive"));
        }
        if !(intensity_wcm2 >= 0.0) || !intensity_wcm2.is_finite() {
            return Err(invalid("pulse.intensity", "must be non-negative"));
        }
        if !(n_cycles >= 1.0) || !n_cycles.is_finite() {
            return Err(invalid("pulse.n_cycles", "must be at least 1"));
        }
        if !cep.is_finite() {
            return Err(invalid("pulse.cep", "must be finite"));
        }
        let omega = units::omega_from_wavelength_nm(wavelength_nm);
        let e0 = units::field_from_intensity(intensity_wcm2);
        Ok(Self {
            wavelength_nm,
            intensity: intensity_wcm2,
            n_cycles,
            cep,
            omega,
            e0,
            a0: e0 / omega,
            duration: n_cycles * 2.0 * PI / omega,
        })
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// sin²(πt/T) inside the pulse, zero outside.
    pub fn envelope(&self, t: f64) -> f64 {
        if !(0.0..=self.duration).contains(&t) {
            return 0.0;
        }
        let s = (PI * t / self.duration).sin();
        s * s
    }

    fn envelope_derivative(&self, t: f64) -> f64 {
        if !(0.0..=self.duration).contains(&t) {
            return 0.0;
        }
        // d/dt sin²(πt/T) = (π/T) sin(2πt/T)
        PI / self.duration * (2.0 * PI * t / self.duration).sin()
    }

    pub fn vector_potential(&self, t: f64) -> f64 {
        self.a0 * self.envelope(t) * (self.omega * t + self.cep).cos()
    }

    /// E(t) = −dA/dt, evaluated analytically including the envelope term.
    pub fn electric_field(&self, t: f64) -> f64 {
        let phase = self.omega * t + self.cep;
        self.e0 * self.envelope(t) * phase.sin()
            - self.e0 / self.omega * self.envelope_derivative(t) * phase.cos()
    }

    pub fn ponderomotive_energy(&self) -> f64 {
        self.e0 * self.e0 / (4.0 * self.omega * self.omega)
    }

    /// Classical recollision cutoff I_P + 3.2 U_P, as (frequency, harmonic order).
    pub fn classical_cutoff(&self, ip: f64) -> Result<(f64, f64)> {
        if !(ip > 0.0) {
            return Err(invalid("ip", "ionization potential must be positive"));
        }
        let wc = ip + 3.2 * self.ponderomotive_energy();
        Ok((wc, wc / self.omega))
    }

    pub fn duration_fs(&self) -> f64 {
        units::au_to_fs(self.duration)
    }
}

/// Validated constructor: every input must be strictly positive.
pub fn make_pulse(wavelength_nm: f64, intensity_wcm2: f64, n_cycles: f64, cep: f64) -> Result<PulseParams> {
    if !(intensity_wcm2 > 0.0) {
        return Err(invalid("pulse.intensity", "must be positive"));
    }
    PulseParams::new(wavelength_nm, intensity_wcm2, n_cycles, cep)
}
