//! Spectra, spectrograms and the diagnostics read off them.
//!
//! The transforms themselves live in the std crate; this module holds the
//! containers and the deterministic feature rules that operate on them.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::evolution::EvolutionRecord;

/// Half-width, in harmonic orders, of the window searched for a harmonic peak.
pub const PEAK_HALF_WIDTH: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    None,
    Hann,
}

/// S(ω) on a uniform frequency grid starting at ω = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub density: Vec<f64>,
    pub omega_laser: f64,
    pub window: Window,
}

impl Spectrum {
    pub fn new(omega: Vec<f64>, density: Vec<f64>, omega_laser: f64, window: Window) -> Result<Self> {
        if omega.len() != density.len() || omega.len() < 2 {
            return Err(Error::Analysis(format!(
                "grid has {} frequencies and {} values",
                omega.len(),
                density.len()
            )));
        }
        if !(omega_laser > 0.0) {
            return Err(Error::Analysis("laser frequency must be positive".into()));
        }
        if density.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::Analysis("spectral density must be non-negative".into()));
        }
        Ok(Self {
            omega,
            density,
            omega_laser,
            window,
        })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn bin_width(&self) -> f64 {
        self.omega[1] - self.omega[0]
    }

    /// ω/ω_L for every bin.
    pub fn orders(&self) -> Vec<f64> {
        self.omega.iter().map(|w| w / self.omega_laser).collect()
    }

    /// Highest order fully covered by the grid.
    pub fn max_order(&self) -> f64 {
        self.omega[self.omega.len() - 1] / self.omega_laser
    }

    /// Index and value of the maximum of S over orders in [lo, hi].
    pub fn max_in(&self, lo: f64, hi: f64) -> Option<(usize, f64)> {
        let (a, b) = self.index_range(lo, hi)?;
        (a..=b)
            .map(|i| (i, self.density[i]))
            .fold(None, |best: Option<(usize, f64)>, (i, s)| match best {
                Some((_, bs)) if bs >= s => best,
                _ => Some((i, s)),
            })
    }

    /// Index and value of the minimum of S over orders in [lo, hi].
    pub fn min_in(&self, lo: f64, hi: f64) -> Option<(usize, f64)> {
        let (a, b) = self.index_range(lo, hi)?;
        (a..=b)
            .map(|i| (i, self.density[i]))
            .fold(None, |best: Option<(usize, f64)>, (i, s)| match best {
                Some((_, bs)) if bs <= s => best,
                _ => Some((i, s)),
            })
    }

    fn index_range(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let dw = self.bin_width();
        let w0 = self.omega[0];
        let a = ((lo * self.omega_laser - w0) / dw).ceil().max(0.0) as usize;
        let b = ((hi * self.omega_laser - w0) / dw).floor();
        if b < 0.0 {
            return None;
        }
        let b = (b as usize).min(self.omega.len() - 1);
        (a <= b).then_some((a, b))
    }

    /// Largest local maximum of S strictly inside ±0.3 ω_L of `order`.
    pub fn local_peak(&self, order: usize) -> Option<f64> {
        let n = order as f64;
        let (a, b) = self.index_range(n - PEAK_HALF_WIDTH, n + PEAK_HALF_WIDTH)?;
        let s = &self.density;
        (a.max(1)..=b.min(s.len() - 2))
            .filter(|&i| s[i] > s[i - 1] && s[i] >= s[i + 1])
            .map(|i| s[i])
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    }

    /// Height of harmonic `order`: the largest local maximum within
    /// ±0.3 ω_L, or the window maximum when S is monotone there.
    pub fn harmonic_peak(&self, order: usize) -> Option<f64> {
        let n = order as f64;
        if n + PEAK_HALF_WIDTH > self.max_order() {
            return None;
        }
        self.local_peak(order)
            .or_else(|| self.max_in(n - PEAK_HALF_WIDTH, n + PEAK_HALF_WIDTH).map(|(_, s)| s))
    }

    /// Peak heights of orders 1..=max_order, index i holding order i + 1.
    pub fn harmonic_peaks(&self, max_order: usize) -> Vec<f64> {
        (1..=max_order).map(|n| self.harmonic_peak(n).unwrap_or(0.0)).collect()
    }
}

/// Smallest suppression, in dB, of an even harmonic 2..=max_order below
/// the mean of its two odd neighbours. An even order without a local
/// maximum in its window is measured at the window minimum.
pub fn even_harmonic_suppression(spectrum: &Spectrum, max_order: usize) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for n in (2..=max_order).step_by(2) {
        let nf = n as f64;
        let (Some(lo), Some(hi)) = (spectrum.harmonic_peak(n - 1), spectrum.harmonic_peak(n + 1)) else {
            return Err(Error::Analysis(format!("spectrum does not reach harmonic {}", n + 1)));
        };
        let even = spectrum
            .local_peak(n)
            .or_else(|| spectrum.min_in(nf - PEAK_HALF_WIDTH, nf + PEAK_HALF_WIDTH).map(|(_, s)| s))
            .unwrap_or(0.0);
        let db = 10.0 * (0.5 * (lo + hi) / even.max(f64::MIN_POSITIVE)).log10();
        worst = worst.min(db);
    }
    Ok(worst)
}

/// Harmonic-order positions of the features of an HHG spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFeatures {
    /// Order of the maximum of S near ω_L.
    pub fundamental_peak: f64,
    /// Odd order at the first minimum of the odd-peak envelope.
    pub dip: usize,
    /// Highest odd peak above the dip.
    pub secondary_maximum: usize,
    /// First odd order whose peak is 20 dB below the secondary maximum.
    pub drop_off: usize,
    /// Odd-peak envelope as (order, height).
    pub odd_peaks: Vec<(usize, f64)>,
}

/// Applies the dip / secondary-maximum / drop-off rules to the odd-peak
/// envelope of orders up to `max_order`.
pub fn locate_features(spectrum: &Spectrum, max_order: usize) -> Result<SpectralFeatures> {
    let (i_fund, _) = spectrum
        .max_in(1.0 - PEAK_HALF_WIDTH, 1.0 + PEAK_HALF_WIDTH)
        .ok_or_else(|| Error::Analysis("spectrum does not cover the fundamental".into()))?;
    let fundamental_peak = spectrum.omega[i_fund] / spectrum.omega_laser;
    let odd_peaks: Vec<(usize, f64)> = (1..=max_order)
        .step_by(2)
        .map_while(|n| spectrum.harmonic_peak(n).map(|s| (n, s)))
        .collect();
    if odd_peaks.len() < 4 {
        return Err(Error::Analysis("no identifiable odd-harmonic comb".into()));
    }
    // first local minimum from the 3rd harmonic on
    let dip_idx = (1..odd_peaks.len() - 1)
        .find(|&i| odd_peaks[i].1 < odd_peaks[i - 1].1 && odd_peaks[i].1 < odd_peaks[i + 1].1)
        .ok_or_else(|| Error::Analysis("odd-peak envelope has no dip".into()))?;
    let mut best = dip_idx + 1;
    let mut drop_idx = None;
    for i in dip_idx + 1..odd_peaks.len() {
        if odd_peaks[i].1 > odd_peaks[best].1 {
            best = i;
        } else if odd_peaks[i].1 <= 0.01 * odd_peaks[best].1 {
            drop_idx = Some(i);
            break;
        }
    }
    let drop_idx = drop_idx.ok_or_else(|| Error::Analysis("odd-peak envelope never falls 20 dB".into()))?;
    Ok(SpectralFeatures {
        fundamental_peak,
        dip: odd_peaks[dip_idx].0,
        secondary_maximum: odd_peaks[best].0,
        drop_off: odd_peaks[drop_idx].0,
        odd_peaks,
    })
}

/// Mean peak-to-valley modulation, in dB, over the odd harmonics in
/// [lo, hi]. Each valley is the minimum of S between an odd peak window and
/// the next one.
pub fn modulation_depth(spectrum: &Spectrum, lo: usize, hi: usize) -> Result<f64> {
    let first = if lo % 2 == 1 { lo } else { lo + 1 };
    let mut total = 0.0;
    let mut count = 0usize;
    for n in (first..=hi).step_by(2) {
        let nf = n as f64;
        let peak = spectrum.harmonic_peak(n);
        let valley = if nf + 2.0 - PEAK_HALF_WIDTH <= spectrum.max_order() {
            spectrum.min_in(nf + PEAK_HALF_WIDTH, nf + 2.0 - PEAK_HALF_WIDTH).map(|(_, s)| s)
        } else {
            None
        };
        let (Some(p), Some(v)) = (peak, valley) else {
            return Err(Error::Analysis(format!("spectrum does not reach order {}", n + 2)));
        };
        total += 10.0 * (p / v.max(f64::MIN_POSITIVE)).log10();
        count += 1;
    }
    if count == 0 {
        return Err(Error::Analysis("empty modulation band".into()));
    }
    Ok(total / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CepContrast {
    pub depth_a: f64,
    pub depth_b: f64,
    /// depth_a − depth_b in dB.
    pub difference: f64,
}

/// Modulation depth of two spectra on identical grids over the same band.
pub fn cep_contrast(a: &Spectrum, b: &Spectrum, lo: usize, hi: usize) -> Result<CepContrast> {
    if a.omega != b.omega || a.omega_laser != b.omega_laser {
        return Err(Error::Analysis("spectra are on different grids".into()));
    }
    let depth_a = modulation_depth(a, lo, hi)?;
    let depth_b = modulation_depth(b, lo, hi)?;
    Ok(CepContrast {
        depth_a,
        depth_b,
        difference: depth_a - depth_b,
    })
}

/// |F(ω, τ)|² on a (τ, ω) grid, row-major in τ.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub tau: Vec<f64>,
    pub omega: Vec<f64>,
    pub density: Vec<f64>,
    pub window_length: f64,
}

impl Spectrogram {
    #[inline]
    pub fn at(&self, i_tau: usize, i_omega: usize) -> f64 {
        self.density[i_tau * self.omega.len() + i_omega]
    }

    /// Σ_ω F(ω, τ) over ω ≥ omega_min for every τ.
    pub fn band_power(&self, omega_min: f64) -> Vec<f64> {
        let start = self.omega.iter().position(|&w| w >= omega_min).unwrap_or(self.omega.len());
        (0..self.tau.len())
            .map(|i| (start..self.omega.len()).map(|j| self.at(i, j)).sum())
            .collect()
    }

    /// τ of the largest band power above `omega_min`.
    pub fn burst_time(&self, omega_min: f64) -> Option<f64> {
        let p = self.band_power(omega_min);
        let (i, _) = p
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })?;
        Some(self.tau[i])
    }

    /// Frequency carrying the most power, summed over τ in [tau_lo, tau_hi]
    /// and restricted to ω ≥ omega_min.
    pub fn dominant_frequency(&self, tau_lo: f64, tau_hi: f64, omega_min: f64) -> Option<f64> {
        let rows: Vec<usize> = (0..self.tau.len()).filter(|&i| self.tau[i] >= tau_lo && self.tau[i] <= tau_hi).collect();
        if rows.is_empty() {
            return None;
        }
        (0..self.omega.len())
            .filter(|&j| self.omega[j] >= omega_min)
            .map(|j| (j, rows.iter().map(|&i| self.at(i, j)).sum::<f64>()))
            .fold(None, |best: Option<(usize, f64)>, (j, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((j, v)),
            })
            .map(|(j, _)| self.omega[j])
    }
}

/// Times where d(t) has a local extremum, refined by a parabola through the
/// three samples around each sign change of the first difference.
pub fn turning_points(record: &EvolutionRecord) -> Vec<f64> {
    let d = &record.dipole;
    let mut out = Vec::new();
    for i in 1..d.len().saturating_sub(1) {
        let left = d[i] - d[i - 1];
        let right = d[i + 1] - d[i];
        if left * right < 0.0 || (left != 0.0 && right == 0.0) {
            let curv = d[i + 1] - 2.0 * d[i] + d[i - 1];
            let shift = if curv != 0.0 { 0.5 * (d[i - 1] - d[i + 1]) / curv } else { 0.0 };
            out.push(record.times[i] + shift.clamp(-1.0, 1.0) * record.dt);
        }
    }
    out
}

/// Distance from `t` to the closest turning point of d(t).
pub fn nearest_turning_point(record: &EvolutionRecord, t: f64) -> Option<(f64, f64)> {
    turning_points(record)
        .into_iter()
        .map(|tp| (tp, (tp - t).abs()))
        .fold(None, |best: Option<(f64, f64)>, c| match best {
            Some(b) if b.1 <= c.1 => best,
            _ => Some(c),
        })
}
