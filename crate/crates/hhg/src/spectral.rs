//! FFT-based spectral density and short-time Fourier transform of the
//! dipole acceleration.

use std::f64::consts::PI;

use hhg_core::evolution::EvolutionRecord;
use hhg_core::observables::{Spectrogram, Spectrum, Window};
use hhg_core::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Options for [`spectral_density`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Only samples with t ≤ t_end enter the transform.
    pub t_end: Option<f64>,
    pub window: Window,
    /// Zero-padding factor, at least 4.
    pub padding: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            t_end: None,
            window: Window::None,
            padding: 4,
        }
    }
}

fn hann(x: f64) -> f64 {
    // x in [0, 1]
    let s = (PI * x).sin();
    s * s
}

/// |Σ_n a(t_n) e^{iωt_n} Δt|² on ω_k = 2πk/(N Δt), k = 0..=N/2.
fn transform(samples: &[f64], dt: f64, n_fft: usize, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    buf.resize(n_fft, Complex64::new(0.0, 0.0));
    // the inverse transform carries the e^{+iωt} sign convention
    planner.plan_fft_inverse(n_fft).process(&mut buf);
    buf[..=n_fft / 2].iter().map(|c| c.norm_sqr() * dt * dt).collect()
}

fn uniform(record: &EvolutionRecord) -> Result<()> {
    record.check_uniform()?;
    if record.len() < 2 {
        return Err(Error::Analysis("record has fewer than two samples".into()));
    }
    Ok(())
}

/// S(ω) = |∫₀^T d̈(t) e^{iωt} dt|² of the acceleration record.
pub fn spectral_density(record: &EvolutionRecord, omega_laser: f64, opts: &SpectrumOptions) -> Result<Spectrum> {
    uniform(record)?;
    if opts.padding < 4 {
        return Err(Error::Analysis("zero-padding factor must be at least 4".into()));
    }
    let n = match opts.t_end {
        Some(t) => record.times.iter().take_while(|&&ti| ti <= t + 1e-9 * record.dt).count(),
        None => record.len(),
    };
    if n < 2 {
        return Err(Error::Analysis("no samples inside the transform interval".into()));
    }
    let mut samples = record.acceleration[..n].to_vec();
    if opts.window == Window::Hann {
        let span = (n - 1) as f64;
        for (i, a) in samples.iter_mut().enumerate() {
            *a *= hann(i as f64 / span);
        }
    }
    // an even length keeps the last bin at Nyquist
    let n_fft = (n * opts.padding).next_multiple_of(2);
    let dt = record.dt;
    let density = transform(&samples, dt, n_fft, &mut FftPlanner::new());
    let d_omega = 2.0 * PI / (n_fft as f64 * dt);
    let omega = (0..density.len()).map(|k| k as f64 * d_omega).collect();
    Spectrum::new(omega, density, omega_laser, opts.window)
}

/// ∫ S(ω) dω over the full two-sided grid, from the one-sided spectrum.
pub fn integrated_power(spectrum: &Spectrum) -> f64 {
    let s = &spectrum.density;
    let last = s.len() - 1;
    let interior: f64 = s[1..last].iter().sum();
    spectrum.bin_width() * (s[0] + 2.0 * interior + s[last])
}

/// Options for [`stft`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StftOptions {
    /// Hann window length T_W in a.u.
    pub window_length: f64,
    /// Window centres every `stride` samples.
    pub stride: usize,
    pub padding: usize,
}

impl StftOptions {
    /// One optical period per window.
    pub fn for_laser(omega_laser: f64) -> Self {
        Self {
            window_length: 2.0 * PI / omega_laser,
            stride: 4,
            padding: 4,
        }
    }
}

/// F(ω, τ) = |∫ d̈(t) h(t − τ) e^{iωt} dt|² with a centred Hann window of
/// length T_W. Window centres run over the whole record; the window is cut
/// at the record ends.
pub fn stft(record: &EvolutionRecord, opts: &StftOptions) -> Result<Spectrogram> {
    uniform(record)?;
    let dt = record.dt;
    let span = record.times[record.len() - 1] - record.times[0];
    if !(opts.window_length > 0.0) || opts.window_length > span {
        return Err(Error::Analysis(format!(
            "window length {} must be positive and at most the record length {span}",
            opts.window_length
        )));
    }
    if opts.stride == 0 || opts.padding == 0 {
        return Err(Error::Analysis("stride and padding must be positive".into()));
    }
    let half = (0.5 * opts.window_length / dt).round() as usize;
    let width = 2 * half + 1;
    let n_fft = width * opts.padding;
    let taper: Vec<f64> = (0..width).map(|j| hann(j as f64 / (width - 1) as f64)).collect();
    let mut planner = FftPlanner::new();
    let mut tau = Vec::new();
    let mut density = Vec::new();
    let acc = &record.acceleration;
    let mut buf = vec![0.0; width];
    for centre in (0..record.len()).step_by(opts.stride) {
        for (j, b) in buf.iter_mut().enumerate() {
            let idx = centre as isize + j as isize - half as isize;
            *b = if idx >= 0 && (idx as usize) < acc.len() {
                acc[idx as usize] * taper[j]
            } else {
                0.0
            };
        }
        density.extend(transform(&buf, dt, n_fft, &mut planner));
        tau.push(record.times[centre]);
    }
    let d_omega = 2.0 * PI / (n_fft as f64 * dt);
    let omega = (0..=n_fft / 2).map(|k| k as f64 * d_omega).collect();
    Ok(Spectrogram {
        tau,
        omega,
        density,
        window_length: opts.window_length,
    })
}
