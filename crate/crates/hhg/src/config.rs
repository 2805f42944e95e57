//! Run configuration: TOML parsing with defaults, validation with key paths,
//! dotted-key overrides and the content hash that names output directories.

use std::path::PathBuf;

use hhg_core::basis::{Gauge, KnotDistribution};
use hhg_core::observables::Window;
use hhg_core::propagator::PropagatorConfig;
use hhg_core::pulse::PulseParams;
use hhg_core::tddft::{ImaginaryTimeConfig, Occupation};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable overriding `output.root`.
pub const OUTPUT_ROOT_ENV: &str = "HHG_OUTPUT_ROOT";

#[derive(Debug, thiserror::Error)]
#[error("{key}: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Sae,
    Tddft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeKind {
    Length,
    Velocity,
}

impl From<GaugeKind> for Gauge {
    fn from(g: GaugeKind) -> Self {
        match g {
            GaugeKind::Length => Gauge::Length,
            GaugeKind::Velocity => Gauge::Velocity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnotKind {
    Sinh,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    None,
    Hann,
}

impl From<WindowKind> for Window {
    fn from(w: WindowKind) -> Self {
        match w {
            WindowKind::None => Window::None,
            WindowKind::Hann => Window::Hann,
        }
    }
}

/// Spin treatment of the one-electron He⁺ reference in the TDDFT model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IonSpin {
    /// Half an electron in each spin channel.
    Unpolarized,
    /// One electron in a single spin channel.
    Polarized,
}

impl IonSpin {
    pub fn occupation(self) -> Occupation {
        match self {
            IonSpin::Unpolarized => Occupation::UNPOLARIZED_ONE,
            IonSpin::Polarized => Occupation::POLARIZED_ONE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    pub wavelength_nm: f64,
    /// Peak intensity in W/cm².
    pub intensity: f64,
    pub n_cycles: f64,
    /// Carrier-envelope phase in radians.
    pub cep: f64,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            wavelength_nm: 390.0,
            intensity: 1e14,
            n_cycles: 5.0,
            cep: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisSection {
    pub r_max: f64,
    pub n_splines: usize,
    pub order: usize,
    pub l_max: usize,
    pub knots: KnotKind,
    /// Sinh knots: `inner_fraction` of the breakpoints lie inside this radius.
    pub inner_radius: f64,
    pub inner_fraction: f64,
}

impl Default for BasisSection {
    fn default() -> Self {
        Self {
            r_max: 200.0,
            n_splines: 1050,
            order: 9,
            l_max: 20,
            knots: KnotKind::Sinh,
            inner_radius: 10.0,
            inner_fraction: 1.0 / 3.0,
        }
    }
}

impl BasisSection {
    pub fn distribution(&self) -> KnotDistribution {
        match self.knots {
            KnotKind::Linear => KnotDistribution::Linear,
            KnotKind::Sinh => KnotDistribution::Sinh {
                inner_radius: self.inner_radius,
                inner_fraction: self.inner_fraction,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorSection {
    pub dt: f64,
    pub krylov_dim: usize,
    pub residual_tol: f64,
    pub absorber_start: f64,
    pub absorber_exponent: f64,
    pub max_halvings: u32,
    /// Propagate only in field-free eigenvectors below `energy_cutoff`.
    pub spectral_filter: bool,
    pub energy_cutoff: f64,
    /// Steps between checkpoints; 0 disables periodic checkpoints.
    pub checkpoint_every: usize,
}

impl Default for PropagatorSection {
    fn default() -> Self {
        let p = PropagatorConfig::default();
        Self {
            dt: p.dt,
            krylov_dim: p.krylov_dim,
            residual_tol: p.residual_tol,
            absorber_start: 160.0,
            absorber_exponent: p.absorber_exponent,
            max_halvings: p.max_halvings,
            spectral_filter: true,
            energy_cutoff: p.energy_cutoff.unwrap_or(50.0),
            checkpoint_every: 2000,
        }
    }
}

impl PropagatorSection {
    pub fn to_core(&self) -> PropagatorConfig {
        PropagatorConfig {
            dt: self.dt,
            krylov_dim: self.krylov_dim,
            residual_tol: self.residual_tol,
            absorber_start: self.absorber_start,
            absorber_exponent: self.absorber_exponent,
            max_halvings: self.max_halvings,
            energy_cutoff: self.spectral_filter.then_some(self.energy_cutoff),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TddftSection {
    pub ion_spin: IonSpin,
    pub dtau: f64,
    pub krylov_dim: usize,
    pub energy_tol: f64,
    pub max_steps: usize,
    /// Also compute the finite-field static polarizability.
    pub polarizability: bool,
    pub field_step: f64,
    pub polarizability_l_max: usize,
}

impl Default for TddftSection {
    fn default() -> Self {
        let it = ImaginaryTimeConfig::default();
        Self {
            ion_spin: IonSpin::Unpolarized,
            dtau: it.dtau,
            krylov_dim: it.krylov_dim,
            energy_tol: 1e-12,
            max_steps: it.max_steps,
            polarizability: false,
            field_step: 0.005,
            polarizability_l_max: 4,
        }
    }
}

impl TddftSection {
    pub fn imaginary_time(&self) -> ImaginaryTimeConfig {
        ImaginaryTimeConfig {
            dtau: self.dtau,
            krylov_dim: self.krylov_dim,
            energy_tol: self.energy_tol,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservablesSection {
    pub spectrum_window: WindowKind,
    pub padding: usize,
    /// Highest harmonic order written and searched for features.
    pub max_order: usize,
    pub spectrogram: bool,
    /// STFT window length in optical periods.
    pub stft_window_cycles: f64,
    /// Spacing of STFT window centres in a.u.
    pub stft_tau_step: f64,
    /// Lower edge, in harmonic orders, of the band whose power locates the
    /// dominant burst.
    pub burst_min_order: f64,
}

impl Default for ObservablesSection {
    fn default() -> Self {
        Self {
            spectrum_window: WindowKind::None,
            padding: 4,
            max_order: 41,
            spectrogram: true,
            stft_window_cycles: 1.0,
            stft_tau_step: 0.5,
            burst_min_order: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub root: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            root: PathBuf::from("runs"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelKind,
    pub gauge: GaugeKind,
    /// Field-free optical cycles propagated after the pulse.
    pub tail_cycles: f64,
    pub pulse: PulseSection,
    pub basis: BasisSection,
    pub propagator: PropagatorSection,
    pub tddft: TddftSection,
    pub observables: ObservablesSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Sae,
            gauge: GaugeKind::Length,
            tail_cycles: 2.0,
            pulse: PulseSection::default(),
            basis: BasisSection::default(),
            propagator: PropagatorSection::default(),
            tddft: TddftSection::default(),
            observables: ObservablesSection::default(),
            output: OutputSection::default(),
        }
    }
}

fn check(ok: bool, key: &str, message: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::new(key, message))
    }
}

impl RunConfig {
    /// Parses a TOML document; missing keys take their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::new(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let key = if path == "." { String::from("<document>") } else { path };
            ConfigError::new(key, e.into_inner().message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses `text` and then applies `key=value` overrides, where the value
    /// is a TOML literal or a bare string.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::new("<document>", e.message().trim().to_string()))?;
        for o in overrides {
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| ConfigError::new(o.clone(), "override must look like key=value"))?;
            let key = key.trim();
            let value = parse_literal(raw.trim());
            set_path(&mut doc, key, value)?;
        }
        let text = toml::to_string(&doc).map_err(|e| ConfigError::new("<document>", e.to_string()))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 over the canonical serialization of everything except the
    /// output location.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSection::default();
        let digest = Sha256::digest(c.to_toml().as_bytes());
        format!("{digest:x}")
    }

    /// First 16 hex digits of [`RunConfig::hash`].
    pub fn short_hash(&self) -> String {
        self.hash()[..16].to_string()
    }

    /// Output root: the environment variable if set, else `output.root`.
    pub fn output_root(&self) -> PathBuf {
        std::env::var_os(OUTPUT_ROOT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| self.output.root.clone())
    }

    pub fn pulse_params(&self) -> Result<PulseParams, ConfigError> {
        let p = &self.pulse;
        PulseParams::new(p.wavelength_nm, p.intensity, p.n_cycles, p.cep)
            .map_err(|e| ConfigError::new("pulse", e.to_string()))
    }

    /// Total propagation time: the pulse plus the field-free tail.
    pub fn t_end(&self) -> Result<f64, ConfigError> {
        let p = self.pulse_params()?;
        Ok(p.duration + self.tail_cycles * p.period())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.pulse;
        check(p.wavelength_nm.is_finite() && p.wavelength_nm > 0.0, "pulse.wavelength_nm", "must be positive")?;
        check(p.intensity.is_finite() && p.intensity > 0.0, "pulse.intensity", "must be positive")?;
        check(p.n_cycles.is_finite() && p.n_cycles >= 1.0, "pulse.n_cycles", "must be at least 1")?;
        check(p.cep.is_finite(), "pulse.cep", "must be finite")?;
        check(self.tail_cycles.is_finite() && self.tail_cycles >= 0.0, "tail_cycles", "must be non-negative")?;

        let b = &self.basis;
        check(b.r_max.is_finite() && b.r_max > 0.0, "basis.r_max", "must be positive")?;
        check(b.order >= 2, "basis.order", "must be at least 2")?;
        check(b.n_splines >= b.order + 2, "basis.n_splines", "must be at least order + 2")?;
        check(b.l_max >= 1, "basis.l_max", "must be at least 1")?;
        if b.knots == KnotKind::Sinh {
            check(
                b.inner_radius > 0.0 && b.inner_radius < b.r_max,
                "basis.inner_radius",
                "must lie inside (0, r_max)",
            )?;
            check(
                b.inner_fraction > 0.0 && b.inner_fraction < 1.0,
                "basis.inner_fraction",
                "must lie inside (0, 1)",
            )?;
        }

        let pr = &self.propagator;
        check(pr.dt.is_finite() && pr.dt > 0.0, "propagator.dt", "must be positive")?;
        check(pr.krylov_dim >= 4, "propagator.krylov_dim", "must be at least 4")?;
        check(pr.residual_tol > 0.0, "propagator.residual_tol", "must be positive")?;
        check(
            pr.absorber_start > 0.0 && pr.absorber_start < b.r_max,
            "propagator.absorber_start",
            "must lie inside (0, basis.r_max)",
        )?;
        check(pr.absorber_exponent > 0.0, "propagator.absorber_exponent", "must be positive")?;
        check(pr.energy_cutoff > 0.0, "propagator.energy_cutoff", "must be positive")?;

        let t = &self.tddft;
        check(t.dtau > 0.0, "tddft.dtau", "must be positive")?;
        check(t.krylov_dim >= 4, "tddft.krylov_dim", "must be at least 4")?;
        check(t.energy_tol > 0.0, "tddft.energy_tol", "must be positive")?;
        check(t.max_steps > 0, "tddft.max_steps", "must be positive")?;
        check(t.field_step > 0.0, "tddft.field_step", "must be positive")?;
        check(t.polarizability_l_max >= 1, "tddft.polarizability_l_max", "must be at least 1")?;

        let o = &self.observables;
        check(o.padding >= 4, "observables.padding", "must be at least 4")?;
        check(o.max_order >= 3, "observables.max_order", "must be at least 3")?;
        check(o.stft_window_cycles > 0.0, "observables.stft_window_cycles", "must be positive")?;
        check(o.stft_tau_step > 0.0, "observables.stft_tau_step", "must be positive")?;
        check(o.burst_min_order >= 0.0, "observables.burst_min_order", "must be non-negative")?;
        Ok(())
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("value present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_path(doc: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), ConfigError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| ConfigError::new(key, "empty key"))?;
    let mut table = doc;
    for p in parts {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::new(key, format!("`{p}` is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}
