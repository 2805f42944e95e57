//! Single runs: ground state, propagation with checkpoints, observables,
//! data files and the manifest, all inside one directory per config hash.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hhg_core::basis::build_basis;
use hhg_core::eigen::BoundStates;
use hhg_core::evolution::{propagate, step_count, Dynamics, EvolutionRecord};
use hhg_core::observables::{
    even_harmonic_suppression, locate_features, nearest_turning_point, Spectrogram, Spectrum,
};
use hhg_core::propagator::WaveState;
use hhg_core::pulse::units;
use hhg_core::sae::{ModelPotential, SaeModel};
use hhg_core::tddft::{ks_ground_state, static_polarizability, KsModel, KsPropagation, KsSettings};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, GaugeKind, ModelKind, RunConfig};
use crate::files::{self, Checkpoint};
use crate::spectral::{spectral_density, stft, SpectrumOptions, StftOptions};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Physics(#[from] hhg_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("run stopped after {steps} steps; checkpoint written")]
    Interrupted { steps: u64 },
}

impl RunError {
    /// Process exit code: 2 validation, 3 physics or convergence, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Physics(hhg_core::Error::InvalidParameter { .. } | hhg_core::Error::GaugeMismatch { .. }) => 2,
            RunError::Physics(_) | RunError::Interrupted { .. } => 3,
            RunError::Io { .. } => 4,
        }
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizabilityReport {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
    pub l_max: usize,
    pub field_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateReport {
    /// SAE orbital energy or TDDFT total energy.
    pub energy: f64,
    /// TDDFT one-electron ion total energy.
    pub ion_energy: Option<f64>,
    pub ionization_potential: f64,
    pub orbital_energy: f64,
    /// Lowest l = 1 minus lowest l = 0 field-free level.
    pub excitation_2p_1s: Option<f64>,
    pub imaginary_time_steps: Option<usize>,
    pub polarizability: Option<PolarizabilityReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonizationReport {
    /// Probability removed by the absorbing mask.
    pub absorbed: f64,
    pub final_norm: f64,
    /// Population of all negative-energy field-free states.
    pub bound_population: f64,
    pub bound_population_lowest10: f64,
    /// 1 − bound population.
    pub ionization: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureReport {
    pub fundamental_peak: f64,
    pub dip: usize,
    pub secondary_maximum: usize,
    pub drop_off: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstReport {
    /// Centre of the STFT window with the most power above the burst band edge.
    pub centre: f64,
    /// Start of that window, the τ of a window h(t − τ) supported on [τ, τ + T_W].
    pub window_start: f64,
    pub window_start_fs: f64,
    pub nearest_turning_point: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableReport {
    pub features: Option<FeatureReport>,
    pub feature_error: Option<String>,
    /// Odd-harmonic peaks in dB relative to the fundamental.
    pub odd_peaks_db: Vec<(usize, f64)>,
    /// Weakest even-harmonic suppression below the classical cutoff, in dB.
    pub even_suppression_db: Option<f64>,
    pub classical_cutoff_order: Option<f64>,
    /// RMS of (Ehrenfest − finite-difference) over RMS of the Ehrenfest d̈.
    pub ehrenfest_fd_rel_rms: Option<f64>,
    pub burst: Option<BurstReport>,
    /// Dominant STFT frequency after the pulse, in harmonic orders.
    pub post_pulse_frequency_order: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Complete,
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub status: RunStatus,
    pub model: ModelKind,
    pub gauge: GaugeKind,
    pub steps_completed: u64,
    pub steps_total: u64,
    pub ground_state: Option<GroundStateReport>,
    pub ionization: Option<IonizationReport>,
    pub observables: Option<ObservableReport>,
    pub wall_time_s: f64,
    pub applies: u64,
    pub subdivided_steps: u64,
    pub notes: Vec<String>,
    pub files: Vec<String>,
}

impl RunManifest {
    fn new(cfg: &RunConfig, steps_total: u64) -> Self {
        Self {
            config_hash: cfg.hash(),
            code_version: CODE_VERSION.to_string(),
            status: RunStatus::Incomplete,
            model: cfg.model,
            gauge: cfg.gauge,
            steps_completed: 0,
            steps_total,
            ground_state: None,
            ionization: None,
            observables: None,
            wall_time_s: 0.0,
            applies: 0,
            subdivided_steps: 0,
            notes: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Complete
    }
}

pub fn read_manifest(dir: &Path) -> Result<Option<RunManifest>, RunError> {
    let path = dir.join(files::MANIFEST_FILE);
    match fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| io_err(&path)(io::Error::new(io::ErrorKind::InvalidData, e))),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(io_err(&path)(e)),
    }
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), RunError> {
    let path = dir.join(files::MANIFEST_FILE);
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    files::write_atomic(&path, text.as_bytes()).map_err(io_err(&path))
}

/// Loads the configuration snapshot stored in a run directory.
pub fn read_run_config(dir: &Path) -> Result<RunConfig, RunError> {
    let path = dir.join(files::CONFIG_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    Ok(RunConfig::parse(&text)?)
}

/// The output directory of a configuration.
pub fn run_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_root().join(cfg.short_hash())
}

/// A model ready to propagate from its ground state.
pub struct Prepared {
    pub dynamics: Box<dyn Dynamics + Send>,
    pub ground: Vec<C64>,
    pub bound: BoundStates,
    pub report: GroundStateReport,
}

fn excitation(bound: &BoundStates) -> Option<f64> {
    let lowest = |l: usize| bound.states.iter().find(|s| s.l == l).map(|s| s.energy);
    Some(lowest(1)? - lowest(0)?)
}

/// Builds the model and solves for its field-free ground state. With
/// `polarizability` the TDDFT model also runs the finite-field estimate.
pub fn prepare(cfg: &RunConfig, polarizability: bool) -> Result<Prepared, RunError> {
    cfg.validate()?;
    let b = &cfg.basis;
    let basis = build_basis(b.r_max, b.n_splines, b.order, b.l_max, b.distribution())?;
    let gauge = cfg.gauge.into();
    match cfg.model {
        ModelKind::Sae => {
            let model = SaeModel::new(basis, ModelPotential::default(), gauge)?;
            let g = model.ground_state()?;
            let bound = model.bound_states()?;
            let report = GroundStateReport {
                energy: g.energy,
                ion_energy: None,
                ionization_potential: -g.energy,
                orbital_energy: g.energy,
                excitation_2p_1s: excitation(&bound),
                imaginary_time_steps: None,
                polarizability: None,
            };
            Ok(Prepared {
                dynamics: Box::new(model),
                ground: g.coeffs,
                bound,
                report,
            })
        }
        ModelKind::Tddft => {
            let it = cfg.tddft.imaginary_time();
            let ion_basis = build_basis(b.r_max, b.n_splines, b.order, 1, b.distribution())?;
            let ion_settings = KsSettings {
                occupation: cfg.tddft.ion_spin.occupation(),
                ..KsSettings::default()
            };
            let ion = ks_ground_state(&KsModel::new(ion_basis, ion_settings, gauge)?, &it, 0.0)?;

            let model = KsModel::new(basis, KsSettings::default(), gauge)?;
            let g = ks_ground_state(&model, &it, 0.0)?;
            let polarizability = if polarizability {
                let small = model.with_l_max(cfg.tddft.polarizability_l_max)?;
                let p = static_polarizability(&small, cfg.tddft.field_step, &it)?;
                Some(PolarizabilityReport {
                    coarse: p.coarse,
                    fine: p.fine,
                    extrapolated: p.extrapolated,
                    l_max: cfg.tddft.polarizability_l_max,
                    field_step: cfg.tddft.field_step,
                })
            } else {
                None
            };
            let prop = KsPropagation::new(model, &g.coeffs);
            let bound = prop.bound_states()?;
            let report = GroundStateReport {
                energy: g.total_energy,
                ion_energy: Some(ion.total_energy),
                ionization_potential: ion.total_energy - g.total_energy,
                orbital_energy: g.orbital_energy,
                excitation_2p_1s: excitation(&bound),
                imaginary_time_steps: Some(g.trace.len()),
                polarizability,
            };
            Ok(Prepared {
                dynamics: Box::new(prop),
                ground: g.coeffs,
                bound,
                report,
            })
        }
    }
}

/// Ground-state energies without any propagation.
pub fn ground_state(cfg: &RunConfig) -> Result<GroundStateReport, RunError> {
    let polarizability = cfg.model == ModelKind::Tddft && cfg.tddft.polarizability;
    Ok(prepare(cfg, polarizability)?.report)
}

/// Spectrum, optional spectrogram and derived diagnostics of a record.
pub struct Analysis {
    pub spectrum: Spectrum,
    pub spectrogram: Option<Spectrogram>,
    pub report: ObservableReport,
}

fn rel_rms_difference(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n < 3 {
        return None;
    }
    let (mut num, mut den) = (0.0, 0.0);
    for i in 1..n - 1 {
        num += (a[i] - b[i]).powi(2);
        den += a[i] * a[i];
    }
    let r = (num / den).sqrt();
    r.is_finite().then_some(r)
}

/// Observables of a finished record, with `ip` the model's ionization
/// potential for the classical cutoff.
pub fn analyze_record(cfg: &RunConfig, record: &EvolutionRecord, ip: f64) -> Result<Analysis, RunError> {
    let pulse = cfg.pulse_params()?;
    let obs = &cfg.observables;
    let spectrum = spectral_density(
        record,
        pulse.omega,
        &SpectrumOptions {
            t_end: Some(pulse.duration),
            window: obs.spectrum_window.into(),
            padding: obs.padding,
        },
    )?;
    let (located, feature_error) = match locate_features(&spectrum, obs.max_order) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let odd_peaks_db = match spectrum.harmonic_peak(1) {
        Some(fundamental) if fundamental > 0.0 => (1..=obs.max_order)
            .step_by(2)
            .filter_map(|n| spectrum.harmonic_peak(n).map(|s| (n, 10.0 * (s / fundamental).log10())))
            .filter(|(_, db)| db.is_finite())
            .collect(),
        _ => Vec::new(),
    };
    let classical_cutoff_order = pulse.classical_cutoff(ip).ok().map(|(_, n)| n);
    let even_limit = classical_cutoff_order.map_or(obs.max_order, |c| c.floor() as usize).min(obs.max_order.saturating_sub(1));
    let even_suppression_db = even_harmonic_suppression(&spectrum, even_limit).ok();
    let ehrenfest_fd_rel_rms = rel_rms_difference(&record.acceleration, &record.finite_difference_acceleration());

    let mut burst = None;
    let mut post_pulse_frequency_order = None;
    let spectrogram = if obs.spectrogram {
        let window_length = obs.stft_window_cycles * pulse.period();
        let sg = stft(
            record,
            &StftOptions {
                window_length,
                stride: ((obs.stft_tau_step / record.dt).round() as usize).max(1),
                padding: obs.padding,
            },
        )?;
        // only windows that lie wholly inside the record
        let t_last = record.times.last().copied().unwrap_or(0.0);
        let full = |tau: f64| tau >= 0.5 * window_length && tau <= t_last - 0.5 * window_length;
        let power = sg.band_power(obs.burst_min_order * pulse.omega);
        let strongest = (0..sg.tau.len())
            .filter(|&i| full(sg.tau[i]))
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if power[b] >= power[i] => best,
                _ => Some(i),
            });
        if let Some(centre) = strongest.map(|i| sg.tau[i]) {
            let window_start = centre - 0.5 * window_length;
            burst = Some(BurstReport {
                centre,
                window_start,
                window_start_fs: units::au_to_fs(window_start),
                nearest_turning_point: nearest_turning_point(record, window_start).map(|(tp, _)| tp),
            });
        }
        let (lo, hi) = (pulse.duration + 0.5 * window_length, t_last - 0.5 * window_length);
        if hi > lo {
            post_pulse_frequency_order = sg.dominant_frequency(lo, hi, 0.5 * pulse.omega).map(|w| w / pulse.omega);
        }
        Some(sg)
    } else {
        None
    };

    Ok(Analysis {
        report: ObservableReport {
            features: located.map(|f| FeatureReport {
                fundamental_peak: f.fundamental_peak,
                dip: f.dip,
                secondary_maximum: f.secondary_maximum,
                drop_off: f.drop_off,
            }),
            feature_error,
            odd_peaks_db,
            even_suppression_db,
            classical_cutoff_order,
            ehrenfest_fd_rel_rms,
            burst,
            post_pulse_frequency_order,
        },
        spectrum,
        spectrogram,
    })
}

/// Writes the spectrum and spectrogram files of an analysis, returning
/// their names.
pub fn write_analysis(dir: &Path, cfg: &RunConfig, analysis: &Analysis) -> Result<Vec<String>, RunError> {
    let max_order = cfg.observables.max_order as f64 + 1.0;
    let path = dir.join(files::SPECTRUM_FILE);
    files::write_spectrum(&path, &analysis.spectrum, max_order).map_err(io_err(&path))?;
    let mut written = vec![files::SPECTRUM_FILE.to_string()];
    let sg_path = dir.join(files::SPECTROGRAM_FILE);
    match &analysis.spectrogram {
        Some(sg) => {
            files::write_spectrogram(&sg_path, sg, analysis.spectrum.omega_laser, max_order)
                .map_err(io_err(&sg_path))?;
            written.push(files::SPECTROGRAM_FILE.to_string());
        }
        None => {
            let _ = fs::remove_file(&sg_path);
        }
    }
    Ok(written)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Rerun from scratch even if a complete run exists.
    pub force: bool,
    /// Stop with a checkpoint once this many steps are done.
    pub stop_after: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    /// The run was already complete and nothing was recomputed.
    pub skipped: bool,
}

fn write_checkpoint(dir: &Path, hash: &str, state: &WaveState, record: &EvolutionRecord) -> Result<(), RunError> {
    let path = dir.join(files::CHECKPOINT_FILE);
    let ck = Checkpoint {
        state: state.clone(),
        record: record.clone(),
    };
    files::write_atomic(&path, &ck.to_bytes(hash)).map_err(io_err(&path))
}

fn read_checkpoint(dir: &Path, hash: &str) -> Result<Option<Checkpoint>, RunError> {
    let path = dir.join(files::CHECKPOINT_FILE);
    let data = match fs::read(&path) {
        Ok(d) => d,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err(&path)(e)),
    };
    let (ck, tag) = Checkpoint::from_bytes(&data).map_err(io_err(&path))?;
    Ok((tag == hash).then_some(ck))
}

/// Runs one configuration end to end. A complete run with the same hash is
/// returned as is unless `force` is set; a matching checkpoint is resumed.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    let dir = run_dir(cfg);
    let hash = cfg.hash();
    if !opts.force {
        if let Some(m) = read_manifest(&dir)? {
            if m.is_complete() && m.config_hash == hash {
                return Ok(RunOutcome {
                    dir,
                    manifest: m,
                    skipped: true,
                });
            }
        }
    }
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let cfg_path = dir.join(files::CONFIG_FILE);
    files::write_atomic(&cfg_path, cfg.to_toml().as_bytes()).map_err(io_err(&cfg_path))?;
    if opts.force {
        let _ = fs::remove_file(dir.join(files::CHECKPOINT_FILE));
    }

    let started = Instant::now();
    let pulse = cfg.pulse_params()?;
    let pcfg = cfg.propagator.to_core();
    let total = step_count(cfg.t_end()?, pcfg.dt);
    let mut manifest = RunManifest::new(cfg, total);
    let fail = |mut manifest: RunManifest, err: RunError| -> RunError {
        manifest.notes.push(format!("aborted: {err}"));
        manifest.wall_time_s = started.elapsed().as_secs_f64();
        match write_manifest(&dir, &manifest) {
            Ok(()) => err,
            Err(io) => io,
        }
    };

    let mut prepared = match prepare(cfg, cfg.model == ModelKind::Tddft && cfg.tddft.polarizability) {
        Ok(p) => p,
        Err(e) => return Err(fail(manifest, e)),
    };
    manifest.ground_state = Some(prepared.report.clone());
    if prepared.report.imaginary_time_steps.is_some() {
        manifest.notes.push(format!(
            "imaginary-time ground state converged in {} steps",
            prepared.report.imaginary_time_steps.unwrap_or(0)
        ));
    }

    let (mut state, mut record) = match read_checkpoint(&dir, &hash)? {
        Some(ck) => {
            manifest.notes.push(format!("resumed from checkpoint at step {}", ck.state.step));
            (ck.state, ck.record)
        }
        None => (
            WaveState::new(prepared.ground.clone(), cfg.gauge.into()),
            EvolutionRecord {
                dt: pcfg.dt,
                ..Default::default()
            },
        ),
    };

    let every = cfg.propagator.checkpoint_every as u64;
    let stop = opts.stop_after.unwrap_or(total).min(total);
    while state.step < stop {
        let mut target = stop;
        if every > 0 {
            target = target.min((state.step / every + 1) * every);
        }
        let before = state.clone();
        match propagate(prepared.dynamics.as_mut(), &pulse, &pcfg, &mut state, target, &mut []) {
            Ok(chunk) => record.extend(&chunk),
            Err(e) => {
                manifest.steps_completed = before.step;
                let err = match write_checkpoint(&dir, &hash, &before, &record) {
                    Ok(()) => RunError::Physics(e),
                    Err(io) => io,
                };
                return Err(fail(manifest, err));
            }
        }
        if state.step < total {
            write_checkpoint(&dir, &hash, &state, &record)?;
        }
    }
    manifest.steps_completed = state.step;
    manifest.applies = record.applies;
    manifest.subdivided_steps = record.subdivided_steps;
    if record.subdivided_steps > 0 {
        manifest.notes.push(format!(
            "{} steps needed Krylov subdivision",
            record.subdivided_steps
        ));
    }
    if state.step < total {
        manifest.wall_time_s = started.elapsed().as_secs_f64();
        manifest.notes.push(format!("stopped at step {} of {total}", state.step));
        write_manifest(&dir, &manifest)?;
        return Err(RunError::Interrupted { steps: state.step });
    }

    let radial = prepared.dynamics.overlap().radial();
    let bound_population = prepared.bound.population(&state.coeffs, radial, None);
    manifest.ionization = Some(IonizationReport {
        absorbed: state.absorbed,
        final_norm: prepared.dynamics.overlap().norm_sqr(&state.coeffs),
        bound_population,
        bound_population_lowest10: prepared.bound.population(&state.coeffs, radial, Some(10)),
        ionization: 1.0 - bound_population,
    });

    let dipole_path = dir.join(files::DIPOLE_FILE);
    files::write_dipole(&dipole_path, &record).map_err(io_err(&dipole_path))?;
    manifest.files.push(files::DIPOLE_FILE.to_string());
    let analysis = match analyze_record(cfg, &record, prepared.report.ionization_potential) {
        Ok(a) => a,
        Err(e) => return Err(fail(manifest, e)),
    };
    manifest.files.extend(write_analysis(&dir, cfg, &analysis)?);
    if let Some(err) = &analysis.report.feature_error {
        manifest.notes.push(format!("feature location failed: {err}"));
    }
    manifest.observables = Some(analysis.report);
    manifest.status = RunStatus::Complete;
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    write_manifest(&dir, &manifest)?;
    let _ = fs::remove_file(dir.join(files::CHECKPOINT_FILE));
    Ok(RunOutcome {
        dir,
        manifest,
        skipped: false,
    })
}

/// Recomputes the observables of a complete run from its dipole record.
///
/// `cfg` is the stored config, possibly with changed `observables` keys.
/// Results for the stored config are rewritten in place; results for a
/// changed config go to `analysis/<short hash>` with their own manifest.
/// Returns the directory written and its manifest.
pub fn analyze(dir: &Path, cfg: &RunConfig) -> Result<(PathBuf, RunManifest), RunError> {
    let stored = read_run_config(dir)?;
    let mut manifest = read_manifest(dir)?.ok_or_else(|| {
        io_err(dir)(io::Error::new(io::ErrorKind::NotFound, "no manifest in run directory"))
    })?;
    if !manifest.is_complete() {
        return Err(io_err(dir)(io::Error::new(io::ErrorKind::InvalidData, "run is incomplete")));
    }
    let mut physics = cfg.clone();
    physics.observables = stored.observables.clone();
    physics.output = stored.output.clone();
    if physics != stored {
        return Err(ConfigError::new("observables", "analyze may change only observables keys").into());
    }
    let ip = manifest
        .ground_state
        .as_ref()
        .map(|g| g.ionization_potential)
        .unwrap_or(f64::NAN);
    let path = dir.join(files::DIPOLE_FILE);
    let record = files::read_dipole(&path).map_err(io_err(&path))?;
    let analysis = analyze_record(cfg, &record, ip)?;

    let hash = cfg.hash();
    let out = if hash == manifest.config_hash {
        dir.to_path_buf()
    } else {
        let sub = dir.join("analysis").join(cfg.short_hash());
        fs::create_dir_all(&sub).map_err(io_err(&sub))?;
        let cfg_path = sub.join(files::CONFIG_FILE);
        files::write_atomic(&cfg_path, cfg.to_toml().as_bytes()).map_err(io_err(&cfg_path))?;
        manifest.config_hash = hash;
        manifest.notes.push(format!("observables recomputed from {}", path.display()));
        sub
    };
    let mut names = Vec::new();
    if out == dir {
        names.push(files::DIPOLE_FILE.to_string());
    }
    names.extend(write_analysis(&out, cfg, &analysis)?);
    manifest.files = names;
    manifest.observables = Some(analysis.report);
    write_manifest(&out, &manifest)?;
    Ok((out, manifest))
}
