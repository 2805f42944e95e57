//! Parameter sweeps over a worker pool, feature tables and run comparison.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use hhg_core::observables::cep_contrast;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, RunConfig};
use crate::files;
use crate::runner::{io_err, run, RunError, RunManifest, RunOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Cep,
    Intensity,
    Gauge,
    Model,
}

impl SweepAxis {
    /// The config key the axis overrides.
    pub fn key(self) -> &'static str {
        match self {
            SweepAxis::Cep => "pulse.cep",
            SweepAxis::Intensity => "pulse.intensity",
            SweepAxis::Gauge => "gauge",
            SweepAxis::Model => "model",
        }
    }

    fn name(self) -> &'static str {
        match self {
            SweepAxis::Cep => "cep",
            SweepAxis::Intensity => "intensity",
            SweepAxis::Gauge => "gauge",
            SweepAxis::Model => "model",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cep" => Ok(SweepAxis::Cep),
            "intensity" => Ok(SweepAxis::Intensity),
            "gauge" => Ok(SweepAxis::Gauge),
            "model" => Ok(SweepAxis::Model),
            _ => Err(ConfigError::new("axis", format!("unknown sweep axis `{s}`"))),
        }
    }
}

/// One sweep point: its value, run directory and manifest, or the error
/// that stopped it.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: String,
    pub dir: PathBuf,
    pub manifest: Option<RunManifest>,
    pub error: Option<String>,
}

/// Modulation-depth contrast of one CEP value against the first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastRow {
    pub index: usize,
    pub band: (usize, usize),
    pub depth_reference: f64,
    pub depth: f64,
    pub difference: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    pub contrast: Vec<ContrastRow>,
    pub table: String,
    pub table_path: PathBuf,
}

/// Configurations of a sweep, in value order.
pub fn sweep_configs(base: &RunConfig, axis: SweepAxis, values: &[String]) -> Result<Vec<RunConfig>, ConfigError> {
    if values.is_empty() {
        return Err(ConfigError::new("values", "a sweep needs at least one value"));
    }
    let text = base.to_toml();
    values
        .iter()
        .map(|v| RunConfig::parse_with_overrides(&text, &[format!("{}={v}", axis.key())]))
        .collect()
}

/// Band above the secondary maximum used for the CEP contrast: the eight
/// orders from two above it, clipped to the analysed range.
pub fn contrast_band(secondary_maximum: usize, max_order: usize) -> Option<(usize, usize)> {
    let lo = secondary_maximum + 2;
    let hi = (lo + 8).min(max_order.saturating_sub(2));
    (hi > lo).then_some((lo, hi))
}

fn cep_rows(points: &[SweepPoint], max_order: usize) -> Vec<ContrastRow> {
    let Some(first) = points.first() else {
        return Vec::new();
    };
    let Some(band) = first
        .manifest
        .as_ref()
        .and_then(|m| m.observables.as_ref())
        .and_then(|o| o.features)
        .and_then(|f| contrast_band(f.secondary_maximum, max_order))
    else {
        return Vec::new();
    };
    let Ok(reference) = files::read_spectrum(&first.dir.join(files::SPECTRUM_FILE)) else {
        return Vec::new();
    };
    points
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, p)| p.manifest.is_some())
        .filter_map(|(i, p)| {
            let s = files::read_spectrum(&p.dir.join(files::SPECTRUM_FILE)).ok()?;
            let c = cep_contrast(&reference, &s, band.0, band.1).ok()?;
            Some(ContrastRow {
                index: i,
                band,
                depth_reference: c.depth_a,
                depth: c.depth_b,
                difference: c.difference,
            })
        })
        .collect()
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// Largest |ratio − 1| of the odd peaks of orders 1..=13 against `reference`.
pub fn peak_mismatch(reference: &RunManifest, other: &RunManifest) -> Option<f64> {
    let a = &reference.observables.as_ref()?.odd_peaks_db;
    let b = &other.observables.as_ref()?.odd_peaks_db;
    let mut worst: Option<f64> = None;
    for &(n, da) in a.iter().filter(|(n, _)| *n <= 13) {
        let &(_, db) = b.iter().find(|(m, _)| *m == n)?;
        let r = (10f64.powf((db - da) / 10.0) - 1.0).abs();
        worst = Some(worst.map_or(r, |w| w.max(r)));
    }
    worst
}

fn render_table(axis: SweepAxis, points: &[SweepPoint], contrast: &[ContrastRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# value\thash\tstatus\tE_gs\tIp\tionization\tfundamental\tdip\tsecondary_max\tdrop_off\tcutoff_order\teven_supp_dB\tH1-13_mismatch\tmod_depth\tcontrast_dB"
    );
    let reference = points.first().and_then(|p| p.manifest.as_ref());
    for (i, p) in points.iter().enumerate() {
        let _ = write!(out, "{}", p.value);
        let Some(m) = &p.manifest else {
            let _ = writeln!(out, "\t-\tfailed: {}", p.error.as_deref().unwrap_or("unknown"));
            continue;
        };
        let gs = m.ground_state.as_ref();
        let obs = m.observables.as_ref();
        let f = obs.and_then(|o| o.features);
        let row = contrast.iter().find(|c| c.index == i);
        let depth = if i == 0 {
            contrast.first().map(|c| c.depth_reference)
        } else {
            row.map(|c| c.depth)
        };
        let _ = writeln!(
            out,
            "\t{}\t{:?}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            &m.config_hash[..16],
            m.status,
            fmt_opt(gs.map(|g| format!("{:.7}", g.energy))),
            fmt_opt(gs.map(|g| format!("{:.5}", g.ionization_potential))),
            fmt_opt(m.ionization.map(|x| format!("{:.3e}", x.ionization))),
            fmt_opt(f.map(|f| format!("{:.3}", f.fundamental_peak))),
            fmt_opt(f.map(|f| f.dip)),
            fmt_opt(f.map(|f| f.secondary_maximum)),
            fmt_opt(f.map(|f| f.drop_off)),
            fmt_opt(obs.and_then(|o| o.classical_cutoff_order).map(|c| format!("{c:.2}"))),
            fmt_opt(obs.and_then(|o| o.even_suppression_db).map(|d| format!("{d:.1}"))),
            fmt_opt(reference.and_then(|r| peak_mismatch(r, m)).map(|d| format!("{d:.3}"))),
            fmt_opt(depth.map(|d| format!("{d:.2}"))),
            fmt_opt(row.map(|c| format!("{:.2}", c.difference))),
        );
    }
    if let Some(c) = contrast.first() {
        let _ = writeln!(out, "# {} contrast band: orders {}..={}", axis.name(), c.band.0, c.band.1);
    }
    out
}

/// Runs every sweep point on up to `workers` threads and writes a
/// comparison table under `<output root>/sweeps`. Failed points are
/// recorded and the sweep continues. Results do not depend on the order in
/// which workers pick up points.
pub fn sweep(
    base: &RunConfig,
    axis: SweepAxis,
    values: &[String],
    workers: usize,
    opts: &RunOptions,
) -> Result<SweepResult, RunError> {
    let configs = sweep_configs(base, axis, values)?;
    let slots: Vec<Mutex<Option<SweepPoint>>> = configs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, configs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cfg) = configs.get(i) else { break };
                let point = match run(cfg, opts) {
                    Ok(o) => SweepPoint {
                        value: values[i].clone(),
                        dir: o.dir,
                        manifest: Some(o.manifest),
                        error: None,
                    },
                    Err(e) => SweepPoint {
                        value: values[i].clone(),
                        dir: crate::runner::run_dir(cfg),
                        manifest: None,
                        error: Some(e.to_string()),
                    },
                };
                *slots[i].lock().expect("slot lock") = Some(point);
            });
        }
    });
    let points: Vec<SweepPoint> = slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("every point ran"))
        .collect();
    let contrast = if axis == SweepAxis::Cep {
        cep_rows(&points, base.observables.max_order)
    } else {
        Vec::new()
    };
    let table = render_table(axis, &points, &contrast);

    let mut h = Sha256::new();
    h.update(base.hash().as_bytes());
    h.update(axis.name().as_bytes());
    for v in values {
        h.update(v.as_bytes());
        h.update([0]);
    }
    let id = format!("{:x}", h.finalize());
    let dir = base.output_root().join("sweeps");
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let table_path = dir.join(format!("{}-{}.tsv", axis.name(), &id[..16]));
    files::write_atomic(&table_path, table.as_bytes()).map_err(io_err(&table_path))?;
    Ok(SweepResult {
        axis,
        points,
        contrast,
        table,
        table_path,
    })
}

fn load(dir: &Path) -> Result<RunManifest, RunError> {
    crate::runner::read_manifest(dir)?.ok_or_else(|| {
        io_err(dir)(std::io::Error::new(std::io::ErrorKind::NotFound, "no manifest in run directory"))
    })
}

/// Side-by-side feature table of two runs, e.g. TDDFT against SAE.
pub fn compare(dir_a: &Path, dir_b: &Path) -> Result<String, RunError> {
    let a = load(dir_a)?;
    let b = load(dir_b)?;
    let mut out = String::new();
    let _ = writeln!(out, "# quantity\t{}\t{}", dir_a.display(), dir_b.display());
    let row = |out: &mut String, name: &str, f: &dyn Fn(&RunManifest) -> Option<String>| {
        let _ = writeln!(out, "{name}\t{}\t{}", fmt_opt(f(&a)), fmt_opt(f(&b)));
    };
    row(&mut out, "model", &|m| Some(format!("{:?}", m.model)));
    row(&mut out, "gauge", &|m| Some(format!("{:?}", m.gauge)));
    row(&mut out, "E_gs", &|m| m.ground_state.as_ref().map(|g| format!("{:.7}", g.energy)));
    row(&mut out, "Ip", &|m| m.ground_state.as_ref().map(|g| format!("{:.5}", g.ionization_potential)));
    row(&mut out, "ionization", &|m| m.ionization.map(|x| format!("{:.3e}", x.ionization)));
    let feat = |m: &RunManifest| m.observables.as_ref().and_then(|o| o.features);
    row(&mut out, "fundamental", &|m| feat(m).map(|f| format!("{:.3}", f.fundamental_peak)));
    row(&mut out, "dip", &|m| feat(m).map(|f| f.dip.to_string()));
    row(&mut out, "secondary_max", &|m| feat(m).map(|f| f.secondary_maximum.to_string()));
    row(&mut out, "drop_off", &|m| feat(m).map(|f| f.drop_off.to_string()));
    row(&mut out, "cutoff_order", &|m| {
        m.observables
            .as_ref()
            .and_then(|o| o.classical_cutoff_order)
            .map(|c| format!("{c:.2}"))
    });
    row(&mut out, "even_supp_dB", &|m| {
        m.observables
            .as_ref()
            .and_then(|o| o.even_suppression_db)
            .map(|d| format!("{d:.1}"))
    });
    let peaks = |m: &RunManifest, n: usize| {
        m.observables
            .as_ref()
            .and_then(|o| o.odd_peaks_db.iter().find(|(k, _)| *k == n))
            .map(|(_, d)| format!("{d:.2}"))
    };
    let max_n = [&a, &b]
        .iter()
        .filter_map(|m| m.observables.as_ref())
        .flat_map(|o| o.odd_peaks_db.iter().map(|(n, _)| *n))
        .max()
        .unwrap_or(0);
    for n in (1..=max_n).step_by(2) {
        row(&mut out, &format!("H{n}_dB"), &|m| peaks(m, n));
    }
    Ok(out)
}
