//! Delimited-text data files and the binary checkpoint.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use hhg_core::evolution::EvolutionRecord;
use hhg_core::observables::{Spectrogram, Spectrum, Window};
use hhg_core::propagator::WaveState;

pub const DIPOLE_FILE: &str = "dipole.txt";
pub const SPECTRUM_FILE: &str = "spectrum.txt";
pub const SPECTROGRAM_FILE: &str = "spectrogram.txt";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const CONFIG_FILE: &str = "config.toml";
pub const MANIFEST_FILE: &str = "manifest.json";

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn write_rows(path: &Path, header: &str, rows: impl FnMut(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        writeln!(w, "# {header}")?;
        let mut rows = rows;
        rows(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)
}

/// Columns t, E, d, d̈, norm, absorbed. Values use the shortest decimal
/// form that reads back to the same f64.
pub fn write_dipole(path: &Path, record: &EvolutionRecord) -> io::Result<()> {
    write_rows(path, "t E d dd norm absorbed", |w| {
        for i in 0..record.len() {
            let s = record.sample(i);
            writeln!(
                w,
                "{:e} {:e} {:e} {:e} {:e} {:e}",
                s.t, s.field, s.dipole, s.acceleration, s.norm, s.absorbed
            )?;
        }
        Ok(())
    })
}

pub fn read_dipole(path: &Path) -> io::Result<EvolutionRecord> {
    let text = fs::read_to_string(path)?;
    let mut record = EvolutionRecord::default();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| invalid(format!("{}:{}: {e}", path.display(), n + 1)))?;
        if v.len() != 6 {
            return Err(invalid(format!("{}:{}: expected 6 columns", path.display(), n + 1)));
        }
        record.times.push(v[0]);
        record.field.push(v[1]);
        record.dipole.push(v[2]);
        record.acceleration.push(v[3]);
        record.norm.push(v[4]);
        record.absorbed.push(v[5]);
    }
    if record.len() >= 2 {
        record.dt = record.times[1] - record.times[0];
    }
    Ok(record)
}

/// Columns ω, ω/ω_L, S for ω ≤ `max_order` ω_L.
pub fn write_spectrum(path: &Path, spectrum: &Spectrum, max_order: f64) -> io::Result<()> {
    let header = format!(
        "omega order S   omega_laser={:e} window={}",
        spectrum.omega_laser,
        match spectrum.window {
            Window::None => "none",
            Window::Hann => "hann",
        }
    );
    write_rows(path, &header, |w| {
        for (&om, &s) in spectrum.omega.iter().zip(&spectrum.density) {
            let order = om / spectrum.omega_laser;
            if order > max_order {
                break;
            }
            writeln!(w, "{om:e} {order:e} {s:e}")?;
        }
        Ok(())
    })
}

pub fn read_spectrum(path: &Path) -> io::Result<Spectrum> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| invalid("empty spectrum file"))?;
    let field = |key: &str| {
        header
            .split_whitespace()
            .find_map(|t| t.strip_prefix(key))
            .ok_or_else(|| invalid(format!("spectrum header lacks {key}")))
    };
    let omega_laser: f64 = field("omega_laser=")?.parse().map_err(|e| invalid(format!("{e}")))?;
    let window = match field("window=")? {
        "hann" => Window::Hann,
        _ => Window::None,
    };
    let mut omega = Vec::new();
    let mut density = Vec::new();
    for line in lines {
        let mut cols = line.split_whitespace();
        let (Some(a), Some(_), Some(c)) = (cols.next(), cols.next(), cols.next()) else {
            continue;
        };
        omega.push(a.parse().map_err(|e| invalid(format!("{e}")))?);
        density.push(c.parse().map_err(|e| invalid(format!("{e}")))?);
    }
    Spectrum::new(omega, density, omega_laser, window).map_err(|e| invalid(e.to_string()))
}

/// Long format τ, ω, F for ω ≤ `max_order` ω_L.
pub fn write_spectrogram(path: &Path, sg: &Spectrogram, omega_laser: f64, max_order: f64) -> io::Result<()> {
    let n_omega = sg.omega.iter().take_while(|&&w| w <= max_order * omega_laser).count();
    let header = format!("tau omega F   window_length={:e}", sg.window_length);
    write_rows(path, &header, |w| {
        for (i, tau) in sg.tau.iter().enumerate() {
            for j in 0..n_omega {
                writeln!(w, "{tau:e} {:e} {:e}", sg.omega[j], sg.at(i, j))?;
            }
        }
        Ok(())
    })
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"HHGCKPT\0";
const CHECKPOINT_VERSION: u32 = 1;

/// A propagation snapshot: the wave state (tagged with the config hash) and
/// the record up to and including its step.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: WaveState,
    pub record: EvolutionRecord,
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_f64s(buf: &mut Vec<u8>, v: &[f64]) {
    put_u64(buf, v.len() as u64);
    for x in v {
        buf.extend_from_slice(&x.to_le_bytes());
    }
}

struct Cursor<'a>(&'a [u8]);

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> io::Result<&[u8]> {
        if self.0.len() < n {
            return Err(invalid("truncated checkpoint"));
        }
        let (head, rest) = self.0.split_at(n);
        self.0 = rest;
        Ok(head)
    }

    fn u64(&mut self) -> io::Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self) -> io::Result<Vec<f64>> {
        let n = self.u64()? as usize;
        let raw = self.take(n.checked_mul(8).ok_or_else(|| invalid("bad length"))?)?;
        Ok(raw.chunks(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

impl Checkpoint {
    pub fn to_bytes(&self, hash: &str) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(CHECKPOINT_MAGIC);
        buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        let state = self.state.to_bytes(hash.as_bytes());
        put_u64(&mut buf, state.len() as u64);
        buf.extend_from_slice(&state);
        let r = &self.record;
        buf.extend_from_slice(&r.dt.to_le_bytes());
        put_u64(&mut buf, r.applies);
        put_u64(&mut buf, r.subdivided_steps);
        for col in [&r.times, &r.field, &r.dipole, &r.acceleration, &r.norm, &r.absorbed] {
            put_f64s(&mut buf, col);
        }
        buf
    }

    /// Decodes a checkpoint and returns it with the config hash it was
    /// written for.
    pub fn from_bytes(data: &[u8]) -> io::Result<(Self, String)> {
        let mut c = Cursor(data);
        if c.take(8)? != CHECKPOINT_MAGIC {
            return Err(invalid("not a checkpoint file"));
        }
        let version = u32::from_le_bytes(c.take(4)?.try_into().unwrap());
        if version != CHECKPOINT_VERSION {
            return Err(invalid(format!("unsupported checkpoint version {version}")));
        }
        let n = c.u64()? as usize;
        let (state, tag) = WaveState::from_bytes(c.take(n)?).map_err(|e| invalid(e.to_string()))?;
        let dt = f64::from_le_bytes(c.take(8)?.try_into().unwrap());
        let applies = c.u64()?;
        let subdivided_steps = c.u64()?;
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(6);
        for _ in 0..6 {
            cols.push(c.f64s()?);
        }
        if !c.0.is_empty() {
            return Err(invalid("trailing bytes in checkpoint"));
        }
        if cols.iter().any(|v| v.len() != cols[0].len()) {
            return Err(invalid("checkpoint columns differ in length"));
        }
        let mut it = cols.into_iter();
        let mut next = || it.next().unwrap();
        let record = EvolutionRecord {
            dt,
            times: next(),
            field: next(),
            dipole: next(),
            acceleration: next(),
            norm: next(),
            absorbed: next(),
            applies,
            subdivided_steps,
        };
        let hash = String::from_utf8(tag).map_err(|_| invalid("checkpoint tag is not UTF-8"))?;
        Ok((Self { state, record }, hash))
    }
}
