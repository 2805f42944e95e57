//! Time loop shared by both models: stepping, absorber, sampling of the
//! dipole observables and observer callbacks.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::{Gauge, Overlap, SpectralBasis};
use crate::error::{Error, Result};
use crate::propagator::{
    arnoldi_step, Absorber, KrylovWorkspace, PropagatorConfig, SpectralFilter, StepStats, WaveState,
};
use crate::pulse::PulseParams;
use crate::sae::{FieldHamiltonian, SaeModel};

/// Observables sampled at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub field: f64,
    pub dipole: f64,
    pub acceleration: f64,
    pub norm: f64,
    pub absorbed: f64,
}

/// A model that can advance a state by one step and evaluate observables.
pub trait Dynamics {
    fn basis(&self) -> &SpectralBasis;
    fn overlap(&self) -> &Overlap;
    fn gauge(&self) -> Gauge;

    /// Called once before stepping, e.g. to build a spectral filter.
    fn prepare(&mut self, cfg: &PropagatorConfig) -> Result<()>;

    /// Maps a state into the propagation space (identity without a filter).
    fn restrict(&self, coeffs: &mut [num_complex::Complex64]);

    /// Norm-changing mask applied after every step.
    fn absorb(&self, absorber: &Absorber, state: &mut WaveState) -> f64;

    /// Advances `state.coeffs` from t to t + dt.
    fn advance(
        &mut self,
        state: &mut WaveState,
        pulse: &PulseParams,
        dt: f64,
        cfg: &PropagatorConfig,
        ws: &mut KrylovWorkspace,
    ) -> Result<StepStats>;

    /// Dipole and Ehrenfest acceleration of `state` at `state.t`.
    fn observe(&mut self, state: &WaveState, pulse: &PulseParams) -> (f64, f64);
}

/// Per-step callback; an `Err` aborts the run.
pub trait Observer {
    fn on_sample(&mut self, state: &WaveState, sample: &Sample) -> core::result::Result<(), String>;
}

/// Uniformly sampled time series of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvolutionRecord {
    pub dt: f64,
    pub times: Vec<f64>,
    pub field: Vec<f64>,
    pub dipole: Vec<f64>,
    pub acceleration: Vec<f64>,
    pub norm: Vec<f64>,
    pub absorbed: Vec<f64>,
    /// Sum of Krylov H applies, a cost measure.
    pub applies: u64,
    /// Steps that needed subdivision to meet the residual tolerance.
    pub subdivided_steps: u64,
}

impl EvolutionRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, s: &Sample) {
        self.times.push(s.t);
        self.field.push(s.field);
        self.dipole.push(s.dipole);
        self.acceleration.push(s.acceleration);
        self.norm.push(s.norm);
        self.absorbed.push(s.absorbed);
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample {
            t: self.times[i],
            field: self.field[i],
            dipole: self.dipole[i],
            acceleration: self.acceleration[i],
            norm: self.norm[i],
            absorbed: self.absorbed[i],
        }
    }

    /// Checks strictly increasing, uniformly spaced times.
    pub fn check_uniform(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::NonUniformGrid);
        }
        let dt = self.times[1] - self.times[0];
        if !(dt > 0.0) {
            return Err(Error::NonUniformGrid);
        }
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(Error::NonUniformGrid);
            }
        }
        Ok(dt)
    }

    /// Second central difference of the dipole, same length as the record
    /// (end points copied from their neighbours).
    pub fn finite_difference_acceleration(&self) -> Vec<f64> {
        let n = self.dipole.len();
        let mut out = alloc::vec![0.0; n];
        if n < 3 {
            return out;
        }
        let h2 = self.dt * self.dt;
        for i in 1..n - 1 {
            out[i] = (self.dipole[i + 1] - 2.0 * self.dipole[i] + self.dipole[i - 1]) / h2;
        }
        out[0] = out[1];
        out[n - 1] = out[n - 2];
        out
    }

    /// Appends `other`, dropping its first sample if it duplicates our last.
    pub fn extend(&mut self, other: &EvolutionRecord) {
        let skip = match (self.times.last(), other.times.first()) {
            (Some(a), Some(b)) if a == b => 1,
            _ => 0,
        };
        for i in skip..other.len() {
            self.push(&other.sample(i));
        }
        self.applies += other.applies;
        self.subdivided_steps += other.subdivided_steps;
    }
}

/// Number of outer steps covering [0, t_end].
pub fn step_count(t_end: f64, dt: f64) -> u64 {
    let n = t_end / dt;
    let r = n.round();
    if (n - r).abs() < 1e-9 {
        r as u64
    } else {
        n as u64 + 1
    }
}

/// Steps `state` until `state.step == total_steps`, sampling after every
/// step (and once at the start). Times are `step · dt`, so resuming from a
/// checkpoint reproduces the uninterrupted trajectory exactly.
///
/// On an observer failure the state is left at the last completed step and
/// the error is returned, so the caller can write a checkpoint.
pub fn propagate<D: Dynamics + ?Sized>(
    model: &mut D,
    pulse: &PulseParams,
    cfg: &PropagatorConfig,
    state: &mut WaveState,
    total_steps: u64,
    observers: &mut [&mut dyn Observer],
) -> Result<EvolutionRecord> {
    cfg.validate(model.basis().r_max())?;
    if state.gauge != model.gauge() {
        return Err(Error::GaugeMismatch {
            built: model.gauge(),
            requested: state.gauge,
        });
    }
    model.prepare(cfg)?;
    if state.step == 0 {
        // resumed states already live in the propagation space
        model.restrict(&mut state.coeffs);
    }
    let absorber = Absorber::new(model.basis(), cfg)?;
    let mut ws = KrylovWorkspace::new(model.basis().dim(), cfg.krylov_dim);
    let mut record = EvolutionRecord {
        dt: cfg.dt,
        ..Default::default()
    };

    let emit = |model: &mut D, state: &WaveState, record: &mut EvolutionRecord, obs: &mut [&mut dyn Observer]| {
        let (dipole, acceleration) = model.observe(state, pulse);
        let s = Sample {
            t: state.t,
            field: pulse.electric_field(state.t),
            dipole,
            acceleration,
            norm: model.overlap().norm_sqr(&state.coeffs),
            absorbed: state.absorbed,
        };
        record.push(&s);
        for o in obs.iter_mut() {
            o.on_sample(state, &s).map_err(Error::Observer)?;
        }
        Ok::<(), Error>(())
    };

    emit(model, state, &mut record, observers)?;
    while state.step < total_steps {
        let mut next = state.clone();
        let stats = model.advance(&mut next, pulse, cfg.dt, cfg, &mut ws)?;
        model.absorb(&absorber, &mut next);
        next.step += 1;
        next.t = next.step as f64 * cfg.dt;
        record.applies += u64::from(stats.applies);
        if stats.substeps > 1 {
            record.subdivided_steps += 1;
        }
        *state = next;
        emit(model, state, &mut record, observers)?;
    }
    Ok(record)
}

/// c ← P c for the S-orthogonal projector of `filter`.
pub fn restrict_with(filter: Option<&SpectralFilter>, overlap: &Overlap, coeffs: &mut [num_complex::Complex64]) {
    if let Some(f) = filter {
        let mut sc = alloc::vec![num_complex::Complex64::new(0.0, 0.0); coeffs.len()];
        overlap.apply(coeffs, &mut sc);
        f.apply_dual(&mut sc);
        coeffs.copy_from_slice(&sc);
    }
}

impl Dynamics for SaeModel {
    fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    fn overlap(&self) -> &Overlap {
        &self.overlap
    }

    fn gauge(&self) -> Gauge {
        self.coupling.gauge
    }

    fn prepare(&mut self, cfg: &PropagatorConfig) -> Result<()> {
        self.set_energy_cutoff(cfg.energy_cutoff)
    }

    fn restrict(&self, coeffs: &mut [num_complex::Complex64]) {
        restrict_with(self.filter.as_ref(), &self.overlap, coeffs)
    }

    fn absorb(&self, absorber: &Absorber, state: &mut WaveState) -> f64 {
        absorber.apply(state, &self.metric())
    }

    fn advance(
        &mut self,
        state: &mut WaveState,
        pulse: &PulseParams,
        dt: f64,
        cfg: &PropagatorConfig,
        ws: &mut KrylovWorkspace,
    ) -> Result<StepStats> {
        let (h0, coupling) = (&self.h0, &self.coupling);
        let make_h = |t: f64| FieldHamiltonian {
            h0,
            coupling: &coupling.operator,
            strength: coupling.strength(pulse, t),
        };
        arnoldi_step(&mut state.coeffs, state.t, dt, &make_h, &self.metric(), cfg, ws)
    }

    fn observe(&mut self, state: &WaveState, pulse: &PulseParams) -> (f64, f64) {
        let field = pulse.electric_field(state.t);
        (self.dipole(&state.coeffs), self.acceleration(&state.coeffs, field))
    }
}
