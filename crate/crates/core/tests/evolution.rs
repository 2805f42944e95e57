use hhg_core::basis::Gauge;
use hhg_core::propagator::{PropagatorConfig, WaveState};
use hhg_core::sae::SaeModel;
use hhg_core::Error;
use hhg_core::evolution::*;
use hhg_core::basis::{build_basis, KnotDistribution};
use hhg_core::pulse::{make_pulse, PulseParams};
use hhg_core::sae::ModelPotential;

fn model(gauge: Gauge) -> SaeModel {
    let b = build_basis(40.0, 60, 7, 4, KnotDistribution::default()).unwrap();
    SaeModel::new(b, ModelPotential::default(), gauge).unwrap()
}

fn cfg() -> PropagatorConfig {
    PropagatorConfig {
        dt: 0.05,
        absorber_start: 30.0,
        ..Default::default()
    }
}

struct FailAt(f64);

impl Observer for FailAt {
    fn on_sample(&mut self, state: &WaveState, _: &Sample) -> core::result::Result<(), String> {
        if state.t >= self.0 {
            Err(String::from("stop"))
        } else {
            Ok(())
        }
    }
}

#[test]
fn zero_field_gives_zero_dipole() {
    let mut m = model(Gauge::Length);
    let p = PulseParams::new(390.0, 0.0, 1.0, 0.0).unwrap();
    let g = m.ground_state().unwrap();
    let mut st = WaveState::new(g.coeffs, Gauge::Length);
    let rec = propagate(&mut m, &p, &cfg(), &mut st, 100, &mut []).unwrap();
    assert_eq!(rec.len(), 101);
    assert!(rec.dipole.iter().all(|d| d.abs() < 1e-12));
    assert!((rec.norm.last().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn restart_is_bit_identical() {
    let p = make_pulse(390.0, 1e14, 1.0, 0.0).unwrap();
    let mut m = model(Gauge::Length);
    let g = m.ground_state().unwrap();
    let mut full_state = WaveState::new(g.coeffs.clone(), Gauge::Length);
    let full = propagate(&mut m, &p, &cfg(), &mut full_state, 60, &mut []).unwrap();

    let mut st = WaveState::new(g.coeffs, Gauge::Length);
    let mut stop = FailAt(1.5);
    let err = propagate(&mut m, &p, &cfg(), &mut st, 60, &mut [&mut stop]).unwrap_err();
    assert!(matches!(err, Error::Observer(_)));
    let blob = st.to_bytes(b"cfg");
    let (mut resumed, _) = WaveState::from_bytes(&blob).unwrap();
    let tail = propagate(&mut m, &p, &cfg(), &mut resumed, 60, &mut []).unwrap();
    let k = resumed.step as usize - (tail.len() - 1);
    assert_eq!(&full.dipole[k..], &tail.dipole[..]);
    assert_eq!(&full.acceleration[k..], &tail.acceleration[..]);
    assert_eq!(full_state.coeffs, resumed.coeffs);
}

#[test]
fn step_count_covers_interval() {
    assert_eq!(step_count(1.0, 0.01), 100);
    assert_eq!(step_count(1.005, 0.01), 101);
}
