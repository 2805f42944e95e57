use hhg_core::basis::{build_basis, dipole_coupling, Gauge, KnotDistribution, Overlap};
use hhg_core::evolution::propagate;
use hhg_core::linalg::{dot, BandMatrix};
use hhg_core::propagator::{imaginary_time_step, Hamiltonian, KrylovWorkspace, PropagatorConfig, WaveState};
use hhg_core::pulse::{make_pulse, PulseParams};
use hhg_core::sae::{sae_hamiltonian_at, ModelPotential, SaeModel};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn model(r_max: f64, n: usize, l_max: usize, gauge: Gauge) -> SaeModel {
    let b = build_basis(r_max, n, 7, l_max, KnotDistribution::default()).unwrap();
    SaeModel::new(b, ModelPotential::default(), gauge).unwrap()
}

fn gauge(velocity: bool) -> Gauge {
    if velocity {
        Gauge::Velocity
    } else {
        Gauge::Length
    }
}

struct Block<'a>(&'a BandMatrix);

impl Hamiltonian for Block<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        self.0.mul_add_complex(x, y, C64::new(1.0, 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn coupling_is_banded_with_dipole_selection_rule(
        n in 20usize..60,
        l_max in 1usize..6,
        velocity in any::<bool>(),
    ) {
        let b = build_basis(30.0, n, 7, l_max, KnotDistribution::default()).unwrap();
        let d = dipole_coupling(&b, gauge(velocity));
        prop_assert!(d.max_band_offset() < b.order());
        for blk in d.blocks() {
            prop_assert_eq!(blk.row_l.abs_diff(blk.col_l), 1);
        }
        prop_assert!(d.hermiticity_error() < 1e-12);
    }

    #[test]
    fn hamiltonian_is_hermitian_for_any_pulse_and_time(
        intensity in 1e13f64..1e15,
        cep in 0.0f64..6.3,
        frac in 0.0f64..1.0,
        velocity in any::<bool>(),
        seed in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let g = gauge(velocity);
        let m = model(30.0, 40, 7, g);
        let p = make_pulse(390.0, intensity, 3.0, cep).unwrap();
        let h = sae_hamiltonian_at(frac * p.duration, &m.h0, &m.coupling, &p, g).unwrap();
        let n = m.basis.dim();
        let u: Vec<C64> = (0..n).map(|i| C64::new((seed[0] * i as f64).sin(), (seed[1] * i as f64).cos())).collect();
        let v: Vec<C64> = (0..n).map(|i| C64::new((seed[2] * i as f64).cos(), (seed[3] * i as f64).sin())).collect();
        let mut hu = vec![C64::new(0.0, 0.0); n];
        let mut hv = vec![C64::new(0.0, 0.0); n];
        h.apply(&u, &mut hu);
        h.apply(&v, &mut hv);
        let a = dot(&u, &hv);
        let b = dot(&v, &hu).conj();
        prop_assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()), "{} vs {}", a, b);
    }

    #[test]
    fn imaginary_time_energy_never_rises(
        seed in prop::collection::vec(0.1f64..1.0, 40),
        dtau in 0.05f64..1.0,
    ) {
        let b = build_basis(30.0, 40, 6, 1, KnotDistribution::Linear).unwrap();
        let h = hhg_core::basis::radial_hamiltonian_block(&b, 0, |r| -1.0 / r).unwrap();
        let ov = Overlap::new(&b.with_l_max(0)).unwrap();
        let mut c: Vec<C64> = seed.iter().take(h.dim()).map(|&x| C64::new(x, 0.0)).collect();
        c.resize(h.dim(), C64::new(0.1, 0.0));
        let mut ws = KrylovWorkspace::new(h.dim(), 10);
        let mut last = f64::INFINITY;
        for _ in 0..40 {
            let e = imaginary_time_step(&mut c, &Block(&h), &ov, dtau, 10, &mut ws).unwrap();
            prop_assert!(e <= last + 1e-12, "{} -> {}", last, e);
            last = e;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3))]

    #[test]
    fn field_free_propagation_conserves_the_norm(
        weights in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3),
        velocity in any::<bool>(),
    ) {
        let g = gauge(velocity);
        let mut m = model(60.0, 70, 2, g);
        let bound = m.bound_states().unwrap();
        let nr = m.basis.n_radial();
        let mut c = vec![C64::new(0.0, 0.0); m.basis.dim()];
        for (st, &(re, im)) in bound.states.iter().zip(&weights) {
            for (k, v) in st.vector.iter().enumerate() {
                c[st.l * nr + k] += C64::new(re, im) * v;
            }
        }
        let nrm = m.overlap.norm_sqr(&c).sqrt();
        c.iter_mut().for_each(|x| *x /= nrm);
        let cfg = PropagatorConfig {
            dt: 0.05,
            absorber_start: 50.0,
            ..Default::default()
        };
        let p = PulseParams::new(390.0, 0.0, 1.0, 0.0).unwrap();
        let mut st = WaveState::new(c, g);
        let rec = propagate(&mut m, &p, &cfg, &mut st, 1000, &mut []).unwrap();
        let drift = rec.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
        prop_assert!(drift < 1e-10, "{}", drift);
        prop_assert!((m.overlap.norm_sqr(&st.coeffs) - 1.0).abs() < 1e-10);
    }
}

/// FD minus Ehrenfest acceleration on a common 0.2 a.u. grid, in units of
/// the peak acceleration.
fn ehrenfest_fd_mismatch(dt: f64) -> Vec<f64> {
    let mut m = model(40.0, 60, 6, Gauge::Length);
    let p = make_pulse(390.0, 1e14, 1.0, 0.0).unwrap();
    let cfg = PropagatorConfig {
        dt,
        absorber_start: 30.0,
        residual_tol: 1e-12,
        ..Default::default()
    };
    let g = m.ground_state().unwrap();
    let mut st = WaveState::new(g.coeffs, Gauge::Length);
    let steps = (60.0 / dt).round() as u64;
    let rec = propagate(&mut m, &p, &cfg, &mut st, steps, &mut []).unwrap();
    let fd = rec.finite_difference_acceleration();
    let peak = rec.acceleration.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let stride = (0.2 / dt).round() as usize;
    (stride..rec.len() - stride)
        .step_by(stride)
        .map(|i| (fd[i] - rec.acceleration[i]) / peak)
        .collect()
}

fn rms_difference(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

#[test]
fn ehrenfest_and_finite_difference_agree_to_second_order() {
    // the mismatch is a dt-independent basis term plus a dt^2 term; successive
    // halvings isolate the latter
    let e: Vec<Vec<f64>> = [0.1, 0.05, 0.025].iter().map(|&dt| ehrenfest_fd_mismatch(dt)).collect();
    assert!(e[0].iter().all(|x| x.abs() < 2e-2));
    let order = (rms_difference(&e[0], &e[1]) / rms_difference(&e[1], &e[2])).log2();
    assert!(order > 1.7 && order < 2.3, "order {order}");
}
