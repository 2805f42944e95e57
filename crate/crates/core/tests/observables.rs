use hhg_core::evolution::EvolutionRecord;
use hhg_core::Error;
use hhg_core::observables::*;
use std::vec;

fn comb(heights: &[(f64, f64)], floor: f64) -> Spectrum {
    let w_l = 0.1;
    let n = 2000;
    let omega: Vec<f64> = (0..n).map(|i| i as f64 * 0.01 * w_l).collect();
    let density = omega
        .iter()
        .map(|w| {
            let x = w / w_l;
            floor
                + heights
                    .iter()
                    .map(|&(c, h)| h * (-((x - c) / 0.08).powi(2)).exp())
                    .sum::<f64>()
        })
        .collect();
    Spectrum::new(omega, density, w_l, Window::None).unwrap()
}

#[test]
fn features_of_a_synthetic_plateau() {
    let s = comb(
        &[
            (1.0, 1.0),
            (3.0, 1e-2),
            (5.0, 1e-4),
            (7.0, 3e-4),
            (9.0, 1e-4),
            (11.0, 1e-7),
            (13.0, 1e-9),
        ],
        1e-12,
    );
    let f = locate_features(&s, 15).unwrap();
    assert!((f.fundamental_peak - 1.0).abs() < 0.011);
    assert_eq!(f.dip, 5);
    assert_eq!(f.secondary_maximum, 7);
    assert_eq!(f.drop_off, 11);
    assert!(even_harmonic_suppression(&s, 10).unwrap() > 30.0);
}

#[test]
fn monotone_envelope_has_no_dip() {
    let s = comb(&[(1.0, 1.0), (3.0, 1e-1), (5.0, 1e-2), (7.0, 1e-3), (9.0, 1e-4)], 1e-12);
    assert!(matches!(locate_features(&s, 9), Err(Error::Analysis(_))));
}

#[test]
fn contrast_of_identical_spectra_is_zero() {
    let s = comb(&[(1.0, 1.0), (3.0, 1e-2), (5.0, 1e-3)], 1e-8);
    let c = cep_contrast(&s, &s, 3, 5).unwrap();
    assert_eq!(c.difference, 0.0);
    let flat = comb(&[], 1.0);
    assert!(modulation_depth(&flat, 3, 5).unwrap().abs() < 1e-12);
    assert!(c.depth_a > 10.0);
}

#[test]
fn turning_points_of_a_sine() {
    let dt = 0.01;
    let times: Vec<f64> = (0..1000).map(|i| i as f64 * dt).collect();
    let mut rec = EvolutionRecord {
        dt,
        ..Default::default()
    };
    rec.dipole = times.iter().map(|t| (2.0 * t).sin()).collect();
    rec.times = times;
    let tp = turning_points(&rec);
    let pi = core::f64::consts::PI;
    assert_eq!(tp.len(), 6);
    for (k, t) in tp.iter().enumerate() {
        assert!((t - (pi / 4.0 + k as f64 * pi / 2.0)).abs() < 1e-5, "{t}");
    }
    let (near, dist) = nearest_turning_point(&rec, 2.0).unwrap();
    assert!((near - 3.0 * pi / 4.0).abs() < 1e-5 && dist < 0.4);
}

#[test]
fn spectrogram_queries() {
    let sg = Spectrogram {
        tau: vec![0.0, 1.0, 2.0],
        omega: vec![0.0, 1.0, 2.0, 3.0],
        density: vec![5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 4.0, 0.0, 0.0, 3.0, 0.5],
        window_length: 1.0,
    };
    assert_eq!(sg.burst_time(1.5), Some(1.0));
    assert_eq!(sg.dominant_frequency(1.0, 2.0, 0.5), Some(3.0));
    assert_eq!(sg.dominant_frequency(1.0, 1.0, 0.5), Some(3.0));
    assert_eq!(sg.dominant_frequency(2.0, 2.0, 0.5), Some(2.0));
    assert_eq!(sg.dominant_frequency(5.0, 6.0, 0.5), None);
}
