use hhg_core::eigen::*;
use hhg_core::basis::{build_basis, radial_hamiltonian_block, KnotDistribution};
use hhg_core::linalg::{generalized_eigen_dense, BandMatrix};

fn s_inner(s: &BandMatrix, x: &[f64], y: &[f64]) -> f64 {
    let mut sy = vec![0.0; y.len()];
    s.mul_add_real(y, &mut sy, 1.0);
    x.iter().zip(&sy).map(|(a, b)| a * b).sum()
}

#[test]
fn matches_dense_solver_on_hydrogen_block() {
    let b = build_basis(50.0, 80, 7, 1, KnotDistribution::default()).unwrap();
    let h = radial_hamiltonian_block(&b, 0, |r| -1.0 / r).unwrap();
    let s = b.overlap_radial();
    let dense = generalized_eigen_dense(&h, &s).unwrap().0;
    let si = lowest_eigenpairs(&h, &s, 4, 1e-11).unwrap();
    for j in 0..4 {
        assert!((si.values[j] - dense[j]).abs() < 1e-10, "{j}: {} vs {}", si.values[j], dense[j]);
        assert!((s_inner(&s, &si.vectors[j], &si.vectors[j]) - 1.0).abs() < 1e-12);
    }
    assert!((si.values[0] + 0.5).abs() < 1e-6);
}
