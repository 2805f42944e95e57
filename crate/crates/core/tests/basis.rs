use hhg_core::linalg::BandCholesky;
use hhg_core::basis::*;
use hhg_core::linalg::generalized_eigen_dense;

fn small_basis() -> SpectralBasis {
    build_basis(40.0, 60, 7, 3, KnotDistribution::default()).unwrap()
}

#[test]
fn batched_node_matrices_match_single() {
    let b = small_basis();
    let nodes = b.quadrature().nodes();
    let g1: Vec<f64> = nodes.iter().map(|r| (-r).exp()).collect();
    let g2: Vec<f64> = nodes.iter().map(|r| 1.0 / (1.0 + r)).collect();
    let both = b.radial_node_matrices(&[&g1, &g2]);
    for (m, g) in both.iter().zip([&g1, &g2]) {
        let single = b.radial_node_matrix(g);
        let diff = m.raw().iter().zip(single.raw()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-15, "{diff}");
    }
}

#[test]
fn rejects_infeasible_knots() {
    assert!(build_basis(10.0, 8, 7, 2, KnotDistribution::Linear).is_err());
    assert!(build_basis(-1.0, 40, 7, 2, KnotDistribution::Linear).is_err());
    assert!(build_basis(10.0, 40, 7, 0, KnotDistribution::Linear).is_err());
    assert!(build_basis(10.0, 9, 7, 2, KnotDistribution::Linear).is_ok());
}

#[test]
fn sinh_distribution_puts_a_third_of_knots_inside_ten() {
    let b = build_basis(120.0, 400, 7, 2, KnotDistribution::default()).unwrap();
    let bp = b.knots().breakpoints();
    let inside = bp.iter().filter(|&&r| r <= 10.0).count() as f64 / bp.len() as f64;
    assert!((inside - 1.0 / 3.0).abs() < 0.01, "{inside}");
    assert_eq!(bp[0], 0.0);
    assert_eq!(*bp.last().unwrap(), 120.0);
}

#[test]
fn overlap_is_banded_symmetric_and_positive_definite() {
    let b = small_basis();
    let s = b.overlap_radial();
    let k = b.order();
    for i in 0..s.dim() {
        assert!(s.get(i, i) > 0.0);
        for j in 0..s.dim() {
            if i.abs_diff(j) >= k {
                assert_eq!(s.get(i, j), 0.0);
            }
        }
    }
    assert!(s.asymmetry() < 1e-14);
    assert!(BandCholesky::new(&s).is_ok());
}

#[test]
fn overlap_quadrature_is_exact() {
    // raising the quadrature order must not change S (polynomial integrand)
    let a = build_basis(20.0, 30, 6, 1, KnotDistribution::default()).unwrap();
    let b = SpectralBasis::with_quadrature(20.0, 30, 6, 1, KnotDistribution::default(), 6).unwrap();
    let (sa, sb) = (a.overlap_radial(), b.overlap_radial());
    for i in 0..sa.dim() {
        for j in 0..sa.dim() {
            assert!((sa.get(i, j) - sb.get(i, j)).abs() < 1e-15);
        }
    }
}

fn lowest(basis: &SpectralBasis, l: usize, v: impl Fn(f64) -> f64) -> Vec<f64> {
    let h = radial_hamiltonian_block(basis, l, v).unwrap();
    generalized_eigen_dense(&h, &basis.overlap_radial()).unwrap().0
}

#[test]
fn hydrogen_levels() {
    let b = build_basis(60.0, 120, 7, 1, KnotDistribution::default()).unwrap();
    let e0 = lowest(&b, 0, |r| -1.0 / r);
    let e1 = lowest(&b, 1, |r| -1.0 / r);
    assert!((e0[0] + 0.5).abs() < 1e-6, "{}", e0[0]);
    assert!((e0[1] + 0.125).abs() < 1e-6, "{}", e0[1]);
    assert!((e1[0] + 0.125).abs() < 1e-6, "{}", e1[0]);
}

#[test]
fn free_block_is_positive_definite() {
    let b = small_basis();
    let h = radial_hamiltonian_block(&b, 0, |_| 0.0).unwrap();
    assert!(BandCholesky::new(&h).is_ok());
    let h2 = radial_hamiltonian_block(&b, 2, |_| 0.0).unwrap();
    assert!(BandCholesky::new(&h2).is_ok());
    assert!(radial_hamiltonian_block(&b, 4, |_| 0.0).is_err());
}

#[test]
fn dipole_selection_rule_and_hermiticity() {
    let b = small_basis();
    for g in [Gauge::Length, Gauge::Velocity] {
        let d = dipole_coupling(&b, g);
        for blk in d.blocks() {
            assert_eq!(blk.row_l.abs_diff(blk.col_l), 1);
        }
        assert!(d.block(0, 0).is_none() && d.block(0, 2).is_none());
        assert!(d.hermiticity_error() < 1e-12, "{g:?} {}", d.hermiticity_error());
        assert!(d.max_band_offset() < b.order());
    }
    assert!((cos_theta_coupling(0) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn operator_blob_roundtrip_and_rejects_garbage() {
    let b = small_basis();
    let d = dipole_coupling(&b, Gauge::Velocity);
    let bytes = d.to_bytes();
    assert_eq!(BandedBlockOperator::from_bytes(&bytes).unwrap(), d);
    assert!(BandedBlockOperator::from_bytes(&bytes[..bytes.len() - 3]).is_err());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(BandedBlockOperator::from_bytes(&bad).is_err());
}
