use hhg_core::quadrature::*;

#[test]
fn integrates_polynomials_exactly() {
    for n in 1..12 {
        let (x, w) = gauss_legendre(n);
        for deg in 0..2 * n {
            let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((s - exact).abs() < 1e-13, "n={n} deg={deg} {s} {exact}");
        }
    }
}

#[test]
fn cumulative_matrix_integrates_low_degree() {
    let n = 8;
    let (x, _) = gauss_legendre(n);
    let c = cumulative_integration_matrix(&x);
    for deg in 0..n {
        for i in 0..n {
            let s: f64 = (0..n).map(|j| c[i * n + j] * x[j].powi(deg as i32)).sum();
            let exact = (x[i].powi(deg as i32 + 1) - (-1.0f64).powi(deg as i32 + 1)) / (deg as f64 + 1.0);
            assert!((s - exact).abs() < 1e-13);
        }
    }
}
