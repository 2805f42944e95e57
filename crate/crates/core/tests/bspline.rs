use hhg_core::bspline::*;

fn uniform(order: usize, n: usize, r: f64) -> KnotSequence {
    KnotSequence::new(order, (0..=n).map(|i| r * i as f64 / n as f64).collect())
}

#[test]
fn partition_of_unity() {
    for k in [2, 4, 7, 9] {
        let ks = uniform(k, 13, 5.0);
        let mut v = vec![0.0; k];
        let mut d = vec![0.0; k];
        for s in 0..200 {
            let x = 5.0 * (s as f64 + 0.37) / 200.0;
            let i = ks.interval_of(x);
            ks.eval_local(i, x, &mut v, &mut d);
            let sum: f64 = v.iter().sum();
            let dsum: f64 = d.iter().sum();
            assert!((sum - 1.0).abs() < 1e-13, "k={k} x={x} sum={sum}");
            assert!(dsum.abs() < 1e-10, "derivative sum {dsum}");
            assert!(v.iter().all(|&b| b >= -1e-15));
        }
    }
}

#[test]
fn derivative_matches_finite_difference() {
    let ks = KnotSequence::new(7, vec![0.0, 0.1, 0.3, 0.7, 1.5, 2.0, 3.1, 4.0]);
    let mut v = vec![0.0; 7];
    let mut d = vec![0.0; 7];
    let h = 1e-6;
    for s in 1..100 {
        let x = 4.0 * s as f64 / 100.0;
        let i = ks.interval_of(x);
        ks.eval_local(i, x, &mut v, &mut d);
        for r in 0..7 {
            let j = i + r;
            let fd = (ks.eval(j, x + h) - ks.eval(j, x - h)) / (2.0 * h);
            // skip points straddling a breakpoint
            if ks.interval_of(x + h) == i && ks.interval_of(x - h) == i {
                assert!((fd - d[r]).abs() < 1e-6 * (1.0 + d[r].abs()), "j={j} x={x}");
            }
        }
    }
}

#[test]
fn only_end_splines_touch_the_boundary() {
    let ks = uniform(5, 6, 1.0);
    let n = ks.n_splines();
    assert!((ks.eval(0, 0.0) - 1.0).abs() < 1e-15);
    for j in 1..n {
        assert_eq!(ks.eval(j, 0.0), 0.0);
    }
    assert!((ks.eval(n - 1, 1.0) - 1.0).abs() < 1e-15);
    for j in 0..n - 1 {
        assert!(ks.eval(j, 1.0).abs() < 1e-15);
    }
}
