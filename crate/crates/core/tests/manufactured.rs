mod common;

use common::manufactured::*;

#[test]
fn stream_function_data_is_consistent() {
    // Divergence-free velocity and gradient matching central differences.
    let h = 1e-6;
    for x in [[0.3, 0.7], [0.12, 0.45], [0.81, 0.26]] {
        let g = stream_gradient(x);
        assert!((g[0][0] + g[1][1]).abs() < 1e-12);
        for d in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[d] += h;
            xm[d] -= h;
            let (up, um) = (stream_velocity(xp), stream_velocity(xm));
            for c in 0..2 {
                assert!(((up[c] - um[c]) / (2.0 * h) - g[c][d]).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn bdf2_is_second_order_in_time() {
    let errors: Vec<f64> = [10, 20, 40]
        .iter()
        .map(|&n| temporal_error(2, n, 1.0))
        .collect();
    for r in rates(&errors) {
        assert!((r - 2.0).abs() <= 0.2, "{errors:?}");
    }
}

#[test]
fn bdf1_is_first_order_in_time() {
    let errors: Vec<f64> = [10, 20, 40]
        .iter()
        .map(|&n| temporal_error(1, n, 1.0))
        .collect();
    for r in rates(&errors) {
        assert!((r - 1.0).abs() <= 0.2, "{errors:?}");
    }
}

#[test]
fn taylor_hood_velocity_is_third_order_in_space() {
    let errors: Vec<f64> = [8, 16, 32].iter().map(|&n| spatial_error(n)).collect();
    for r in rates(&errors) {
        assert!((r - 3.0).abs() <= 0.3, "{errors:?}");
    }
}
