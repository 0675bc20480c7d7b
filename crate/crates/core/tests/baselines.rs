mod common;

use nalgebra::{DMatrix, DVector};

use sparsereg::baselines::{elastic_net_cd, lasso_k_sparse, PathConfig};
use sparsereg::Dataset;

/// Minimum over a square grid of side `2·half` centred at `c`.
fn grid_min(obj: &dyn Fn(f64, f64) -> f64, c: (f64, f64), half: f64, step: f64) -> (f64, (f64, f64)) {
    let m = (half / step).round() as i64;
    let mut best = (f64::INFINITY, c);
    for i in -m..=m {
        let a = c.0 + i as f64 * step;
        for j in -m..=m {
            let b = c.1 + j as f64 * step;
            let v = obj(a, b);
            if v < best.0 {
                best = (v, (a, b));
            }
        }
    }
    best
}

#[test]
fn elastic_net_matches_grid_search() {
    for (seed, gamma, lambda1) in [(1u64, 1.0, 0.5), (2, 0.3, 0.1), (3, f64::INFINITY, 0.8)] {
        let ds = common::planted(5, 2, 2, seed);
        // ½‖Y − Xw‖² expanded through the Gram matrix.
        let g = ds.x().transpose() * ds.x();
        let c = ds.x().transpose() * ds.y();
        let yy = ds.y().norm_squared();
        let ridge = if gamma.is_finite() { 0.5 / gamma } else { 0.0 };
        let obj = |a: f64, b: f64| {
            0.5 * yy - c[0] * a - c[1] * b + 0.5 * (g[(0, 0)] * a * a + 2.0 * g[(0, 1)] * a * b + g[(1, 1)] * b * b)
                + ridge * (a * a + b * b)
                + lambda1 * (a.abs() + b.abs())
        };
        let fit = elastic_net_cd(&ds, gamma, lambda1, 100_000, 1e-12).unwrap();
        assert!(fit.converged);
        let w = &fit.coefficients;
        assert!(w.iter().all(|v| v.abs() < 3.0), "minimizer {w:?} outside the search box");

        // Resolution 1e-3 over the box, then a finer grid around the winner.
        let (_, coarse) = grid_min(&obj, (0.0, 0.0), 3.0, 1e-3);
        let (_, mid) = grid_min(&obj, coarse, 2e-3, 1e-5);
        let (grid, _) = grid_min(&obj, mid, 2e-5, 1e-7);
        let cd = obj(w[0], w[1]);
        assert!(cd <= grid + 1e-9, "cd {cd} above grid {grid}");
        assert!((cd - grid).abs() <= 1e-6, "cd {cd} vs grid {grid}");
    }
}

#[test]
fn orthogonal_design_picks_largest_correlations() {
    // Columns are orthonormal, so the lasso path enters them in order of |X_jᵀY|.
    let n = 8;
    let p = 6;
    let mut x = DMatrix::zeros(n, p);
    for j in 0..p {
        x[(j, j)] = 1.0;
    }
    let y = DVector::from_column_slice(&[0.3, -2.0, 1.1, 0.05, -0.7, 1.6, 0.4, -0.2]);
    let ds = Dataset::new(x, y).unwrap();
    let path = PathConfig::default_for(&ds);
    for (k, expect) in [(1, vec![1]), (2, vec![1, 5]), (3, vec![1, 2, 5]), (4, vec![1, 2, 4, 5])] {
        let fit = lasso_k_sparse(&ds, k, &path).unwrap();
        assert!(fit.exact);
        assert_eq!(fit.support().indices(), &expect[..]);
    }
}
