#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sparsereg::Dataset;

/// Gaussian design; the response is a random sparse signal plus unit noise.
pub fn planted(n: usize, p: usize, k: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
    let mut w = DVector::zeros(p);
    for j in rand::seq::index::sample(&mut rng, p, k.min(p)) {
        w[j] = if rng.random::<bool>() { 1.0 } else { -1.0 } * rng.random_range(0.5..2.0);
    }
    let noise = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    Dataset::new(x.clone(), &x * w + noise).unwrap()
}

/// `min_w ½‖Y − X_s w‖² + ‖w‖²/(2γ)` from the normal equations.
pub fn primal_loss(ds: &Dataset, gamma: f64, idx: &[usize]) -> f64 {
    let y = ds.y();
    if idx.is_empty() {
        return 0.5 * y.norm_squared();
    }
    let xs = ds.x().select_columns(idx);
    let a = xs.transpose() * &xs + DMatrix::identity(idx.len(), idx.len()) / gamma;
    let w = a.cholesky().expect("positive definite").solve(&(xs.transpose() * y));
    0.5 * (y - &xs * &w).norm_squared() + w.norm_squared() / (2.0 * gamma)
}

/// Every subset of `0..p` with at most `k` elements.
pub fn subsets(p: usize, k: usize) -> Vec<Vec<usize>> {
    (0u64..1 << p)
        .filter(|m| m.count_ones() as usize <= k)
        .map(|m| (0..p).filter(|j| m & (1 << j) != 0).collect())
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
