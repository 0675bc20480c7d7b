//! The regression loss `c(s)` over supports, its gradient, and the dual vector.
//!
//! `c(s) = ½ Yᵀ(I + γ Σ_j s_j X_j X_jᵀ)⁻¹ Y` is the optimal value of ridge
//! regression restricted to the columns selected by `s`. The fast path goes
//! through the k x k capacitance matrix `I/γ + X_sᵀX_s`; the rank-one micro
//! kernels `X_j X_jᵀ` are never formed, only the products `X_jᵀα`.

use nalgebra::{DMatrix, DVector};

use crate::dataset::{dot, Dataset, Support};
use crate::error::{Error, Result};
use crate::linalg::{count_supports, for_each_combination, spd_solve};
use crate::par::Exec;

/// Largest number of supports the brute-force oracles will visit.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// Loss, gradient and dual vector at a binary support.
#[derive(Debug, Clone)]
pub struct LossEval {
    /// `c(s) ≥ 0`.
    pub c: f64,
    /// `∇c(s)_j = −(γ/2)(X_jᵀα)²`, all entries ≤ 0.
    pub grad: Vec<f64>,
    /// `α = (I + γ X_s X_sᵀ)⁻¹ Y`.
    pub alpha: Vec<f64>,
    /// Ridge refit on the support, in support order.
    pub weights: Vec<f64>,
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive and finite, got {gamma}")));
    }
    Ok(())
}

/// Dense O(n³) evaluation of the relaxed loss at `s ∈ [0,1]^p`.
pub fn ridge_loss_dense(ds: &Dataset, gamma: f64, s: &[f64]) -> Result<f64> {
    let alpha = dense_alpha(ds, gamma, s)?;
    Ok(0.5 * ds.y().dot(&alpha))
}

/// Dense `α = (I + γ Σ s_j K_j)⁻¹ Y` for a relaxed selection.
pub fn dense_alpha(ds: &Dataset, gamma: f64, s: &[f64]) -> Result<DVector<f64>> {
    check_gamma(gamma)?;
    if s.len() != ds.p() {
        return Err(Error::Dimension(format!("selection has {} entries, expected {}", s.len(), ds.p())));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("selection"));
    }
    if s.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidParameter("selection entries must lie in [0, 1]".into()));
    }
    let n = ds.n();
    let x = ds.x();
    let mut scaled = x.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= gamma * s[j];
    }
    let m = DMatrix::identity(n, n) + &scaled * x.transpose();
    spd_solve(m, ds.y(), "regularized kernel matrix")
}

/// Returns `(α, w_s)`. Goes through the k x k capacitance matrix unless the
/// support is wider than the sample count, where the n x n kernel system is
/// the smaller one.
pub(crate) fn alpha_on_support(ds: &Dataset, gamma: f64, support: &Support) -> Result<(Vec<f64>, Vec<f64>)> {
    let idx = support.indices();
    let k = idx.len();
    let y = ds.y().as_slice();
    if k == 0 {
        return Ok((y.to_vec(), Vec::new()));
    }
    if let Some(&j) = idx.last() {
        if j >= ds.p() {
            return Err(Error::Dimension(format!("support index {} exceeds p = {}", j + 1, ds.p())));
        }
    }
    if k > ds.n() {
        return alpha_via_kernel(ds, gamma, idx);
    }
    let mut cap = DMatrix::zeros(k, k);
    let mut rhs = DVector::zeros(k);
    for (a, &ja) in idx.iter().enumerate() {
        let ca = ds.col(ja);
        rhs[a] = dot(ca, y);
        for (b, &jb) in idx.iter().enumerate().take(a + 1) {
            let v = dot(ca, ds.col(jb));
            cap[(a, b)] = v;
            cap[(b, a)] = v;
        }
        cap[(a, a)] += 1.0 / gamma;
    }
    let w = spd_solve(cap, &rhs, "capacitance matrix")?;
    let mut alpha = y.to_vec();
    for (a, &j) in idx.iter().enumerate() {
        let wa = w[a];
        for (ai, xi) in alpha.iter_mut().zip(ds.col(j)) {
            *ai -= wa * xi;
        }
    }
    Ok((alpha, w.as_slice().to_vec()))
}

fn alpha_via_kernel(ds: &Dataset, gamma: f64, idx: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = ds.n();
    let mut m = DMatrix::identity(n, n);
    for &j in idx {
        let col = DVector::from_column_slice(ds.col(j));
        m.ger(gamma, &col, &col, 1.0);
    }
    let alpha = spd_solve(m, ds.y(), "regularized kernel matrix")?;
    // w_s = γ X_sᵀ α for the ridge refit.
    let weights = idx.iter().map(|&j| gamma * ds.col_dot(j, alpha.as_slice())).collect();
    Ok((alpha.as_slice().to_vec(), weights))
}

/// `c(s)` only, skipping the O(np) gradient.
pub fn loss(ds: &Dataset, gamma: f64, support: &Support) -> Result<f64> {
    check_gamma(gamma)?;
    let (alpha, _) = alpha_on_support(ds, gamma, support)?;
    Ok(0.5 * dot(ds.y().as_slice(), &alpha))
}

/// Loss, full gradient and dual vector at a binary support.
pub fn loss_and_gradient(ds: &Dataset, gamma: f64, support: &Support) -> Result<LossEval> {
    loss_and_gradient_with(ds, gamma, support, Exec::default())
}

pub fn loss_and_gradient_with(ds: &Dataset, gamma: f64, support: &Support, exec: Exec) -> Result<LossEval> {
    check_gamma(gamma)?;
    let (alpha, weights) = alpha_on_support(ds, gamma, support)?;
    let c = 0.5 * dot(ds.y().as_slice(), &alpha);
    let grad = gradient_at(ds, gamma, &alpha, exec);
    Ok(LossEval { c, grad, alpha, weights })
}

/// `−(γ/2)(X_jᵀα)²` for every column.
pub fn gradient_at(ds: &Dataset, gamma: f64, alpha: &[f64], exec: Exec) -> Vec<f64> {
    let mut grad = vec![0.0; ds.p()];
    let half_gamma = 0.5 * gamma;
    exec.fill(&mut grad, |j| {
        let v = ds.col_dot(j, alpha);
        -half_gamma * v * v
    });
    grad
}

/// Ridge dual objective `−(γ/2)αᵀKα − ½αᵀα + Yᵀα` with `K = Σ_{j∈s} X_j X_jᵀ`.
pub fn ridge_dual_objective(ds: &Dataset, gamma: f64, support: &Support, alpha: &[f64]) -> f64 {
    let quad: f64 = support
        .indices()
        .iter()
        .map(|&j| {
            let v = ds.col_dot(j, alpha);
            v * v
        })
        .sum();
    -0.5 * gamma * quad - 0.5 * dot(alpha, alpha) + dot(ds.y().as_slice(), alpha)
}

fn enumeration_guard(p: usize, k: usize, count: u128) -> Result<()> {
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge { p, k, count, limit: ENUMERATION_LIMIT });
    }
    Ok(())
}

/// Brute force over every support of size ≤ k. Ties go to the
/// lexicographically smallest index list.
pub fn enumerate_optimal(ds: &Dataset, gamma: f64, k: usize) -> Result<(Support, f64)> {
    check_gamma(gamma)?;
    let p = ds.p();
    let k = k.min(p);
    enumeration_guard(p, k, count_supports(p, k))?;
    best_over_sizes(ds, gamma, p, 0..=k, |_| 0.0)
}

/// Brute force over all `2^p` supports of `c(s) + λ|s|`.
pub fn enumerate_penalized(ds: &Dataset, gamma: f64, lambda0: f64) -> Result<(Support, f64)> {
    check_gamma(gamma)?;
    if !(lambda0.is_finite() && lambda0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda0 must be nonnegative, got {lambda0}")));
    }
    let p = ds.p();
    enumeration_guard(p, p, count_supports(p, p))?;
    best_over_sizes(ds, gamma, p, 0..=p, |size| lambda0 * size as f64)
}

fn best_over_sizes(
    ds: &Dataset,
    gamma: f64,
    p: usize,
    sizes: std::ops::RangeInclusive<usize>,
    penalty: impl Fn(usize) -> f64,
) -> Result<(Support, f64)> {
    let mut best: Option<(Support, f64)> = None;
    let mut failure = None;
    for size in sizes {
        let extra = penalty(size);
        for_each_combination(p, size, |idx| {
            if failure.is_some() {
                return;
            }
            let s = Support::from_sorted_unchecked(idx.to_vec());
            match loss(ds, gamma, &s) {
                Ok(c) => {
                    let v = c + extra;
                    let better = match &best {
                        None => true,
                        Some((bs, bv)) => v < *bv || (v == *bv && s < *bs),
                    };
                    if better {
                        best = Some((s, v));
                    }
                }
                Err(e) => failure = Some(e),
            }
        });
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(best.expect("at least the empty support is visited"))
}
