//! Synthetic instances with AR(1)-correlated Gaussian designs, and the
//! theoretical sample-size thresholds for support recovery.
//!
//! Randomness comes from a `ChaCha20Rng` seeded with `seed`; replication `r`
//! reads from stream `r` of that generator, so replications are independent
//! and can be generated in any order or on any thread.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Support};
use crate::error::{Error, Result};
use crate::features::{lifted_index, Transform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub rho: f64,
    pub snr_sqrt: f64,
    pub seed: u64,
    /// Replication index; selects the generator stream.
    #[serde(default)]
    pub replication: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidParameter("n and p must be positive".into()));
        }
        if self.k == 0 || self.k > self.p {
            return Err(Error::InvalidParameter(format!("k must lie in 1..={}, got {}", self.p, self.k)));
        }
        check_design(self.rho, self.snr_sqrt)
    }
}

fn check_design(rho: f64, snr_sqrt: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho must lie in [0, 1), got {rho}")));
    }
    if !(snr_sqrt.is_finite() && snr_sqrt > 0.0) {
        return Err(Error::InvalidParameter(format!("snr_sqrt must be positive, got {snr_sqrt}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub dataset: Dataset,
    /// Entries are ±1 on the support and 0 elsewhere.
    pub w_true: Vec<f64>,
    pub support_true: Support,
    /// Realized noise variance `‖E‖²/n`.
    pub sigma2_effective: f64,
}

fn rng_for(seed: u64, replication: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Rows drawn in order; within a row `x₁ = z₁`, `x_j = ρ x_{j−1} + √(1−ρ²) z_j`.
fn ar1_design(rng: &mut ChaCha20Rng, n: usize, p: usize, rho: f64) -> DMatrix<f64> {
    let scale = (1.0 - rho * rho).sqrt();
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let mut prev = 0.0;
        for j in 0..p {
            let z: f64 = StandardNormal.sample(rng);
            let v = if j == 0 { z } else { rho * prev + scale * z };
            x[(i, j)] = v;
            prev = v;
        }
    }
    x
}

/// Adds noise scaled so that `‖signal‖ / ‖noise‖ = snr_sqrt`; returns `(Y, ‖E‖²/n)`.
fn add_noise(rng: &mut ChaCha20Rng, signal: &DVector<f64>, snr_sqrt: f64) -> (DVector<f64>, f64) {
    let n = signal.len();
    let s_norm = signal.norm();
    if s_norm == 0.0 {
        return (signal.clone(), 0.0);
    }
    loop {
        let e = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let e_norm: f64 = e.norm();
        if e_norm > 0.0 {
            let e = e * (s_norm / (snr_sqrt * e_norm));
            let sigma2 = e.norm_squared() / n as f64;
            return (signal + e, sigma2);
        }
    }
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticInstance> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed, spec.replication);
    let x = ar1_design(&mut rng, spec.n, spec.p, spec.rho);
    let support = Support::new(index::sample(&mut rng, spec.p, spec.k).into_vec(), spec.p)?;
    let mut w = vec![0.0; spec.p];
    for &j in support.indices() {
        w[j] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    let signal = &x * DVector::from_column_slice(&w);
    let (y, sigma2) = add_noise(&mut rng, &signal, spec.snr_sqrt);
    Ok(SyntheticInstance { dataset: Dataset::new(x, y)?, w_true: w, support_true: support, sigma2_effective: sigma2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Sample size above which exact recovery is information-theoretically possible.
    pub n0: f64,
    /// Sample size above which the Lasso recovers the support.
    pub n1: f64,
}

/// `n₁ = (2k + σ²) log(p − k)` and `n₀ = 2k log p / log(2k/σ² + 1)`.
pub fn theoretical_thresholds(k: usize, p: usize, sigma2: f64) -> Result<Thresholds> {
    if k == 0 || p <= k {
        return Err(Error::InvalidParameter(format!("need 1 <= k < p, got k={k}, p={p}")));
    }
    if sigma2.is_nan() || sigma2 < 0.0 || sigma2.is_infinite() {
        return Err(Error::InvalidParameter(format!("sigma2 must be finite and nonnegative, got {sigma2}")));
    }
    let kf = k as f64;
    let n1 = (2.0 * kf + sigma2) * ((p - k) as f64).ln();
    let n0 = if sigma2 == 0.0 { 0.0 } else { 2.0 * kf * (p as f64).ln() / (2.0 * kf / sigma2).ln_1p() };
    Ok(Thresholds { n0, n1 })
}

/// Instances of `Y = 3√|X₄| − 2X₂² + 4 tanh(2X₃) + 3 cos(2πX₂) − 2X₁ + a X₁X₂ + E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearSpec {
    pub n: usize,
    /// Number of raw regressors, at least 4.
    pub p: usize,
    pub rho: f64,
    pub snr_sqrt: f64,
    pub a: f64,
    pub seed: u64,
    #[serde(default)]
    pub replication: u64,
}

#[derive(Debug, Clone)]
pub struct NonlinearInstance {
    /// Raw regressors; lift with [`crate::features::expand_features`].
    pub dataset: Dataset,
    /// Lifted columns that appear verbatim in the model.
    pub representable_support: Support,
    pub sigma2_effective: f64,
}

pub fn generate_nonlinear(spec: &NonlinearSpec) -> Result<NonlinearInstance> {
    if spec.n == 0 || spec.p < 4 {
        return Err(Error::InvalidParameter(format!("need n >= 1 and p >= 4, got n={}, p={}", spec.n, spec.p)));
    }
    check_design(spec.rho, spec.snr_sqrt)?;
    let mut rng = rng_for(spec.seed, spec.replication);
    let x = ar1_design(&mut rng, spec.n, spec.p, spec.rho);
    let signal = DVector::from_fn(spec.n, |i, _| {
        let (x1, x2, x3, x4) = (x[(i, 0)], x[(i, 1)], x[(i, 2)], x[(i, 3)]);
        3.0 * x4.abs().sqrt() - 2.0 * x2 * x2 + 4.0 * (2.0 * x3).tanh() + 3.0 * (2.0 * std::f64::consts::PI * x2).cos()
            - 2.0 * x1
            + spec.a * x1 * x2
    });
    let (y, sigma2) = add_noise(&mut rng, &signal, spec.snr_sqrt);
    let lifted = vec![
        lifted_index(0, Transform::Identity),
        lifted_index(1, Transform::Square),
        lifted_index(2, Transform::Tanh2),
        lifted_index(3, Transform::SqrtAbs),
    ];
    Ok(NonlinearInstance {
        dataset: Dataset::new(x, y)?,
        representable_support: Support::new(lifted, 8 * spec.p)?,
        sigma2_effective: sigma2,
    })
}
