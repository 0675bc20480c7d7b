//! Support-recovery scores and cross-validated choice of `k` and `gamma`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Support};
use crate::error::{Error, Result};
use crate::master::{CutPool, Status};
use crate::par::Exec;
use crate::solver::{solve_cardinality_with_pool, SolveConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryScore {
    /// `100 |found ∩ truth| / k_true`.
    pub accuracy_pct: f64,
    /// `100 |found ∖ truth| / |found|`, zero when nothing was selected.
    pub false_alarm_pct: f64,
}

pub fn support_metrics(found: &Support, truth: &Support, k_true: usize) -> Result<RecoveryScore> {
    if k_true == 0 {
        return Err(Error::InvalidParameter("k_true must be at least 1".into()));
    }
    if found.is_empty() {
        return Ok(RecoveryScore { accuracy_pct: 0.0, false_alarm_pct: 0.0 });
    }
    let hits = found.indices().iter().filter(|j| truth.contains(**j)).count();
    let misses = found.len() - hits;
    Ok(RecoveryScore {
        accuracy_pct: 100.0 * hits as f64 / k_true as f64,
        false_alarm_pct: 100.0 * misses as f64 / found.len() as f64,
    })
}

/// `‖Y − Xw‖² / n`.
pub fn prediction_mse(ds: &Dataset, w: &[f64]) -> f64 {
    let mut r = ds.y().clone();
    for (j, &wj) in w.iter().enumerate() {
        if wj != 0.0 {
            for (ri, xij) in r.iter_mut().zip(ds.col(j)) {
                *ri -= xij * wj;
            }
        }
    }
    r.norm_squared() / ds.n() as f64
}

/// `{0.01, 0.1, 1, 10} / √n`.
pub fn default_gamma_grid(n: usize) -> Vec<f64> {
    let s = (n as f64).sqrt();
    [0.01, 0.1, 1.0, 10.0].iter().map(|g| g / s).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    /// Seed of the row shuffle that precedes the contiguous fold split.
    pub seed: u64,
    pub solver: SolveConfig,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions { folds: 5, seed: 0, solver: SolveConfig::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvCell {
    pub gamma: f64,
    pub k: usize,
    pub mean_error: f64,
    pub fold_errors: Vec<f64>,
    /// Some fold hit its solver limit; its incumbent was scored.
    pub timed_out: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvResult {
    pub k: usize,
    pub gamma: f64,
    pub cells: Vec<CvCell>,
}

/// Row indices of each validation fold.
pub fn fold_indices(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        out.push(perm[start..start + len].to_vec());
        start += len;
    }
    out
}

/// Grid search over `gamma × k` by `folds`-fold cross-validation.
///
/// Within one `(gamma, fold)` job the cut pool is shared across `k`. The
/// minimizer of the mean validation error wins; ties go to the smallest `k`,
/// then the largest `gamma`.
pub fn cross_validate_k(ds: &Dataset, gamma_grid: &[f64], k_range: (usize, usize), opts: &CvOptions, exec: Exec) -> Result<CvResult> {
    let (k_min, k_max) = k_range;
    if k_min == 0 || k_min > k_max || k_max > ds.p() {
        return Err(Error::InvalidParameter(format!("k range {k_min}..={k_max} must lie in 1..={}", ds.p())));
    }
    if opts.folds < 2 || opts.folds > ds.n() {
        return Err(Error::InvalidParameter(format!("folds must lie in 2..={}, got {}", ds.n(), opts.folds)));
    }
    if gamma_grid.is_empty() {
        return Err(Error::InvalidParameter("gamma grid is empty".into()));
    }
    let folds = fold_indices(ds.n(), opts.folds, opts.seed);
    let splits: Vec<(Dataset, Dataset)> = folds
        .iter()
        .map(|val| {
            let mut is_val = vec![false; ds.n()];
            for &i in val {
                is_val[i] = true;
            }
            let train: Vec<usize> = (0..ds.n()).filter(|&i| !is_val[i]).collect();
            (ds.select_rows(&train), ds.select_rows(val))
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..gamma_grid.len()).flat_map(|g| (0..folds.len()).map(move |f| (g, f))).collect();
    let results: Vec<Result<Vec<(f64, bool)>>> = exec.map_slice(&jobs, |&(g, f)| {
        let (train, val) = &splits[f];
        let mut pool = CutPool::new(ds.p());
        (k_min..=k_max)
            .map(|k| {
                let res = solve_cardinality_with_pool(train, gamma_grid[g], k, &opts.solver, &mut pool)?;
                Ok((prediction_mse(val, &res.coefficients), res.status != Status::Optimal))
            })
            .collect()
    });

    let mut per_job = Vec::with_capacity(jobs.len());
    for r in results {
        per_job.push(r?);
    }
    let mut cells = Vec::new();
    for (g, &gamma) in gamma_grid.iter().enumerate() {
        for (ki, k) in (k_min..=k_max).enumerate() {
            let outcomes: Vec<(f64, bool)> = (0..folds.len()).map(|f| per_job[g * folds.len() + f][ki]).collect();
            let fold_errors: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
            cells.push(CvCell {
                gamma,
                k,
                mean_error: fold_errors.iter().sum::<f64>() / fold_errors.len() as f64,
                fold_errors,
                timed_out: outcomes.iter().any(|o| o.1),
            });
        }
    }
    let best = cells
        .iter()
        .min_by(|a, b| {
            a.mean_error
                .total_cmp(&b.mean_error)
                .then(a.k.cmp(&b.k))
                .then(b.gamma.total_cmp(&a.gamma))
        })
        .expect("grid is nonempty");
    Ok(CvResult { k: best.k, gamma: best.gamma, cells })
}
