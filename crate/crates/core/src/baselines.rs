//! Elastic Net / Lasso by cyclic coordinate descent.
//!
//! Objective: `½‖Y − Xw‖² + (1/2γ)‖w‖² + λ₁‖w‖₁`. Passing `gamma = f64::INFINITY`
//! drops the ridge term and gives the plain Lasso.

use serde::{Deserialize, Serialize};

use crate::dataset::{dot, Dataset, Support};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    /// Strictly decreasing penalty levels.
    pub lambda_grid: Vec<f64>,
    /// Cap on full coordinate sweeps per grid point.
    pub max_iter: usize,
    /// Largest coordinate change tolerated at convergence.
    pub cd_tol: f64,
}

impl PathConfig {
    pub const DEFAULT_POINTS: usize = 100;
    pub const DEFAULT_RATIO: f64 = 1e-4;

    /// 100 log-spaced levels from `‖XᵀY‖∞` down to `1e-4 · ‖XᵀY‖∞`.
    pub fn default_for(ds: &Dataset) -> Self {
        Self::log_spaced(lambda_max(ds), Self::DEFAULT_RATIO, Self::DEFAULT_POINTS)
    }

    pub fn log_spaced(top: f64, ratio: f64, points: usize) -> Self {
        let grid = if top > 0.0 && points > 0 {
            let step = if points > 1 { ratio.ln() / (points - 1) as f64 } else { 0.0 };
            (0..points).map(|i| top * (step * i as f64).exp()).collect()
        } else {
            Vec::new()
        };
        PathConfig { lambda_grid: grid, max_iter: 10_000, cd_tol: 1e-9 }
    }

    fn validate(&self) -> Result<()> {
        if self.lambda_grid.is_empty() {
            return Err(Error::EmptyPath);
        }
        if self.lambda_grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidParameter("lambda grid must be positive and finite".into()));
        }
        if self.lambda_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter("lambda grid must be strictly decreasing".into()));
        }
        if self.cd_tol.is_nan() || self.cd_tol <= 0.0 {
            return Err(Error::InvalidParameter(format!("cd_tol must be positive, got {}", self.cd_tol)));
        }
        Ok(())
    }
}

/// `‖XᵀY‖∞`, the smallest penalty at which the Lasso solution is zero.
pub fn lambda_max(ds: &Dataset) -> f64 {
    let y = ds.y().as_slice();
    (0..ds.p()).map(|j| ds.col_dot(j, y).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnetFit {
    pub lambda1: f64,
    pub coefficients: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl EnetFit {
    pub fn support(&self) -> Support {
        Support::of_nonzeros(&self.coefficients)
    }
}

/// Value of the Elastic Net objective at `w`.
pub fn enet_objective(ds: &Dataset, gamma: f64, lambda1: f64, w: &[f64]) -> f64 {
    let mut r = ds.y().clone();
    for (j, &wj) in w.iter().enumerate() {
        if wj != 0.0 {
            for (ri, xij) in r.iter_mut().zip(ds.col(j)) {
                *ri -= xij * wj;
            }
        }
    }
    let sq: f64 = w.iter().map(|v| v * v).sum();
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    let ridge = if gamma.is_infinite() { 0.0 } else { sq / (2.0 * gamma) };
    0.5 * r.norm_squared() + ridge + lambda1 * l1
}

/// Coordinate descent from zero.
pub fn elastic_net_cd(ds: &Dataset, gamma: f64, lambda1: f64, max_iter: usize, cd_tol: f64) -> Result<EnetFit> {
    let mut cd = Cd::new(ds, gamma)?;
    if !(lambda1.is_finite() && lambda1 > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda1 must be positive, got {lambda1}")));
    }
    Ok(cd.fit(lambda1, max_iter, cd_tol))
}

/// Warm-started path over `path.lambda_grid`.
pub fn enet_path(ds: &Dataset, gamma: f64, path: &PathConfig) -> Result<Vec<EnetFit>> {
    path.validate()?;
    let mut cd = Cd::new(ds, gamma)?;
    Ok(path.lambda_grid.iter().map(|&l| cd.fit(l, path.max_iter, path.cd_tol)).collect())
}

/// Distinct supports met along the Lasso path, in path order.
pub fn lasso_path_supports(ds: &Dataset, path: &PathConfig) -> Result<Vec<Support>> {
    let mut out: Vec<Support> = Vec::new();
    for fit in enet_path(ds, f64::INFINITY, path)? {
        let s = fit.support();
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSparseFit {
    pub lambda1: f64,
    pub coefficients: Vec<f64>,
    /// False when no path point had exactly `k` nonzeros and the closest size was used.
    pub exact: bool,
}

impl KSparseFit {
    pub fn support(&self) -> Support {
        Support::of_nonzeros(&self.coefficients)
    }
}

/// Least regularized Lasso path point with exactly `k` nonzeros.
pub fn lasso_k_sparse(ds: &Dataset, k: usize, path: &PathConfig) -> Result<KSparseFit> {
    let fits = enet_path(ds, f64::INFINITY, path)?;
    let exact = fits.iter().rev().find(|f| f.support().len() == k);
    if let Some(f) = exact {
        return Ok(KSparseFit { lambda1: f.lambda1, coefficients: f.coefficients.clone(), exact: true });
    }
    // Closest size; the path runs from large to small penalty, so the first hit wins ties.
    let f = fits
        .iter()
        .min_by_key(|f| f.support().len().abs_diff(k))
        .ok_or(Error::EmptyPath)?;
    Ok(KSparseFit { lambda1: f.lambda1, coefficients: f.coefficients.clone(), exact: false })
}

struct Cd<'a> {
    ds: &'a Dataset,
    inv_gamma: f64,
    norms: Vec<f64>,
    w: Vec<f64>,
    r: Vec<f64>,
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

impl<'a> Cd<'a> {
    fn new(ds: &'a Dataset, gamma: f64) -> Result<Self> {
        if gamma.is_nan() || gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        let norms = (0..ds.p()).map(|j| dot(ds.col(j), ds.col(j))).collect();
        Ok(Cd {
            ds,
            inv_gamma: if gamma.is_infinite() { 0.0 } else { 1.0 / gamma },
            norms,
            w: vec![0.0; ds.p()],
            r: ds.y().as_slice().to_vec(),
        })
    }

    fn update(&mut self, j: usize, lambda1: f64) -> f64 {
        let denom = self.norms[j] + self.inv_gamma;
        let old = self.w[j];
        let new = if denom > 0.0 {
            let z = dot(self.ds.col(j), &self.r) + self.norms[j] * old;
            soft_threshold(z, lambda1) / denom
        } else {
            0.0
        };
        let delta = new - old;
        if delta != 0.0 {
            for (ri, xij) in self.r.iter_mut().zip(self.ds.col(j)) {
                *ri -= xij * delta;
            }
            self.w[j] = new;
        }
        delta.abs()
    }

    /// Full sweeps alternate with sweeps restricted to the active set.
    fn fit(&mut self, lambda1: f64, max_iter: usize, cd_tol: f64) -> EnetFit {
        let p = self.ds.p();
        let mut sweeps = 0;
        let mut converged = false;
        while sweeps < max_iter {
            sweeps += 1;
            let mut change = 0.0f64;
            for j in 0..p {
                change = change.max(self.update(j, lambda1));
            }
            if change <= cd_tol {
                converged = true;
                break;
            }
            let active: Vec<usize> = (0..p).filter(|&j| self.w[j] != 0.0).collect();
            while sweeps < max_iter {
                sweeps += 1;
                let mut change = 0.0f64;
                for &j in &active {
                    change = change.max(self.update(j, lambda1));
                }
                if change <= cd_tol {
                    break;
                }
            }
        }
        EnetFit { lambda1, coefficients: self.w.clone(), sweeps, converged }
    }
}
