//! Outer-approximation driver: warm start, cut loop, certificate, refit.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::baselines::{lasso_path_supports, lasso_k_sparse, PathConfig};
use crate::dataset::{Dataset, Support};
use crate::error::{Error, Result};
use crate::master::{solve_master, solve_master_relaxed, CutPool, Limits, MasterOptions, Node, NodeRelaxation, RelaxedBound, Status, TreeMode};
use crate::oracle::{check_gamma, loss_and_gradient_with, LossEval};
use crate::par::Exec;
use crate::warmstart::{solve_relaxation, solve_relaxation_fixed, spectral_norm_sq, warm_start_support, Fixings, RelaxationOptions};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmStart {
    DualRelaxation,
    Lasso,
    Given(Support),
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Relative tolerance; the absolute gap allowed is `tol · (1 + ½‖Y‖²)`.
    pub tol: f64,
    /// Wall-clock cap in seconds.
    pub time_limit: f64,
    pub max_cuts: Option<usize>,
    /// Deterministic work cap on branch-and-bound nodes (summed over master solves).
    pub max_nodes: Option<u64>,
    pub mode: TreeMode,
    pub warm_start: WarmStart,
    pub relaxation_iterations: usize,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol: 1e-6,
            time_limit: 60.0,
            max_cuts: None,
            max_nodes: None,
            mode: TreeMode::SingleTree,
            warm_start: WarmStart::DualRelaxation,
            relaxation_iterations: 500,
            exec: Exec::default(),
        }
    }
}

impl SolveConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.time_limit.is_nan() || self.time_limit <= 0.0 {
            return Err(Error::InvalidParameter(format!("time limit must be positive, got {}", self.time_limit)));
        }
        Ok(())
    }
}

/// One outer iteration of the multi-tree loop: master value and true loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutIteration {
    pub eta: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub support: Support,
    /// Length p, zero off the support.
    pub coefficients: Vec<f64>,
    /// `c(support)` plus `λ|support|` in penalized mode.
    pub objective: f64,
    pub lower_bound: f64,
    /// Cuts generated by this solve.
    pub cuts: usize,
    pub nodes: u64,
    pub wall_time: f64,
    pub status: Status,
    /// Populated in multi-tree mode.
    pub iterations: Vec<CutIteration>,
}

impl SolveResult {
    pub fn gap(&self) -> f64 {
        self.objective - self.lower_bound
    }
}

/// Global minimizer of ridge regression with at most `k` nonzeros.
pub fn solve_cardinality(ds: &Dataset, gamma: f64, k: usize, config: &SolveConfig) -> Result<SolveResult> {
    let mut pool = CutPool::new(ds.p());
    solve_cardinality_with_pool(ds, gamma, k, config, &mut pool)
}

/// As [`solve_cardinality`], reusing and extending an existing cut pool.
/// Cuts do not depend on `k`, so a pool built for one budget stays valid for
/// another on the same data and `gamma`.
pub fn solve_cardinality_with_pool(ds: &Dataset, gamma: f64, k: usize, config: &SolveConfig, pool: &mut CutPool) -> Result<SolveResult> {
    if k == 0 || k > ds.p() {
        return Err(Error::InvalidParameter(format!("k must lie in 1..={}, got {k}", ds.p())));
    }
    solve(ds, gamma, k, 0.0, config, pool)
}

/// Global minimizer of `c(s) + λ|s|` over all supports.
pub fn solve_penalized(ds: &Dataset, gamma: f64, lambda0: f64, config: &SolveConfig) -> Result<SolveResult> {
    if !(lambda0.is_finite() && lambda0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda0 must be nonnegative, got {lambda0}")));
    }
    let mut pool = CutPool::new(ds.p());
    solve(ds, gamma, ds.p(), lambda0, config, &mut pool)
}

fn solve(ds: &Dataset, gamma: f64, k: usize, penalty: f64, config: &SolveConfig, pool: &mut CutPool) -> Result<SolveResult> {
    check_gamma(gamma)?;
    config.validate()?;
    if pool.p() != ds.p() {
        return Err(Error::Dimension(format!("cut pool is over {} columns, data has {}", pool.p(), ds.p())));
    }
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(config.time_limit);
    let tol = config.tol * (1.0 + ds.half_y_norm_sq());
    let cuts_before = pool.len();

    if ds.y().iter().all(|v| *v == 0.0) {
        return Ok(SolveResult {
            support: Support::empty(),
            coefficients: vec![0.0; ds.p()],
            objective: 0.0,
            lower_bound: 0.0,
            cuts: 0,
            nodes: 0,
            wall_time: start.elapsed().as_secs_f64(),
            status: Status::Optimal,
            iterations: Vec::new(),
        });
    }

    let exec = config.exec;
    let mut oracle = |s: &Support| loss_and_gradient_with(ds, gamma, s, exec);
    let value_of = |s: &Support, c: f64| c + penalty * s.len() as f64;

    let (first, mut lower, root_primal) = initial_support(ds, gamma, k, penalty, config)?;
    let mut best = match pool.get(&first) {
        Some(cut) => (first.clone(), value_of(&first, cut.value)),
        None => {
            let ev = oracle(&first)?;
            pool.add_cut(&ev, first.clone());
            (first.clone(), value_of(&first, ev.c))
        }
    };
    // Anchors carried over in a reused pool are feasible points too.
    for cut in pool.cuts() {
        if cut.anchor.len() <= k {
            let v = value_of(&cut.anchor, cut.value);
            if v < best.1 || (v == best.1 && cut.anchor < best.0) {
                best = (cut.anchor.clone(), v);
            }
        }
    }

    let mut nodes = 0u64;
    let mut iterations = Vec::new();
    let mut status = Status::Optimal;
    let base = MasterOptions { tol, penalty, ..Default::default() };

    if best.1 - lower > tol {
        match config.mode {
            TreeMode::SingleTree => {
                let opts = MasterOptions {
                    limits: Limits { deadline: Some(deadline), max_nodes: config.max_nodes, max_cuts: config.max_cuts },
                    ..base
                };
                let mut relaxation = RidgeRelaxation { ds, gamma, penalty, root: root_primal, lipschitz: spectral_norm_sq(ds) };
                let sol = solve_master_relaxed(pool, k, Some(best.clone()), &mut oracle, &mut relaxation, &opts)?;
                nodes = sol.nodes_explored;
                if sol.value < best.1 || (sol.value == best.1 && sol.s < best.0) {
                    best = (sol.s.clone(), sol.value);
                }
                lower = lower.max(sol.lower_bound);
                status = sol.status;
            }
            TreeMode::MultiTree => loop {
                let remaining = config.max_nodes.map(|m| m.saturating_sub(nodes));
                if remaining == Some(0) || Instant::now() >= deadline || config.max_cuts.is_some_and(|m| pool.len() >= m) {
                    status = Status::TimeLimit;
                    break;
                }
                let opts = MasterOptions {
                    limits: Limits { deadline: Some(deadline), max_nodes: remaining, max_cuts: None },
                    ..base.clone()
                };
                let sol = solve_master(pool, k, Some(best.clone()), &mut oracle, TreeMode::MultiTree, &opts)?;
                nodes += sol.nodes_explored;
                lower = lower.max(sol.lower_bound);
                if sol.status == Status::TimeLimit {
                    status = Status::TimeLimit;
                    break;
                }
                let true_value = match pool.get(&sol.s) {
                    Some(cut) => value_of(&sol.s, cut.value),
                    None => {
                        let ev = oracle(&sol.s)?;
                        pool.add_cut(&ev, sol.s.clone());
                        value_of(&sol.s, ev.c)
                    }
                };
                iterations.push(CutIteration { eta: sol.eta, loss: true_value });
                if true_value < best.1 || (true_value == best.1 && sol.s < best.0) {
                    best = (sol.s.clone(), true_value);
                }
                if sol.eta >= true_value - tol || best.1 - lower <= tol {
                    break;
                }
            },
        }
    }

    lower = lower.min(best.1);
    if status == Status::Optimal && best.1 - lower > tol {
        status = Status::TimeLimit;
    }
    let (support, _) = best;
    let eval: LossEval = oracle(&support)?;
    let mut coefficients = vec![0.0; ds.p()];
    for (&j, &w) in support.indices().iter().zip(&eval.weights) {
        coefficients[j] = w;
    }
    let objective = value_of(&support, eval.c);
    Ok(SolveResult {
        support,
        coefficients,
        objective,
        lower_bound: lower.min(objective),
        cuts: pool.len() - cuts_before,
        nodes,
        wall_time: start.elapsed().as_secs_f64(),
        status,
        iterations,
    })
}

/// Node bounds from the dual relaxation restricted to the node's fixings.
struct RidgeRelaxation<'a> {
    ds: &'a Dataset,
    gamma: f64,
    penalty: f64,
    /// Primal iterate of the root relaxation, if one was computed.
    root: Option<Vec<f64>>,
    lipschitz: f64,
}

impl NodeRelaxation for RidgeRelaxation<'_> {
    fn bound(&mut self, node: &Node, k: usize, warm: Option<&[f64]>, stop_at: f64) -> Result<RelaxedBound> {
        let fix = Fixings { one: node.fixed_one.clone(), zero: node.fixed_zero.clone() };
        let opts = RelaxationOptions { iterations: 30, patience: 8, lipschitz: Some(self.lipschitz), ..Default::default() };
        let start = warm.or(self.root.as_deref());
        let r = solve_relaxation_fixed(self.ds, self.gamma, k, self.penalty, &fix, start, &opts, stop_at)?;
        Ok(RelaxedBound { bound: r.lower_bound, state: r.primal, candidate: r.active })
    }
}

/// Returns the first support, a lower bound on the optimum and the root primal iterate.
fn initial_support(ds: &Dataset, gamma: f64, k: usize, penalty: f64, config: &SolveConfig) -> Result<(Support, f64, Option<Vec<f64>>)> {
    match &config.warm_start {
        WarmStart::DualRelaxation => {
            let opts = RelaxationOptions { iterations: config.relaxation_iterations.max(1), ..Default::default() };
            let relax = solve_relaxation(ds, gamma, k, penalty, &opts)?;
            let support = if penalty == 0.0 { warm_start_support(&relax.alpha, ds, k)? } else { relax.active };
            Ok((support, relax.lower_bound.max(0.0), Some(relax.primal)))
        }
        WarmStart::Lasso => {
            let path = PathConfig::default_for(ds);
            if penalty == 0.0 {
                let fit = lasso_k_sparse(ds, k, &path)?;
                Ok((Support::of_nonzeros(&fit.coefficients), 0.0, None))
            } else {
                // Best penalized value among the distinct supports on the path.
                let mut best = (Support::empty(), ds.half_y_norm_sq());
                for s in lasso_path_supports(ds, &path)? {
                    let v = crate::oracle::loss(ds, gamma, &s)? + penalty * s.len() as f64;
                    if v < best.1 {
                        best = (s, v);
                    }
                }
                Ok((best.0, 0.0, None))
            }
        }
        WarmStart::Given(s) => {
            if s.len() > k || s.indices().last().is_some_and(|&j| j >= ds.p()) {
                return Err(Error::InvalidParameter(format!("warm start {s} is not feasible")));
            }
            Ok((s.clone(), 0.0, None))
        }
        WarmStart::None => Ok((Support::empty(), 0.0, None)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate_optimal, enumerate_penalized, loss};
    use crate::test_util::random_dataset;
    use nalgebra::DVector;

    fn tight() -> SolveConfig {
        SolveConfig { tol: 1e-10, ..Default::default() }
    }

    fn primal(ds: &Dataset, gamma: f64, w: &[f64]) -> f64 {
        let wv = DVector::from_column_slice(w);
        let r = ds.y() - ds.x() * &wv;
        wv.norm_squared() / (2.0 * gamma) + 0.5 * r.norm_squared()
    }

    #[test]
    fn full_budget_takes_every_column() {
        let ds = random_dataset(15, 4, 1);
        let res = solve_cardinality(&ds, 1.0, 4, &tight()).unwrap();
        let full = loss(&ds, 1.0, &Support::full(4)).unwrap();
        assert!((res.objective - full).abs() <= 1e-10 * full);
        assert_eq!(res.status, Status::Optimal);
    }

    #[test]
    fn zero_response_is_empty_model() {
        let ds = random_dataset(6, 5, 2).with_response(DVector::zeros(6)).unwrap();
        let res = solve_cardinality(&ds, 1.0, 2, &SolveConfig::default()).unwrap();
        assert_eq!(res.objective, 0.0);
        assert!(res.support.is_empty());
        assert!(res.coefficients.iter().all(|w| *w == 0.0));
    }

    #[test]
    fn matches_enumeration_both_modes() {
        for seed in 0..12 {
            let ds = random_dataset(12 + seed as usize, 9, 40 + seed);
            let gamma = [0.1, 1.0, 10.0][seed as usize % 3];
            let k = 1 + seed as usize % 3;
            let (_, opt) = enumerate_optimal(&ds, gamma, k).unwrap();
            for mode in [TreeMode::SingleTree, TreeMode::MultiTree] {
                let cfg = SolveConfig { mode, ..tight() };
                let res = solve_cardinality(&ds, gamma, k, &cfg).unwrap();
                assert_eq!(res.status, Status::Optimal);
                assert!((res.objective - opt).abs() <= 1e-8 * opt, "{mode:?} seed {seed}: {} vs {}", res.objective, opt);
                assert!(res.lower_bound <= opt + 1e-9 * (1.0 + opt));
                assert!(res.support.len() <= k);
                let p = primal(&ds, gamma, &res.coefficients);
                assert!((p - res.objective).abs() <= 1e-8 * res.objective);
                for (j, w) in res.coefficients.iter().enumerate() {
                    if !res.support.contains(j) {
                        assert_eq!(*w, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn multi_tree_trace_is_monotone() {
        let ds = random_dataset(14, 10, 7);
        let cfg = SolveConfig { mode: TreeMode::MultiTree, warm_start: WarmStart::None, ..tight() };
        let res = solve_cardinality(&ds, 1.0, 3, &cfg).unwrap();
        let tol = 1e-9 * (1.0 + ds.half_y_norm_sq());
        for w in res.iterations.windows(2) {
            assert!(w[1].eta >= w[0].eta - tol);
        }
        for it in &res.iterations {
            assert!(it.loss >= it.eta - tol);
        }
    }

    #[test]
    fn penalized_matches_enumeration() {
        for seed in 0..6 {
            let ds = random_dataset(15, 8, 70 + seed);
            let (_, opt) = enumerate_penalized(&ds, 1.0, 0.3).unwrap();
            let res = solve_penalized(&ds, 1.0, 0.3, &tight()).unwrap();
            assert!((res.objective - opt).abs() <= 1e-8 * opt, "{} vs {}", res.objective, opt);
        }
    }

    #[test]
    fn penalized_zero_lambda_is_full_budget() {
        let ds = random_dataset(10, 5, 3);
        let a = solve_penalized(&ds, 1.0, 0.0, &tight()).unwrap();
        let b = solve_cardinality(&ds, 1.0, 5, &tight()).unwrap();
        assert!((a.objective - b.objective).abs() <= 1e-10 * b.objective);
    }

    #[test]
    fn penalized_dominant_lambda_is_empty() {
        let ds = random_dataset(10, 5, 4);
        let res = solve_penalized(&ds, 1.0, ds.half_y_norm_sq() + 0.1, &tight()).unwrap();
        assert!(res.support.is_empty());
        assert_eq!(res.objective, ds.half_y_norm_sq());
    }

    #[test]
    fn rejects_bad_inputs() {
        let ds = random_dataset(5, 3, 5);
        assert!(solve_cardinality(&ds, 1.0, 0, &SolveConfig::default()).is_err());
        assert!(solve_cardinality(&ds, 1.0, 4, &SolveConfig::default()).is_err());
        assert!(solve_cardinality(&ds, 0.0, 2, &SolveConfig::default()).is_err());
        assert!(solve_penalized(&ds, 1.0, -1.0, &SolveConfig::default()).is_err());
        let cfg = SolveConfig { warm_start: WarmStart::Given(Support::full(3)), ..Default::default() };
        assert!(solve_cardinality(&ds, 1.0, 2, &cfg).is_err());
    }

    #[test]
    fn warm_start_variants_agree() {
        let ds = random_dataset(20, 10, 8);
        let (_, opt) = enumerate_optimal(&ds, 1.0, 3).unwrap();
        for warm in [WarmStart::DualRelaxation, WarmStart::Lasso, WarmStart::None, WarmStart::Given(Support::new(vec![0, 1, 2], 10).unwrap())] {
            let cfg = SolveConfig { warm_start: warm.clone(), ..tight() };
            let res = solve_cardinality(&ds, 1.0, 3, &cfg).unwrap();
            assert!((res.objective - opt).abs() <= 1e-8 * opt, "{warm:?}");
        }
    }

    #[test]
    fn reused_pool_stays_exact() {
        let ds = random_dataset(18, 9, 9);
        let mut pool = CutPool::new(9);
        for k in 1..=4 {
            let (_, opt) = enumerate_optimal(&ds, 0.5, k).unwrap();
            let res = solve_cardinality_with_pool(&ds, 0.5, k, &tight(), &mut pool).unwrap();
            assert!((res.objective - opt).abs() <= 1e-8 * opt);
        }
    }
}
