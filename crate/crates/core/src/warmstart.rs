//! Dual relaxation bound and the warm-start support derived from it.
//!
//! Over the convex hull of `{s : |s| ≤ k}` the relaxed problem equals
//!
//! ```text
//! max_α  f(α) = −½αᵀα + Yᵀα − Σ_{top k} ((γ/2)(X_jᵀα)² − λ)₊
//! ```
//!
//! with `λ = 0` in cardinality mode. `f` is concave and every α yields a
//! valid lower bound. The same value is the minimum over `w` of
//!
//! ```text
//! ½‖Y − Xw‖² + h(w),   h(w) = min_{s ∈ S} Σ_j w_j²/(2γ s_j) + λ s_j
//! ```
//!
//! with `S` the relaxed budget region. We run accelerated proximal gradient
//! on `w` (the proximal map of `h` is a one-dimensional threshold search)
//! and read a dual certificate `α = Y − Xv` off every extrapolation point
//! `v` at no extra cost. The best certificate is returned.

use crate::dataset::{dot, Dataset, Support};
use crate::error::{Error, Result};
use crate::oracle::check_gamma;
use crate::par::Exec;

#[derive(Debug, Clone)]
pub struct RelaxationResult {
    /// Best dual iterate.
    pub alpha: Vec<f64>,
    /// Last primal iterate `w`; restarts a related solve.
    pub primal: Vec<f64>,
    /// `f(alpha)`, a lower bound on the relaxed and hence the binary optimum.
    pub lower_bound: f64,
    /// Active set at `alpha`: an integral point of the restricted region.
    pub active: Support,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct RelaxationOptions {
    pub iterations: usize,
    /// Stop when the best value improves by less than this (relative) over `patience` iterations.
    pub stall_tol: f64,
    pub patience: usize,
    /// Stop once primal and dual values agree to this relative gap.
    pub gap_tol: f64,
    /// Upper estimate of `‖X‖₂²`; computed when absent.
    pub lipschitz: Option<f64>,
}

impl Default for RelaxationOptions {
    fn default() -> Self {
        RelaxationOptions { iterations: 500, stall_tol: 1e-9, patience: 50, gap_tol: 1e-10, lipschitz: None }
    }
}

/// Columns forced into or out of the support.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Fixings {
    pub one: Vec<usize>,
    pub zero: Vec<usize>,
}

const FREE: u8 = 0;
const ONE: u8 = 1;
const ZERO: u8 = 2;

/// Budget, penalty and fixings of one relaxed problem.
struct Region {
    lambda0: f64,
    /// Budget left for free columns.
    free_budget: usize,
    ones: Vec<usize>,
    /// Empty when nothing is fixed.
    mask: Vec<u8>,
}

impl Region {
    fn new(p: usize, k: usize, lambda0: f64, fix: &Fixings) -> Result<Self> {
        let k = k.min(p);
        if fix.one.len() > k {
            return Err(Error::InvalidParameter(format!("{} columns fixed to one exceed the budget {k}", fix.one.len())));
        }
        let mut mask = Vec::new();
        if !fix.one.is_empty() || !fix.zero.is_empty() {
            mask = vec![FREE; p];
            for (list, tag) in [(&fix.one, ONE), (&fix.zero, ZERO)] {
                for &j in list {
                    if j >= p || mask[j] != FREE {
                        return Err(Error::InvalidParameter(format!("bad or repeated fixing of column {j}")));
                    }
                    mask[j] = tag;
                }
            }
        }
        let mut ones = fix.one.clone();
        ones.sort_unstable();
        Ok(Region { lambda0, free_budget: k - ones.len(), ones, mask })
    }

    fn is_free(&self, j: usize) -> bool {
        self.mask.is_empty() || self.mask[j] == FREE
    }

    /// `Σ_{fixed} g_j + Σ_{top r free} (g_j)₊`.
    fn charge(&self, gains: &[f64]) -> f64 {
        let fixed: f64 = self.ones.iter().map(|&j| gains[j]).sum();
        let mut pos: Vec<f64> = gains
            .iter()
            .enumerate()
            .filter(|&(j, g)| *g > 0.0 && self.is_free(j))
            .map(|(_, g)| *g)
            .collect();
        let r = self.free_budget;
        if pos.len() > r {
            if r == 0 {
                return fixed;
            }
            pos.select_nth_unstable_by(r - 1, |a, b| b.total_cmp(a));
            pos.truncate(r);
        }
        fixed + pos.iter().sum::<f64>()
    }

    /// Fixed columns plus up to `r` free columns with the largest gains, ties
    /// to the lowest index. Only positive gains enter when a penalty is present.
    fn active(&self, gains: &[f64]) -> Vec<usize> {
        let mut order: Vec<usize> = (0..gains.len())
            .filter(|&j| self.is_free(j) && (self.lambda0 == 0.0 || gains[j] > 0.0))
            .collect();
        let r = self.free_budget;
        if order.len() > r {
            if r == 0 {
                order.clear();
            } else {
                let by_gain = |a: &usize, b: &usize| gains[*b].total_cmp(&gains[*a]).then(a.cmp(b));
                order.select_nth_unstable_by(r - 1, by_gain);
                order.truncate(r);
            }
        }
        order.extend_from_slice(&self.ones);
        order.sort_unstable();
        order
    }
}

/// Dual relaxation for the cardinality-constrained problem.
pub fn solve_dual_relaxation(ds: &Dataset, gamma: f64, k: usize, iters: usize) -> Result<RelaxationResult> {
    let opts = RelaxationOptions { iterations: iters, ..Default::default() };
    solve_relaxation(ds, gamma, k, 0.0, &opts)
}

/// Dual relaxation of `min c(s) + λ|s|` over `s ∈ [0,1]^p`.
pub fn solve_dual_relaxation_penalized(ds: &Dataset, gamma: f64, lambda0: f64, iters: usize) -> Result<RelaxationResult> {
    let opts = RelaxationOptions { iterations: iters, ..Default::default() };
    solve_relaxation(ds, gamma, ds.p(), lambda0, &opts)
}

/// `f(α)` for budget `k` and per-column penalty `lambda0`.
pub fn relaxation_objective(ds: &Dataset, gamma: f64, k: usize, lambda0: f64, alpha: &[f64]) -> f64 {
    relaxation_objective_fixed(ds, gamma, k, lambda0, &Fixings::default(), alpha).unwrap_or(f64::NAN)
}

/// `f(α)` over the region with the given fixings.
pub fn relaxation_objective_fixed(ds: &Dataset, gamma: f64, k: usize, lambda0: f64, fix: &Fixings, alpha: &[f64]) -> Result<f64> {
    let region = Region::new(ds.p(), k, lambda0, fix)?;
    let products = column_products(ds, alpha, Exec::default());
    Ok(objective_from(ds, gamma, &region, alpha, &products))
}

fn column_products(ds: &Dataset, v: &[f64], exec: Exec) -> Vec<f64> {
    let mut out = vec![0.0; ds.p()];
    exec.fill(&mut out, |j| ds.col_dot(j, v));
    out
}

/// Penalized column gains `(γ/2)a_j² − λ`.
fn gains(gamma: f64, lambda0: f64, products: &[f64]) -> Vec<f64> {
    products.iter().map(|a| 0.5 * gamma * a * a - lambda0).collect()
}

fn objective_from(ds: &Dataset, gamma: f64, region: &Region, alpha: &[f64], products: &[f64]) -> f64 {
    let g = gains(gamma, region.lambda0, products);
    -0.5 * dot(alpha, alpha) + dot(ds.y().as_slice(), alpha) - region.charge(&g)
}

/// Largest `c ≤ cap` with `Σ clamp(c·v_j − offset, 0, 1) ≤ r` for `v_j ≥ 0`.
fn level(values: &[f64], offset: f64, cap: f64, r: usize) -> f64 {
    let r = r as f64;
    let total = |c: f64| values.iter().map(|v| (c * v - offset).clamp(0.0, 1.0)).sum::<f64>();
    if cap.is_finite() && total(cap) <= r {
        return cap;
    }
    // Piecewise linear in c: walk the breakpoints in order.
    let mut events: Vec<(f64, f64, f64)> = Vec::with_capacity(2 * values.len());
    for &v in values.iter().filter(|v| **v > 0.0) {
        events.push((offset / v, v, -offset));
        events.push(((1.0 + offset) / v, -v, offset + 1.0));
    }
    if (events.len() / 2) as f64 <= r {
        return cap;
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut slope, mut intercept) = (0.0, 0.0);
    for (c, ds, di) in events {
        if slope > 0.0 && slope * c + intercept >= r {
            return ((r - intercept) / slope).min(cap);
        }
        slope += ds;
        intercept += di;
    }
    cap
}

/// Penalty `h` and its proximal map over one region.
struct Penalty<'a> {
    region: &'a Region,
    gamma: f64,
}

impl Penalty<'_> {
    fn free_abs(&self, w: &[f64]) -> Vec<f64> {
        w.iter().enumerate().map(|(j, x)| if self.region.is_free(j) { x.abs() } else { 0.0 }).collect()
    }

    /// `h(w)`; infinite when a column fixed to zero carries weight.
    fn value(&self, w: &[f64]) -> f64 {
        let (g, lam) = (self.gamma, self.region.lambda0);
        let mut h = 0.0;
        for &j in &self.region.ones {
            h += w[j] * w[j] / (2.0 * g) + lam;
        }
        if !self.region.mask.is_empty() && w.iter().zip(&self.region.mask).any(|(x, m)| *m == ZERO && *x != 0.0) {
            return f64::INFINITY;
        }
        let a = self.free_abs(w);
        let cap = if lam > 0.0 { 1.0 / (2.0 * g * lam).sqrt() } else { f64::INFINITY };
        let c = level(&a, 0.0, cap, self.region.free_budget);
        for &x in a.iter().filter(|x| **x > 0.0) {
            let s = (c * x).min(1.0);
            if s <= 0.0 {
                return f64::INFINITY;
            }
            h += x * x / (2.0 * g * s) + lam * s;
        }
        h
    }

    /// `argmin_w ½‖w − u‖² + t·h(w)`, in place.
    fn prox(&self, u: &mut [f64], t: f64) {
        let (g, lam) = (self.gamma, self.region.lambda0);
        let tau = t / g;
        let a = self.free_abs(u);
        let cap = if lam > 0.0 { 1.0 / (2.0 * g * lam).sqrt() } else { f64::INFINITY };
        let c = level(&a, tau, cap, self.region.free_budget);
        for (j, x) in u.iter_mut().enumerate() {
            let s = if self.region.is_free(j) {
                if c.is_finite() { (c * a[j] - tau).clamp(0.0, 1.0) } else { 1.0 }
            } else if self.region.mask[j] == ONE {
                1.0
            } else {
                0.0
            };
            *x *= s / (s + tau);
        }
    }
}

/// Upper estimate of `‖X‖₂²` by power iteration on `XᵀX`.
pub fn spectral_norm_sq(ds: &Dataset) -> f64 {
    let (n, p) = (ds.n(), ds.p());
    let exec = Exec::default();
    let mut v: Vec<f64> = (0..p).map(|j| 1.0 + 0.1 * ((j % 7) as f64)).collect();
    let mut est = 0.0;
    for _ in 0..30 {
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let mut xv = vec![0.0; n];
        for (j, &vj) in v.iter().enumerate() {
            for (o, x) in xv.iter_mut().zip(ds.col(j)) {
                *o += x * vj;
            }
        }
        v = column_products(ds, &xv, exec);
        est = dot(&xv, &xv);
    }
    // Power iteration approaches from below; backtracking covers the rest.
    1.05 * est + f64::MIN_POSITIVE
}

pub fn solve_relaxation(ds: &Dataset, gamma: f64, k: usize, lambda0: f64, opts: &RelaxationOptions) -> Result<RelaxationResult> {
    solve_relaxation_fixed(ds, gamma, k, lambda0, &Fixings::default(), None, opts, f64::INFINITY)
}

/// Relaxation over the supports that respect `fix`, started from the
/// primal point `start` (or zero) and stopped early once the bound reaches
/// `stop_at`.
#[allow(clippy::too_many_arguments)]
pub fn solve_relaxation_fixed(
    ds: &Dataset,
    gamma: f64,
    k: usize,
    lambda0: f64,
    fix: &Fixings,
    start: Option<&[f64]>,
    opts: &RelaxationOptions,
    stop_at: f64,
) -> Result<RelaxationResult> {
    check_gamma(gamma)?;
    if opts.iterations == 0 {
        return Err(Error::InvalidParameter("relaxation needs at least one iteration".into()));
    }
    if !(lambda0.is_finite() && lambda0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda0 must be nonnegative, got {lambda0}")));
    }
    let region = Region::new(ds.p(), k, lambda0, fix)?;
    let penalty = Penalty { region: &region, gamma };
    let exec = Exec::default();
    let (n, p) = (ds.n(), ds.p());
    let y = ds.y().as_slice();
    let times_x = |w: &[f64]| {
        let mut out = vec![0.0; n];
        for (j, &wj) in w.iter().enumerate().filter(|(_, v)| **v != 0.0) {
            for (o, x) in out.iter_mut().zip(ds.col(j)) {
                *o += x * wj;
            }
        }
        out
    };

    let mut w = match start {
        Some(s) if s.len() == p => s.to_vec(),
        Some(s) => return Err(Error::Dimension(format!("start has {} entries, expected {p}", s.len()))),
        None => vec![0.0; p],
    };
    if !region.mask.is_empty() {
        for (x, m) in w.iter_mut().zip(&region.mask) {
            if *m == ZERO {
                *x = 0.0;
            }
        }
    }
    let mut lip = opts.lipschitz.unwrap_or_else(|| spectral_norm_sq(ds));
    let mut z = times_x(&w);
    let (mut w_prev, mut z_prev) = (w.clone(), z.clone());
    let mut momentum = 1.0_f64;

    let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    let mut last_mark = f64::NEG_INFINITY;
    let mut since_mark = 0;
    let mut iterations = 0;

    for t in 1..=opts.iterations {
        iterations = t;
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next_momentum;
        let v: Vec<f64> = w.iter().zip(&w_prev).map(|(a, b)| a + beta * (a - b)).collect();
        let zv: Vec<f64> = z.iter().zip(&z_prev).map(|(a, b)| a + beta * (a - b)).collect();

        // The residual at v is a dual point and Xᵀ of it is minus the gradient.
        let alpha: Vec<f64> = y.iter().zip(&zv).map(|(yi, zi)| yi - zi).collect();
        let products = column_products(ds, &alpha, exec);
        let value = objective_from(ds, gamma, &region, &alpha, &products);
        if best.as_ref().is_none_or(|b| value > b.2) {
            best = Some((alpha.clone(), products.clone(), value));
        }
        let best_value = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.2);
        if best_value >= stop_at {
            break;
        }

        let smooth_v = 0.5 * dot(&alpha, &alpha);
        let (w_new, z_new) = loop {
            let mut u: Vec<f64> = v.iter().zip(&products).map(|(vi, a)| vi + a / lip).collect();
            penalty.prox(&mut u, 1.0 / lip);
            let zu = times_x(&u);
            let diff: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
            let r: Vec<f64> = zu.iter().zip(y).map(|(a, b)| a - b).collect();
            let model = smooth_v - dot(&products, &diff) + 0.5 * lip * dot(&diff, &diff);
            if 0.5 * dot(&r, &r) <= model + 1e-12 * (1.0 + model.abs()) {
                break (u, zu);
            }
            lip *= 2.0;
        };

        // Restart momentum when the step opposes the last move.
        let opposes: f64 = v.iter().zip(&w_new).zip(&w).map(|((vi, wn), wo)| (vi - wn) * (wn - wo)).sum();
        momentum = if opposes > 0.0 { 1.0 } else { next_momentum };
        w_prev = std::mem::replace(&mut w, w_new);
        z_prev = std::mem::replace(&mut z, z_new);

        let r: Vec<f64> = z.iter().zip(y).map(|(a, b)| a - b).collect();
        let primal = 0.5 * dot(&r, &r) + penalty.value(&w);
        if primal - best_value <= opts.gap_tol * (1.0 + primal.abs()) {
            break;
        }
        if best_value - last_mark > opts.stall_tol * (1.0 + last_mark.abs()) {
            last_mark = best_value;
            since_mark = 0;
        } else {
            since_mark += 1;
            if since_mark >= opts.patience {
                break;
            }
        }
    }
    let (alpha, products, lower_bound) = best.expect("at least one iteration ran");
    let active = Support::from_sorted_unchecked(region.active(&gains(gamma, lambda0, &products)));
    Ok(RelaxationResult { alpha, primal: w, lower_bound, active, iterations })
}

/// Indicator of the `k` largest `(X_jᵀα)²`, ties to the lowest index.
pub fn warm_start_support(alpha: &[f64], ds: &Dataset, k: usize) -> Result<Support> {
    if alpha.len() != ds.n() {
        return Err(Error::Dimension(format!("alpha has {} entries, expected {}", alpha.len(), ds.n())));
    }
    let scores: Vec<f64> = column_products(ds, alpha, Exec::default()).iter().map(|a| a * a).collect();
    let region = Region::new(ds.p(), k, 0.0, &Fixings::default())?;
    Ok(Support::from_sorted_unchecked(region.active(&scores)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate_optimal, loss, ridge_loss_dense};
    use crate::test_util::random_dataset;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vanishing_gamma_bound_is_half_norm() {
        let ds = random_dataset(10, 4, 1);
        let r = solve_dual_relaxation(&ds, 1e-12, 2, 100).unwrap();
        assert!((r.lower_bound - ds.half_y_norm_sq()).abs() <= 1e-8 * ds.half_y_norm_sq());
        let f_y = relaxation_objective(&ds, 1e-12, 2, 0.0, ds.y().as_slice());
        assert!((f_y - ds.half_y_norm_sq()).abs() <= 1e-8 * ds.half_y_norm_sq());
    }

    #[test]
    fn full_budget_matches_ridge_loss() {
        for seed in 0..5 {
            let ds = random_dataset(12, 6, seed);
            for gamma in [0.1, 1.0, 10.0] {
                let r = solve_dual_relaxation(&ds, gamma, 6, 5000).unwrap();
                let full = ridge_loss_dense(&ds, gamma, &[1.0; 6]).unwrap();
                assert!((r.lower_bound - full).abs() <= 1e-4, "{} vs {}", r.lower_bound, full);
            }
        }
    }

    #[test]
    fn bound_below_enumerated_optimum() {
        for seed in 0..10 {
            let ds = random_dataset(10, 6, 100 + seed);
            let gamma = [0.1, 1.0, 10.0][seed as usize % 3];
            let r = solve_dual_relaxation(&ds, gamma, 2, 500).unwrap();
            let (_, opt) = enumerate_optimal(&ds, gamma, 2).unwrap();
            assert!(r.lower_bound <= opt + 1e-9, "{} > {}", r.lower_bound, opt);
        }
    }

    #[test]
    fn objective_is_concave() {
        let ds = random_dataset(9, 7, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let a: Vec<f64> = (0..9).map(|_| rng.random_range(-2.0..2.0)).collect();
            let b: Vec<f64> = (0..9).map(|_| rng.random_range(-2.0..2.0)).collect();
            let th: f64 = rng.random();
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| th * x + (1.0 - th) * y).collect();
            let f = |v: &[f64]| relaxation_objective(&ds, 0.7, 3, 0.0, v);
            assert!(f(&mid) >= th * f(&a) + (1.0 - th) * f(&b) - 1e-9);
        }
    }

    #[test]
    fn warm_start_full_budget_and_single_score() {
        let ds = random_dataset(5, 3, 3);
        let s = warm_start_support(&[0.1, 0.2, 0.3, 0.4, 0.5], &ds, 3).unwrap();
        assert_eq!(s, Support::full(3));

        // alpha orthogonal to every column except the second.
        let rows = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]];
        let ds = Dataset::from_rows(&rows, vec![0.0; 3]).unwrap();
        let s = warm_start_support(&[0.0, 2.0, 0.0], &ds, 3).unwrap();
        assert_eq!(s.indices(), &[0, 1, 2]);
        let s = warm_start_support(&[0.0, 2.0, 0.0], &ds, 1).unwrap();
        assert_eq!(s.indices(), &[1]);
    }

    #[test]
    fn warm_start_is_argmax_of_scores() {
        let ds = random_dataset(8, 12, 4);
        let alpha: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).cos()).collect();
        let mut scored: Vec<(f64, usize)> = (0..12)
            .map(|j| {
                let v: f64 = ds.col(j).iter().zip(&alpha).map(|(x, a)| x * a).sum();
                (v * v, j)
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut expect: Vec<usize> = scored[..4].iter().map(|x| x.1).collect();
        expect.sort_unstable();
        assert_eq!(warm_start_support(&alpha, &ds, 4).unwrap().indices(), &expect[..]);
        let scaled: Vec<f64> = alpha.iter().map(|a| -3.5 * a).collect();
        assert_eq!(warm_start_support(&scaled, &ds, 4).unwrap().indices(), &expect[..]);
    }

    #[test]
    fn threshold_level_meets_budget() {
        let v = [3.0, 0.5, 2.0, 0.0, 1.0];
        for (offset, r) in [(0.0, 1), (0.0, 2), (0.3, 1), (0.3, 3), (1.5, 2)] {
            let c = level(&v, offset, f64::INFINITY, r);
            let total: f64 = v.iter().map(|x| (c * x - offset).clamp(0.0, 1.0)).sum();
            assert!((total - r as f64).abs() < 1e-12, "offset {offset} r {r}: {total}");
        }
        // Four nonzero entries fit a budget of four without a finite level.
        assert_eq!(level(&v, 0.2, f64::INFINITY, 4), f64::INFINITY);
        assert_eq!(level(&v, 0.2, 0.7, 4), 0.7);
    }

    #[test]
    fn prox_without_binding_budget_is_ridge_shrinkage() {
        let fix = Fixings::default();
        let region = Region::new(4, 4, 0.0, &fix).unwrap();
        let pen = Penalty { region: &region, gamma: 2.0 };
        let mut u = vec![1.0, -3.0, 0.5, 2.0];
        let orig = u.clone();
        pen.prox(&mut u, 0.5);
        // h = ‖w‖²/(2γ), so the prox divides by 1 + t/γ.
        for (w, x) in u.iter().zip(&orig) {
            assert!((w - x / 1.25).abs() < 1e-15);
        }
        assert!((pen.value(&orig) - orig.iter().map(|x| x * x).sum::<f64>() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn prox_respects_fixings_and_budget() {
        let fix = Fixings { one: vec![2], zero: vec![0] };
        let region = Region::new(5, 2, 0.0, &fix).unwrap();
        let pen = Penalty { region: &region, gamma: 1.0 };
        let mut u = vec![9.0, 4.0, 0.1, 3.0, 0.2];
        pen.prox(&mut u, 0.1);
        assert_eq!(u[0], 0.0);
        assert!((u[2] - 0.1 / 1.1).abs() < 1e-15);
        // One free slot is shared between columns 1 and 3; column 4 is too small to enter.
        assert!(u[1] > u[3] && u[3] >= 0.0);
        assert_eq!(u[4], 0.0);
        assert!(pen.value(&u).is_finite());
        assert_eq!(pen.value(&[1.0, 0.0, 0.0, 0.0, 0.0]), f64::INFINITY);
    }

    #[test]
    fn penalized_bound_is_valid() {
        let ds = random_dataset(10, 5, 5);
        let lambda0 = 0.3;
        let r = solve_dual_relaxation_penalized(&ds, 1.0, lambda0, 300).unwrap();
        let mut best = f64::INFINITY;
        for mask in 0u32..32 {
            let idx: Vec<usize> = (0..5).filter(|j| mask & (1 << j) != 0).collect();
            let s = Support::from_sorted_unchecked(idx);
            best = best.min(loss(&ds, 1.0, &s).unwrap() + lambda0 * s.len() as f64);
        }
        assert!(r.lower_bound <= best + 1e-9);
    }
}
