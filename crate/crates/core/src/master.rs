//! Master problem of the outer-approximation loop.
//!
//! Minimizes the pooled lower envelope `max_i c(s_i) + ∇c(s_i)ᵀ(s − s_i)` over
//! supports with `|s| ≤ k` by best-first branch-and-bound. Node bounds come
//! from the Lagrangian dual of the node relaxation: for cut weights `λ` in the
//! simplex, the inner minimum over the relaxed, fixing-respecting polytope has
//! a closed form (fixed-one coordinates plus the most negative free
//! coefficients), and any `λ` gives a valid bound. The weights are improved by
//! projected supergradient ascent.
//!
//! In single-tree mode every integral point met during the search is sent to
//! the loss oracle and its cut is injected into the shared pool, so the tree
//! converges to the optimum of the true loss rather than of a fixed envelope.
//! A [`NodeRelaxation`] may supply a second bound on the true loss at each
//! node; the node keeps the larger of the two.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;
use std::time::Instant;

use crate::dataset::Support;
use crate::error::{Error, Result};
use crate::oracle::LossEval;

/// Affine minorant `η ≥ value + gradᵀ(s − anchor)` of the loss.
#[derive(Debug, Clone)]
pub struct Cut {
    pub anchor: Support,
    pub value: f64,
    pub grad: Vec<f64>,
    /// `value − gradᵀ anchor`.
    pub constant: f64,
}

impl Cut {
    pub fn new(anchor: Support, value: f64, grad: Vec<f64>) -> Self {
        let constant = value - anchor.indices().iter().map(|&j| grad[j]).sum::<f64>();
        Cut { anchor, value, grad, constant }
    }

    /// Value of the affine function at a binary support.
    pub fn at(&self, s: &Support) -> f64 {
        self.constant + s.indices().iter().map(|&j| self.grad[j]).sum::<f64>()
    }

    /// Value at a relaxed selection vector.
    pub fn at_relaxed(&self, s: &[f64]) -> f64 {
        self.constant + self.grad.iter().zip(s).map(|(g, v)| g * v).sum::<f64>()
    }
}

/// Whether [`CutPool::add_cut`] grew the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddOutcome {
    Added,
    /// The anchor was already pooled. With exact cuts this means the
    /// master revisited a point, so the flag on the pool is raised.
    Duplicate,
}

/// Append-only collection of cuts with unique anchors.
#[derive(Debug, Clone)]
pub struct CutPool {
    p: usize,
    cuts: Vec<Cut>,
    by_anchor: HashMap<Support, usize>,
    duplicate_warning: bool,
}

impl CutPool {
    pub fn new(p: usize) -> Self {
        CutPool { p, cuts: Vec::new(), by_anchor: HashMap::new(), duplicate_warning: false }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn duplicate_warning(&self) -> bool {
        self.duplicate_warning
    }

    pub fn get(&self, anchor: &Support) -> Option<&Cut> {
        self.by_anchor.get(anchor).map(|&i| &self.cuts[i])
    }

    pub fn add_cut(&mut self, eval: &LossEval, anchor: Support) -> AddOutcome {
        self.push(Cut::new(anchor, eval.c, eval.grad.clone()))
    }

    pub fn push(&mut self, cut: Cut) -> AddOutcome {
        assert_eq!(cut.grad.len(), self.p, "cut gradient length must equal p");
        if self.by_anchor.contains_key(&cut.anchor) {
            self.duplicate_warning = true;
            log::warn!("duplicate cut anchor {}", cut.anchor);
            return AddOutcome::Duplicate;
        }
        self.by_anchor.insert(cut.anchor.clone(), self.cuts.len());
        self.cuts.push(cut);
        AddOutcome::Added
    }

    /// Pooled envelope `max_i cut_i(s)`; `-inf` for an empty pool.
    pub fn value_at(&self, s: &Support) -> f64 {
        self.cuts.iter().map(|c| c.at(s)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn value_at_relaxed(&self, s: &[f64]) -> f64 {
        self.cuts.iter().map(|c| c.at_relaxed(s)).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Branch-and-bound node: variables fixed to one or zero plus a lower bound.
#[derive(Debug, Clone, Default)]
pub struct Node {
    pub fixed_one: Vec<usize>,
    pub fixed_zero: Vec<usize>,
    pub bound: f64,
    depth: usize,
    seq: u64,
    /// Sparse warm start for the cut weights.
    weights: Vec<(usize, f64)>,
    /// Warm start for the node relaxation, shared with the sibling.
    relax_state: Option<Arc<Vec<f64>>>,
}

impl Node {
    pub fn root() -> Self {
        Node { bound: f64::NEG_INFINITY, ..Default::default() }
    }

    pub fn with_fixings(mut fixed_one: Vec<usize>, mut fixed_zero: Vec<usize>) -> Self {
        fixed_one.sort_unstable();
        fixed_zero.sort_unstable();
        debug_assert!(fixed_one.iter().all(|j| fixed_zero.binary_search(j).is_err()));
        let depth = fixed_one.len() + fixed_zero.len();
        Node { fixed_one, fixed_zero, bound: f64::NEG_INFINITY, depth, ..Default::default() }
    }
}

struct Queued(Node);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    // BinaryHeap is a max-heap: smallest bound first, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .bound
            .total_cmp(&self.0.bound)
            .then(self.0.depth.cmp(&other.0.depth))
            .then(other.0.seq.cmp(&self.0.seq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeMode {
    /// One tree per cut; the master returns the exact minimizer of the current envelope.
    MultiTree,
    /// Cuts are generated lazily inside a single tree.
    SingleTree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    /// A time, node or cut limit stopped the search.
    TimeLimit,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::TimeLimit => "time_limit",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Limits {
    pub deadline: Option<Instant>,
    pub max_nodes: Option<u64>,
    pub max_cuts: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct MasterOptions {
    /// Absolute optimality tolerance.
    pub tol: f64,
    /// Linear cost per selected column (penalized mode); zero otherwise.
    pub penalty: f64,
    pub limits: Limits,
    /// Supergradient iterations at the root and at other nodes.
    pub root_iterations: usize,
    pub node_iterations: usize,
    /// Maximum bound recomputations per node after lazy cuts.
    pub max_reexamine: usize,
}

impl Default for MasterOptions {
    fn default() -> Self {
        MasterOptions {
            tol: 1e-6,
            penalty: 0.0,
            limits: Limits::default(),
            root_iterations: 200,
            node_iterations: 40,
            max_reexamine: 25,
        }
    }
}

/// Lower bound on the true objective over the completions of a node.
pub struct RelaxedBound {
    pub bound: f64,
    /// Opaque warm start handed to the children.
    pub state: Vec<f64>,
    /// An integral point of the node, scored by the oracle.
    pub candidate: Support,
}

/// Convex relaxation of the true loss restricted to a node's fixings.
pub trait NodeRelaxation {
    /// Any valid bound is acceptable; work may stop once `stop_at` is reached.
    fn bound(&mut self, node: &Node, k: usize, warm: Option<&[f64]>, stop_at: f64) -> Result<RelaxedBound>;
}

#[derive(Debug, Clone)]
pub struct MasterSolution {
    pub s: Support,
    /// Envelope value (plus penalty) at `s`.
    pub eta: f64,
    /// Objective of `s`: the true loss in single-tree mode, the envelope in multi-tree mode.
    pub value: f64,
    /// Certified lower bound on the master optimum.
    pub lower_bound: f64,
    pub nodes_explored: u64,
    pub status: Status,
}

/// Lagrangian node bound at explicit cut weights (padded with zeros if
/// shorter than the pool). Returns `+inf` for an infeasible node.
pub fn node_bound_at(pool: &CutPool, node: &Node, k: usize, penalty: f64, weights: &[f64]) -> f64 {
    if node.fixed_one.len() > k {
        return f64::INFINITY;
    }
    let mut scratch = Scratch::new(pool.p());
    scratch.mark(node);
    let lam: Vec<f64> = (0..pool.len()).map(|i| weights.get(i).copied().unwrap_or(0.0)).collect();
    let ev = scratch.evaluate(pool, node, k, penalty, &lam);
    ev.lagrangian
}

/// Best Lagrangian bound found by supergradient ascent on the cut weights.
pub fn node_bound(pool: &CutPool, node: &Node, k: usize) -> Result<f64> {
    if pool.is_empty() {
        return Err(Error::InvalidParameter("node bound needs a non-empty cut pool".into()));
    }
    if node.fixed_one.len() > k {
        return Ok(f64::INFINITY);
    }
    let mut scratch = Scratch::new(pool.p());
    scratch.mark(node);
    let out = scratch.ascend(pool, node, k, 0.0, &[], 500, f64::INFINITY, 0.0);
    Ok(out.bound)
}

struct Evaluation {
    lagrangian: f64,
    /// Envelope (plus penalty) at the candidate.
    upper: f64,
    candidate: Vec<usize>,
    supergrad: Vec<f64>,
}

struct BoundOutcome {
    bound: f64,
    weights: Vec<f64>,
    candidate: Support,
    aggregate: Vec<f64>,
}

const FREE: u8 = 0;
const ONE: u8 = 1;
const ZERO: u8 = 2;

struct Scratch {
    state: Vec<u8>,
    agg: Vec<f64>,
    negatives: Vec<(f64, usize)>,
}

impl Scratch {
    fn new(p: usize) -> Self {
        Scratch { state: vec![FREE; p], agg: vec![0.0; p], negatives: Vec::new() }
    }

    fn mark(&mut self, node: &Node) {
        self.state.iter_mut().for_each(|v| *v = FREE);
        for &j in &node.fixed_one {
            self.state[j] = ONE;
        }
        for &j in &node.fixed_zero {
            self.state[j] = ZERO;
        }
    }

    /// Aggregates the weighted gradients and solves the inner minimum.
    fn evaluate(&mut self, pool: &CutPool, node: &Node, k: usize, penalty: f64, lam: &[f64]) -> Evaluation {
        let cuts = pool.cuts();
        self.agg.iter_mut().for_each(|v| *v = 0.0);
        let mut constant = 0.0;
        for (cut, &w) in cuts.iter().zip(lam) {
            if w > 0.0 {
                constant += w * cut.constant;
                for (a, g) in self.agg.iter_mut().zip(&cut.grad) {
                    *a += w * g;
                }
            }
        }
        let budget = k - node.fixed_one.len();
        let mut inner = 0.0;
        for &j in &node.fixed_one {
            inner += self.agg[j] + penalty;
        }
        self.negatives.clear();
        for (j, (&st, &a)) in self.state.iter().zip(&self.agg).enumerate() {
            let v = a + penalty;
            if st == FREE && v < 0.0 {
                self.negatives.push((v, j));
            }
        }
        let by_value = |x: &(f64, usize), y: &(f64, usize)| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1));
        if self.negatives.len() > budget {
            if budget == 0 {
                self.negatives.clear();
            } else {
                self.negatives.select_nth_unstable_by(budget - 1, by_value);
                self.negatives.truncate(budget);
            }
        }
        let mut candidate: Vec<usize> = node.fixed_one.clone();
        for &(v, j) in &self.negatives {
            inner += v;
            candidate.push(j);
        }
        candidate.sort_unstable();
        let supergrad: Vec<f64> = cuts
            .iter()
            .map(|c| c.constant + candidate.iter().map(|&j| c.grad[j]).sum::<f64>())
            .collect();
        let upper = supergrad.iter().copied().fold(f64::NEG_INFINITY, f64::max) + penalty * candidate.len() as f64;
        Evaluation { lagrangian: constant + inner, upper, candidate, supergrad }
    }

    /// Projected supergradient ascent with a Polyak step towards the best
    /// known upper estimate. Stops early once the bound reaches `prune_at`
    /// or is within `gap_tol` of the envelope at the current candidate.
    #[allow(clippy::too_many_arguments)]
    fn ascend(
        &mut self,
        pool: &CutPool,
        node: &Node,
        k: usize,
        penalty: f64,
        warm: &[(usize, f64)],
        iterations: usize,
        prune_at: f64,
        gap_tol: f64,
    ) -> BoundOutcome {
        let m = pool.len();
        let mut starts: Vec<Vec<f64>> = Vec::new();
        if warm.is_empty() {
            // Root: try every vertex of the simplex.
            for i in 0..m {
                let mut v = vec![0.0; m];
                v[i] = 1.0;
                starts.push(v);
            }
        } else {
            let mut w = vec![0.0; m];
            for &(i, v) in warm {
                if i < m {
                    w[i] = v;
                }
            }
            let total: f64 = w.iter().sum();
            if total > 0.0 {
                w.iter_mut().for_each(|v| *v /= total);
                starts.push(w.clone());
            }
            let mut newest = vec![0.0; m];
            newest[m - 1] = 1.0;
            if total > 0.0 && w[m - 1] < 1.0 {
                let mix: Vec<f64> = w.iter().zip(&newest).map(|(a, b)| 0.5 * (a + b)).collect();
                starts.push(mix);
            }
            starts.push(newest);
        }

        let mut best_lam = Vec::new();
        let mut best: Option<Evaluation> = None;
        let mut upper = f64::INFINITY;
        for lam in starts {
            let ev = self.evaluate(pool, node, k, penalty, &lam);
            upper = upper.min(ev.upper);
            if best.as_ref().is_none_or(|b| ev.lagrangian > b.lagrangian) {
                best = Some(ev);
                best_lam = lam;
            }
        }
        let mut best = best.expect("pool is non-empty");
        let mut lam = best_lam.clone();
        let mut current_sg = best.supergrad.clone();
        let mut current_val = best.lagrangian;
        let mut mu = 1.0;
        let mut stall = 0;

        if m > 1 {
            for _ in 0..iterations {
                if best.lagrangian >= prune_at || upper - best.lagrangian <= gap_tol {
                    break;
                }
                let mean = current_sg.iter().sum::<f64>() / m as f64;
                let dir: Vec<f64> = current_sg.iter().map(|g| g - mean).collect();
                let norm2: f64 = dir.iter().map(|d| d * d).sum();
                if norm2 <= f64::MIN_POSITIVE {
                    break;
                }
                let target = upper.min(prune_at);
                let step = mu * (target - current_val).max(1e-12 * (1.0 + target.abs())) / norm2;
                let moved: Vec<f64> = lam.iter().zip(&current_sg).map(|(l, g)| l + step * g).collect();
                lam = project_simplex(&moved);
                let ev = self.evaluate(pool, node, k, penalty, &lam);
                upper = upper.min(ev.upper);
                current_val = ev.lagrangian;
                current_sg.clone_from(&ev.supergrad);
                if ev.lagrangian > best.lagrangian + 1e-15 * (1.0 + best.lagrangian.abs()) {
                    best = ev;
                    best_lam.clone_from(&lam);
                    stall = 0;
                } else {
                    stall += 1;
                    if stall >= 5 {
                        mu *= 0.5;
                        stall = 0;
                        lam.clone_from(&best_lam);
                        current_sg.clone_from(&best.supergrad);
                        current_val = best.lagrangian;
                        if mu < 1e-6 {
                            break;
                        }
                    }
                }
            }
        }

        // Recompute the aggregate at the best weights for the branching rule.
        self.agg.iter_mut().for_each(|v| *v = 0.0);
        for (cut, &w) in pool.cuts().iter().zip(&best_lam) {
            if w > 0.0 {
                for (a, g) in self.agg.iter_mut().zip(&cut.grad) {
                    *a += w * g;
                }
            }
        }
        BoundOutcome {
            bound: best.lagrangian,
            weights: best_lam,
            candidate: Support::from_sorted_unchecked(best.candidate),
            aggregate: self.agg.clone(),
        }
    }
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Solves the master problem over `{s : |s| ≤ k}`.
///
/// `incumbent` carries a known support with its objective (true loss plus
/// penalty); in multi-tree mode its value is recomputed from the envelope.
pub fn solve_master<F>(
    pool: &mut CutPool,
    k: usize,
    incumbent: Option<(Support, f64)>,
    oracle: &mut F,
    mode: TreeMode,
    opts: &MasterOptions,
) -> Result<MasterSolution>
where
    F: FnMut(&Support) -> Result<LossEval>,
{
    master(pool, k, incumbent, oracle, None, mode, opts)
}

/// Single-tree master whose node bounds also use `relaxation`.
pub fn solve_master_relaxed<F>(
    pool: &mut CutPool,
    k: usize,
    incumbent: Option<(Support, f64)>,
    oracle: &mut F,
    relaxation: &mut dyn NodeRelaxation,
    opts: &MasterOptions,
) -> Result<MasterSolution>
where
    F: FnMut(&Support) -> Result<LossEval>,
{
    master(pool, k, incumbent, oracle, Some(relaxation), TreeMode::SingleTree, opts)
}

fn master<F>(
    pool: &mut CutPool,
    k: usize,
    incumbent: Option<(Support, f64)>,
    oracle: &mut F,
    relaxation: Option<&mut dyn NodeRelaxation>,
    mode: TreeMode,
    opts: &MasterOptions,
) -> Result<MasterSolution>
where
    F: FnMut(&Support) -> Result<LossEval>,
{
    if pool.is_empty() {
        return Err(Error::InvalidParameter("master needs at least one cut".into()));
    }
    let k = k.min(pool.p());
    let mut search = Search {
        k,
        penalty: opts.penalty,
        tol: opts.tol,
        mode,
        scratch: Scratch::new(pool.p()),
        incumbent: None,
        nodes: 0,
        seq: 0,
    };
    if let Some((s, v)) = incumbent {
        let value = match mode {
            TreeMode::SingleTree => v,
            TreeMode::MultiTree => pool.value_at(&s) + opts.penalty * s.len() as f64,
        };
        search.offer(s, value);
    }
    search.run(pool, oracle, relaxation, opts)
}

struct Search {
    k: usize,
    penalty: f64,
    tol: f64,
    mode: TreeMode,
    scratch: Scratch,
    incumbent: Option<(Support, f64)>,
    nodes: u64,
    seq: u64,
}

enum Limit {
    None,
    Hit,
}

impl Search {
    fn upper(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |(_, v)| *v)
    }

    fn offer(&mut self, s: Support, value: f64) {
        let better = match &self.incumbent {
            None => true,
            Some((bs, bv)) => value < *bv || (value == *bv && s < *bs),
        };
        if better {
            self.incumbent = Some((s, value));
        }
    }

    fn limit(&self, pool: &CutPool, limits: &Limits) -> Limit {
        if let Some(max) = limits.max_nodes {
            if self.nodes >= max {
                return Limit::Hit;
            }
        }
        if let Some(max) = limits.max_cuts {
            if pool.len() >= max {
                return Limit::Hit;
            }
        }
        if let Some(deadline) = limits.deadline {
            if Instant::now() >= deadline {
                return Limit::Hit;
            }
        }
        Limit::None
    }

    /// Scores an integral point. Returns whether a new cut changed the
    /// envelope enough at that point to warrant recomputing the bound.
    fn visit<F>(&mut self, pool: &mut CutPool, oracle: &mut F, s: &Support, max_cuts: Option<usize>) -> Result<bool>
    where
        F: FnMut(&Support) -> Result<LossEval>,
    {
        let pen = self.penalty * s.len() as f64;
        match self.mode {
            TreeMode::MultiTree => {
                let v = pool.value_at(s) + pen;
                self.offer(s.clone(), v);
                Ok(false)
            }
            TreeMode::SingleTree => {
                if let Some(cut) = pool.get(s) {
                    let v = cut.value + pen;
                    self.offer(s.clone(), v);
                    return Ok(false);
                }
                let eval = oracle(s)?;
                let eta = pool.value_at(s);
                let room = max_cuts.is_none_or(|m| pool.len() < m);
                if room {
                    pool.add_cut(&eval, s.clone());
                }
                self.offer(s.clone(), eval.c + pen);
                Ok(room && eval.c > eta + self.tol)
            }
        }
    }

    fn run<F>(
        &mut self,
        pool: &mut CutPool,
        oracle: &mut F,
        mut relaxation: Option<&mut dyn NodeRelaxation>,
        opts: &MasterOptions,
    ) -> Result<MasterSolution>
    where
        F: FnMut(&Support) -> Result<LossEval>,
    {
        let limits = &opts.limits;
        let p = pool.p();
        let mut heap = BinaryHeap::new();
        heap.push(Queued(Node::root()));
        let mut status = Status::Optimal;
        // Lowest bound among nodes discarded because of a limit.
        let mut open_floor = f64::INFINITY;

        while let Some(Queued(mut node)) = heap.pop() {
            if node.bound >= self.upper() - self.tol {
                open_floor = open_floor.min(node.bound);
                break;
            }
            if let Limit::Hit = self.limit(pool, limits) {
                status = Status::TimeLimit;
                open_floor = open_floor.min(node.bound);
                break;
            }
            self.nodes += 1;
            let fixed = node.fixed_one.len() + node.fixed_zero.len();
            let budget = self.k - node.fixed_one.len();

            // Leaf: a single feasible completion remains.
            if budget == 0 || fixed == p {
                let s = Support::from_sorted_unchecked(node.fixed_one.clone());
                self.visit(pool, oracle, &s, limits.max_cuts)?;
                continue;
            }

            if let Some(rel) = relaxation.as_deref_mut() {
                let warm = node.relax_state.clone();
                let rb = rel.bound(&node, self.k, warm.as_deref().map(Vec::as_slice), self.upper() - self.tol)?;
                node.bound = node.bound.max(rb.bound);
                node.relax_state = Some(Arc::new(rb.state));
                self.visit(pool, oracle, &rb.candidate, limits.max_cuts)?;
                if node.bound >= self.upper() - self.tol {
                    continue;
                }
            }

            self.scratch.mark(&node);
            let root = node.depth == 0 && node.weights.is_empty();
            let mut iterations = if root { opts.root_iterations } else { opts.node_iterations };
            let mut outcome;
            let mut rounds = 0;
            loop {
                let warm = node.weights.clone();
                outcome = self.scratch.ascend(
                    pool,
                    &node,
                    self.k,
                    self.penalty,
                    &warm,
                    iterations,
                    self.upper() - self.tol,
                    self.tol,
                );
                node.bound = node.bound.max(outcome.bound);
                node.weights = sparse_weights(&outcome.weights);
                let refresh = self.visit(pool, oracle, &outcome.candidate, limits.max_cuts)?;
                rounds += 1;
                if node.bound >= self.upper() - self.tol || !refresh || rounds > opts.max_reexamine {
                    break;
                }
                if let Limit::Hit = self.limit(pool, limits) {
                    break;
                }
                iterations = opts.node_iterations;
            }
            if node.bound >= self.upper() - self.tol {
                continue;
            }

            // Branch on the free column with the largest aggregate slope.
            let mut pick: Option<(usize, f64)> = None;
            for (j, &a) in outcome.aggregate.iter().enumerate() {
                if self.scratch.state[j] != FREE {
                    continue;
                }
                let mag = a.abs();
                if pick.is_none_or(|(_, m)| mag > m) {
                    pick = Some((j, mag));
                }
            }
            let Some((j, _)) = pick else {
                continue;
            };
            let mut one = node.clone();
            let pos = one.fixed_one.binary_search(&j).unwrap_err();
            one.fixed_one.insert(pos, j);
            one.depth += 1;
            let mut zero = node;
            let pos = zero.fixed_zero.binary_search(&j).unwrap_err();
            zero.fixed_zero.insert(pos, j);
            zero.depth += 1;
            self.seq += 1;
            one.seq = self.seq;
            self.seq += 1;
            zero.seq = self.seq;
            if one.fixed_one.len() <= self.k {
                heap.push(Queued(one));
            }
            heap.push(Queued(zero));
        }

        let (s, value) = self.incumbent.clone().expect("search visits at least one integral point");
        let mut lower = value;
        lower = lower.min(open_floor);
        for Queued(n) in heap.iter() {
            lower = lower.min(n.bound);
        }
        if status == Status::Optimal && value - lower > self.tol {
            status = Status::TimeLimit;
        }
        let eta = pool.value_at(&s) + self.penalty * s.len() as f64;
        Ok(MasterSolution { s, eta, value, lower_bound: lower, nodes_explored: self.nodes, status })
    }
}

fn sparse_weights(w: &[f64]) -> Vec<(usize, f64)> {
    w.iter().enumerate().filter(|(_, v)| **v > 0.0).map(|(i, v)| (i, *v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::for_each_combination;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn no_oracle(_: &Support) -> Result<LossEval> {
        panic!("multi-tree master must not call the oracle")
    }

    fn eval(c: f64, grad: Vec<f64>) -> LossEval {
        LossEval { c, grad, alpha: Vec::new(), weights: Vec::new() }
    }

    fn random_pool(rng: &mut ChaCha8Rng, p: usize, m: usize) -> CutPool {
        let mut pool = CutPool::new(p);
        while pool.len() < m {
            let size = rng.random_range(0..=p.min(3));
            let mut idx: Vec<usize> = rand::seq::index::sample(rng, p, size).into_vec();
            idx.sort_unstable();
            let grad: Vec<f64> = (0..p).map(|_| -rng.random_range(0.0..5.0)).collect();
            let value = rng.random_range(5.0..15.0);
            pool.push(Cut::new(Support::from_sorted_unchecked(idx), value, grad));
        }
        pool
    }

    fn brute_force(pool: &CutPool, k: usize, node: &Node) -> f64 {
        let mut best = f64::INFINITY;
        for size in 0..=k {
            for_each_combination(pool.p(), size, |idx| {
                let ok = node.fixed_one.iter().all(|j| idx.contains(j))
                    && node.fixed_zero.iter().all(|j| !idx.contains(j));
                if ok {
                    let s = Support::from_sorted_unchecked(idx.to_vec());
                    best = best.min(pool.value_at(&s));
                }
            });
        }
        best
    }

    #[test]
    fn add_cut_and_duplicates() {
        let mut pool = CutPool::new(3);
        let a = Support::new(vec![1], 3).unwrap();
        assert_eq!(pool.add_cut(&eval(4.0, vec![-1.0, -2.0, -0.5]), a.clone()), AddOutcome::Added);
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.cuts()[0].constant, 6.0);
        assert!(!pool.duplicate_warning());
        assert_eq!(pool.add_cut(&eval(4.0, vec![-1.0, -2.0, -0.5]), a), AddOutcome::Duplicate);
        assert_eq!(pool.len(), 1);
        assert!(pool.duplicate_warning());
    }

    #[test]
    fn pooled_max_matches_direct_formula() {
        let mut pool = CutPool::new(4);
        let s1 = Support::new(vec![0, 2], 4).unwrap();
        let s2 = Support::new(vec![3], 4).unwrap();
        let g1 = vec![-1.0, -0.5, -2.0, -0.1];
        let g2 = vec![-0.3, -4.0, -0.2, -1.0];
        pool.add_cut(&eval(3.0, g1.clone()), s1.clone());
        pool.add_cut(&eval(5.0, g2.clone()), s2.clone());
        let s3 = Support::new(vec![1, 2], 4).unwrap();
        let direct = |v: f64, g: &[f64], a: &Support| {
            let (x, y) = (s3.indicator(4), a.indicator(4));
            v + g.iter().zip(x.iter().zip(&y)).map(|(gi, (xi, yi))| gi * (xi - yi)).sum::<f64>()
        };
        let expect = direct(3.0, &g1, &s1).max(direct(5.0, &g2, &s2));
        assert!((pool.value_at(&s3) - expect).abs() < 1e-12);
    }

    #[test]
    fn single_cut_bound_is_analytic() {
        let mut pool = CutPool::new(5);
        pool.push(Cut::new(Support::empty(), 10.0, vec![-5.0, -3.0, -1.0, -0.5, 0.0]));
        let b = node_bound(&pool, &Node::root(), 2).unwrap();
        assert_eq!(b, 2.0);
        // Node pinned to the anchor support: the bound is the cut value there.
        let anchor = Support::new(vec![1, 3], 5).unwrap();
        let mut pool = CutPool::new(5);
        pool.push(Cut::new(anchor, 7.5, vec![-5.0, -3.0, -1.0, -0.5, 0.0]));
        let node = Node::with_fixings(vec![1, 3], vec![0, 2, 4]);
        assert_eq!(node_bound(&pool, &node, 2).unwrap(), 7.5);
    }

    #[test]
    fn infeasible_node_signals_prune() {
        let mut pool = CutPool::new(4);
        pool.push(Cut::new(Support::empty(), 1.0, vec![-1.0; 4]));
        let node = Node::with_fixings(vec![0, 1, 2], vec![]);
        assert_eq!(node_bound(&pool, &node, 2).unwrap(), f64::INFINITY);
    }

    #[test]
    fn two_cut_bound_below_all_completions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let pool = random_pool(&mut rng, 4, 2);
            let root = Node::root();
            let b = node_bound(&pool, &root, 2).unwrap();
            let mut count = 0;
            let mut best = f64::INFINITY;
            for size in 0..=2 {
                for_each_combination(4, size, |idx| {
                    count += 1;
                    best = best.min(pool.value_at(&Support::from_sorted_unchecked(idx.to_vec())));
                });
            }
            assert_eq!(count, 11);
            assert!(b <= best + 1e-9, "bound {b} exceeds best completion {best}");
        }
    }

    #[test]
    fn single_cut_master_selects_steepest() {
        let mut pool = CutPool::new(5);
        pool.push(Cut::new(Support::empty(), 10.0, vec![-5.0, -3.0, -1.0, -0.5, 0.0]));
        let sol = solve_master(&mut pool, 2, None, &mut no_oracle, TreeMode::MultiTree, &MasterOptions::default()).unwrap();
        assert_eq!(sol.s.indices(), &[0, 1]);
        assert_eq!(sol.eta, 2.0);
        assert_eq!(sol.status, Status::Optimal);
    }

    #[test]
    fn full_budget_selects_all_negative_slopes() {
        let mut pool = CutPool::new(5);
        pool.push(Cut::new(Support::empty(), 10.0, vec![-5.0, 0.0, -1.0, -0.5, 0.0]));
        let sol = solve_master(&mut pool, 5, None, &mut no_oracle, TreeMode::MultiTree, &MasterOptions::default()).unwrap();
        assert_eq!(sol.eta, 3.5);
        assert_eq!(sol.s.indices(), &[0, 2, 3]);
    }

    #[test]
    fn multi_tree_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut pool = random_pool(&mut rng, 10, 5);
            let expect = brute_force(&pool, 3, &Node::root());
            let opts = MasterOptions { tol: 1e-9, ..Default::default() };
            let sol = solve_master(&mut pool, 3, None, &mut no_oracle, TreeMode::MultiTree, &opts).unwrap();
            assert_eq!(sol.status, Status::Optimal);
            assert!((sol.eta - expect).abs() <= 1e-9, "{} vs {}", sol.eta, expect);
            assert!((pool.value_at(&sol.s) - sol.eta).abs() <= 1e-9);
            assert!(sol.s.len() <= 3);
        }
    }

    #[test]
    fn node_limit_reports_valid_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pool = random_pool(&mut rng, 12, 8);
        let expect = brute_force(&pool, 4, &Node::root());
        let opts = MasterOptions {
            tol: 1e-9,
            limits: Limits { max_nodes: Some(2), ..Default::default() },
            ..Default::default()
        };
        let sol = solve_master(&mut pool, 4, None, &mut no_oracle, TreeMode::MultiTree, &opts).unwrap();
        assert!(sol.lower_bound <= expect + 1e-9);
        assert!(sol.value >= expect - 1e-9);
    }

    #[test]
    fn simplex_projection() {
        let w = project_simplex(&[0.2, 0.2, 0.2]);
        for v in &w {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(project_simplex(&[5.0, 0.0]), vec![1.0, 0.0]);
        let w = project_simplex(&[0.9, 0.6, -3.0]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((w[0] - 0.65).abs() < 1e-12 && (w[1] - 0.35).abs() < 1e-12 && w[2] == 0.0);
    }
}
