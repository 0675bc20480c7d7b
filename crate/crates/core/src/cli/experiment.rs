//! Support-recovery sweeps: generate, solve, score, append one CSV row per
//! (method, sweep point, replication), then summarize.
//!
//! Rows are computed in chunks on the worker pool and written in sweep order,
//! so the file contents do not depend on the number of workers. A rerun skips
//! every row whose key is already present in the output.

use std::collections::{BTreeMap, HashSet};
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::baselines::{lasso_k_sparse, PathConfig};
use crate::datagen::{generate, SyntheticSpec};
use crate::master::Status;
use crate::metrics::support_metrics;
use crate::oracle::loss;
use crate::par::{with_threads, Exec};
use crate::solver::{solve_cardinality, SolveConfig};
use crate::Support;

/// A single value or a list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> Axis<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            Axis::One(v) => vec![v.clone()],
            Axis::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Lasso,
}

fn default_rho() -> Axis<f64> {
    Axis::One(0.0)
}

fn default_snr() -> Axis<f64> {
    Axis::One(20.0)
}

fn default_methods() -> Vec<Method> {
    vec![Method::Exact]
}

fn default_time_limit() -> f64 {
    60.0
}

fn default_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub n: Axis<usize>,
    pub p: Axis<usize>,
    pub k: Axis<usize>,
    #[serde(default = "default_rho")]
    pub rho: Axis<f64>,
    #[serde(default = "default_snr")]
    pub snr_sqrt: Axis<f64>,
    pub replications: usize,
    pub seed: u64,
    /// Ridge weight; `1/√n` when absent.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Per-solve wall-clock cap in seconds.
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    /// Per-solve node cap; gives reproducible results when it binds first.
    #[serde(default)]
    pub max_nodes: Option<u64>,
}

impl SweepSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec: SweepSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if spec.replications == 0 {
            bail!("replications must be at least 1");
        }
        if spec.methods.is_empty() {
            bail!("no methods selected");
        }
        Ok(spec)
    }

    fn gamma_for(&self, n: usize) -> f64 {
        self.gamma.unwrap_or(1.0 / (n as f64).sqrt())
    }

    /// Every (point, replication) in sweep order: `p, k, rho, snr, n`, then replication.
    pub fn tasks(&self) -> Vec<SyntheticSpec> {
        let mut out = Vec::new();
        for p in self.p.values() {
            for k in self.k.values() {
                for rho in self.rho.values() {
                    for snr_sqrt in self.snr_sqrt.values() {
                        for n in self.n.values() {
                            for replication in 0..self.replications as u64 {
                                out.push(SyntheticSpec { n, p, k, rho, snr_sqrt, seed: self.seed, replication });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub seed: u64,
    pub replication: u64,
    pub n: usize,
    pub p: usize,
    pub k_true: usize,
    pub k_used: usize,
    pub rho: f64,
    pub snr_sqrt: f64,
    pub gamma: f64,
    pub method: Method,
    pub accuracy_pct: f64,
    pub false_alarm_pct: f64,
    /// Ridge loss `c` at the selected support.
    pub objective: f64,
    pub lower_bound: f64,
    pub wall_time_s: f64,
    pub nodes: u64,
    pub cuts: usize,
    pub status: String,
    /// 1-based indices joined by `;`.
    pub support: String,
    pub truth: String,
}

type RowKey = (Method, usize, usize, usize, u64, u64, u64, u64);

impl ExperimentRow {
    fn key(&self) -> RowKey {
        key_of(self.method, &SyntheticSpec {
            n: self.n,
            p: self.p,
            k: self.k_true,
            rho: self.rho,
            snr_sqrt: self.snr_sqrt,
            seed: self.seed,
            replication: self.replication,
        })
    }

    pub fn support_set(&self) -> Result<Support> {
        parse_support(&self.support, self.p)
    }

    pub fn truth_set(&self) -> Result<Support> {
        parse_support(&self.truth, self.p)
    }
}

fn key_of(method: Method, t: &SyntheticSpec) -> RowKey {
    (method, t.n, t.p, t.k, t.rho.to_bits(), t.snr_sqrt.to_bits(), t.seed, t.replication)
}

fn format_support(s: &Support) -> String {
    s.to_one_based().iter().map(|j| j.to_string()).collect::<Vec<_>>().join(";")
}

fn parse_support(text: &str, p: usize) -> Result<Support> {
    let idx: Vec<usize> = text
        .split(';')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().with_context(|| format!("bad support entry {t:?}")))
        .collect::<Result<_>>()?;
    Ok(Support::from_one_based(&idx, p)?)
}

fn run_task(spec: &SweepSpec, task: &SyntheticSpec) -> Result<Vec<ExperimentRow>> {
    let inst = generate(task)?;
    let ds = &inst.dataset;
    let gamma = spec.gamma_for(task.n);
    let truth = format_support(&inst.support_true);
    let mut rows = Vec::new();
    for &method in &spec.methods {
        let row = |support: &Support, objective, lower_bound, wall_time_s, nodes, cuts, status: &str| -> Result<ExperimentRow> {
            let score = support_metrics(support, &inst.support_true, task.k)?;
            Ok(ExperimentRow {
                seed: task.seed,
                replication: task.replication,
                n: task.n,
                p: task.p,
                k_true: task.k,
                k_used: task.k,
                rho: task.rho,
                snr_sqrt: task.snr_sqrt,
                gamma,
                method,
                accuracy_pct: score.accuracy_pct,
                false_alarm_pct: score.false_alarm_pct,
                objective,
                lower_bound,
                wall_time_s,
                nodes,
                cuts,
                status: status.to_string(),
                support: format_support(support),
                truth: truth.clone(),
            })
        };
        match method {
            Method::Exact => {
                let cfg = SolveConfig {
                    tol: spec.tol,
                    time_limit: spec.time_limit,
                    max_nodes: spec.max_nodes,
                    exec: Exec::Sequential,
                    ..Default::default()
                };
                let res = solve_cardinality(ds, gamma, task.k, &cfg)?;
                rows.push(row(&res.support, res.objective, res.lower_bound, res.wall_time, res.nodes, res.cuts, res.status.as_str())?);
            }
            Method::Lasso => {
                let start = Instant::now();
                let fit = lasso_k_sparse(ds, task.k, &PathConfig::default_for(ds))?;
                let wall = start.elapsed().as_secs_f64();
                let s = fit.support();
                let status = if fit.exact { "exact_k" } else { "nearest_k" };
                // Zero is a valid bound on the loss; the Lasso certifies nothing better.
                rows.push(row(&s, loss(ds, gamma, &s)?, 0.0, wall, 0, 0, status)?);
            }
        }
    }
    Ok(rows)
}

pub fn read_rows(path: &Path) -> Result<Vec<ExperimentRow>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    rdr.deserialize().map(|r| r.with_context(|| format!("parsing {}", path.display()))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub n: usize,
    pub p: usize,
    pub k_true: usize,
    pub rho: f64,
    pub snr_sqrt: f64,
    pub replications: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub false_alarm_mean: f64,
    pub false_alarm_std: f64,
    pub wall_time_mean: f64,
    pub wall_time_std: f64,
    pub not_optimal: usize,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
    (m, var.sqrt())
}

/// Method, p, k, rho bits, snr bits, n.
type PointKey = (Method, usize, usize, u64, u64, usize);

/// Mean and sample standard deviation over replications, per method and sweep point.
pub fn summarize(rows: &[ExperimentRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<PointKey, Vec<&ExperimentRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.method, r.p, r.k_true, r.rho.to_bits(), r.snr_sqrt.to_bits(), r.n))
            .or_default()
            .push(r);
    }
    groups
        .into_values()
        .map(|g| {
            let col = |f: fn(&ExperimentRow) -> f64| g.iter().map(|r| f(r)).collect::<Vec<_>>();
            let (am, asd) = mean_std(&col(|r| r.accuracy_pct));
            let (fm, fsd) = mean_std(&col(|r| r.false_alarm_pct));
            let (tm, tsd) = mean_std(&col(|r| r.wall_time_s));
            let r0 = g[0];
            SummaryRow {
                method: r0.method,
                n: r0.n,
                p: r0.p,
                k_true: r0.k_true,
                rho: r0.rho,
                snr_sqrt: r0.snr_sqrt,
                replications: g.len(),
                accuracy_mean: am,
                accuracy_std: asd,
                false_alarm_mean: fm,
                false_alarm_std: fsd,
                wall_time_mean: tm,
                wall_time_std: tsd,
                not_optimal: g.iter().filter(|r| r.method == Method::Exact && r.status != Status::Optimal.as_str()).count(),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub rows_written: usize,
    pub rows_skipped: usize,
    pub summary_path: PathBuf,
}

/// `runs.csv` gets its summary at `runs.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.csv")
}

/// Runs the sweep on `jobs` workers (all cores when `None`), appending to `out`.
pub fn run_experiment(spec: &SweepSpec, out: &Path, jobs: Option<usize>) -> Result<ExperimentReport> {
    let fresh = !out.exists() || std::fs::metadata(out)?.len() == 0;
    let existing = if fresh { Vec::new() } else { read_rows(out)? };
    let done: HashSet<RowKey> = existing.iter().map(ExperimentRow::key).collect();
    let all = spec.tasks();
    let pending: Vec<SyntheticSpec> = all
        .iter()
        .filter(|t| spec.methods.iter().any(|m| !done.contains(&key_of(*m, t))))
        .cloned()
        .collect();
    let skipped = all.len() - pending.len();
    log::info!("{} tasks, {} already present, {} to run", all.len(), skipped, pending.len());

    let file = OpenOptions::new().create(true).append(true).open(out).with_context(|| format!("opening {}", out.display()))?;
    let mut writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    let chunk = jobs.unwrap_or(1).max(1) * 4;
    let mut written = 0;
    with_threads(jobs, || -> Result<()> {
        for (c, tasks) in pending.chunks(chunk).enumerate() {
            let results = Exec::Parallel.map_slice(tasks, |t| run_task(spec, t));
            for rows in results {
                for row in rows? {
                    if !done.contains(&row.key()) {
                        writer.serialize(&row)?;
                        written += 1;
                    }
                }
            }
            writer.flush()?;
            log::info!("chunk {} done, {} rows written", c + 1, written);
        }
        Ok(())
    })?;
    drop(writer);

    let summary = summarize(&read_rows(out)?);
    let path = summary_path(out);
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    for r in &summary {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(ExperimentReport { rows_written: written, rows_skipped: skipped, summary_path: path })
}
