//! Command-line front end: `solve`, `gen`, `experiment` and `cv`.

pub mod experiment;
pub mod io;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::datagen::{generate, SyntheticSpec};
use crate::features::expand_features_with;
use crate::master::TreeMode;
use crate::metrics::{cross_validate_k, default_gamma_grid, CvOptions};
use crate::par::{with_threads, Exec};
use crate::solver::{solve_cardinality, solve_penalized, SolveConfig, SolveResult, WarmStart};
use crate::Dataset;

#[derive(Debug, Parser)]
#[command(name = "sparsereg", version, about = "Exact sparse ridge regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance to certified optimality.
    Solve(SolveArgs),
    /// Write a synthetic instance.
    Gen(GenArgs),
    /// Run a support-recovery sweep.
    Experiment(ExperimentArgs),
    /// Choose k (and gamma) by cross-validation.
    Cv(CvArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Single,
    Multi,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WarmArg {
    Dual,
    Lasso,
    None,
}

#[derive(Debug, Args)]
pub struct SolverFlags {
    /// Relative optimality tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 60.0)]
    pub time_limit: f64,
    #[arg(long)]
    pub max_nodes: Option<u64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Single)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = WarmArg::Dual)]
    pub warm: WarmArg,
    /// Lift every column through the eight-transform dictionary first.
    #[arg(long)]
    pub expand_features: bool,
    /// Standardize lifted columns (only with --expand-features).
    #[arg(long)]
    pub standardize: bool,
}

impl SolverFlags {
    fn config(&self) -> SolveConfig {
        SolveConfig {
            tol: self.tol,
            time_limit: self.time_limit,
            max_nodes: self.max_nodes,
            mode: match self.mode {
                ModeArg::Single => TreeMode::SingleTree,
                ModeArg::Multi => TreeMode::MultiTree,
            },
            warm_start: match self.warm {
                WarmArg::Dual => WarmStart::DualRelaxation,
                WarmArg::Lasso => WarmStart::Lasso,
                WarmArg::None => WarmStart::None,
            },
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub gamma: f64,
    /// Solve the penalized problem with this per-feature cost instead of a budget.
    #[arg(long, value_name = "LAMBDA")]
    pub penalized: Option<f64>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 20.0)]
    pub snr_sqrt: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub replication: u64,
    /// Files are written to `<prefix>X.csv`, `<prefix>Y.csv` and `<prefix>truth.json`.
    #[arg(long)]
    pub out_prefix: String,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub k_min: usize,
    #[arg(long)]
    pub k_max: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Comma-separated; defaults to {0.01, 0.1, 1, 10}/√n.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub gamma_grid: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(a) => run_solve(&a),
        Command::Gen(a) => run_gen(&a),
        Command::Experiment(a) => {
            let spec = experiment::SweepSpec::from_file(&a.spec)?;
            let rep = experiment::run_experiment(&spec, &a.out, a.jobs)?;
            log::info!(
                "{} rows written, {} tasks skipped, summary at {}",
                rep.rows_written,
                rep.rows_skipped,
                rep.summary_path.display()
            );
            Ok(())
        }
        Command::Cv(a) => run_cv(&a),
    }
}

/// Reads the data and lifts it when asked; returns the dataset and column names.
fn load(x: &Path, y: &Path, flags: &SolverFlags) -> Result<(Dataset, Vec<String>)> {
    let xm = io::read_matrix(x)?;
    let yv = io::read_vector(y)?;
    if flags.expand_features {
        let fx = expand_features_with(&xm, flags.standardize, Exec::default());
        Ok((Dataset::new(fx.psi_x, yv)?, fx.names))
    } else {
        if flags.standardize {
            bail!("--standardize requires --expand-features");
        }
        let names = (1..=xm.ncols()).map(|j| format!("X{j}")).collect();
        Ok((Dataset::new(xm, yv)?, names))
    }
}

#[derive(Serialize)]
struct ResultFile<'a> {
    objective: f64,
    lower_bound: f64,
    /// 1-based.
    support: Vec<usize>,
    support_names: Vec<&'a str>,
    coefficients: &'a [f64],
    cuts: usize,
    nodes: u64,
    wall_time_s: f64,
    status: &'static str,
    config: serde_json::Value,
}

fn result_file<'a>(res: &'a SolveResult, names: &'a [String], config: serde_json::Value) -> ResultFile<'a> {
    ResultFile {
        objective: res.objective,
        lower_bound: res.lower_bound,
        support: res.support.to_one_based(),
        support_names: res.support.indices().iter().map(|&j| names[j].as_str()).collect(),
        coefficients: &res.coefficients,
        cuts: res.cuts,
        nodes: res.nodes,
        wall_time_s: res.wall_time,
        status: res.status.as_str(),
        config,
    }
}

fn run_solve(a: &SolveArgs) -> Result<()> {
    let (ds, names) = load(&a.x, &a.y, &a.solver)?;
    let cfg = a.solver.config();
    let res = match (a.penalized, a.k) {
        (Some(lambda), _) => solve_penalized(&ds, a.gamma, lambda, &cfg)?,
        (None, Some(k)) => solve_cardinality(&ds, a.gamma, k, &cfg)?,
        (None, None) => bail!("either --k or --penalized is required"),
    };
    log::info!("status {} objective {} gap {}", res.status.as_str(), res.objective, res.gap());
    let config = json!({
        "x": a.x, "y": a.y, "n": ds.n(), "p": ds.p(),
        "k": a.k, "gamma": a.gamma, "penalized": a.penalized,
        "solver": cfg, "expand_features": a.solver.expand_features, "standardize": a.solver.standardize,
    });
    io::write_json(&a.out, &result_file(&res, &names, config))
}

fn run_gen(a: &GenArgs) -> Result<()> {
    let spec = SyntheticSpec { n: a.n, p: a.p, k: a.k, rho: a.rho, snr_sqrt: a.snr_sqrt, seed: a.seed, replication: a.replication };
    let inst = generate(&spec)?;
    let path = |name: &str| PathBuf::from(format!("{}{}", a.out_prefix, name));
    if let Some(dir) = path("X.csv").parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    io::write_matrix(&path("X.csv"), inst.dataset.x())?;
    io::write_vector(&path("Y.csv"), inst.dataset.y())?;
    let signs: Vec<f64> = inst.support_true.indices().iter().map(|&j| inst.w_true[j]).collect();
    let truth = json!({
        "support": inst.support_true.to_one_based(),
        "signs": signs,
        "sigma2_effective": inst.sigma2_effective,
        "spec": spec,
    });
    io::write_json(&path("truth.json"), &truth)
}

fn run_cv(a: &CvArgs) -> Result<()> {
    let (ds, names) = load(&a.x, &a.y, &a.solver)?;
    let grid = if a.gamma_grid.is_empty() { default_gamma_grid(ds.n()) } else { a.gamma_grid.clone() };
    let opts = CvOptions { folds: a.folds, seed: a.seed, solver: a.solver.config() };
    let cv = with_threads(a.jobs, || cross_validate_k(&ds, &grid, (a.k_min, a.k_max), &opts, Exec::Parallel))?;
    let fit = solve_cardinality(&ds, cv.gamma, cv.k, &opts.solver)?;
    let out = json!({
        "k": cv.k,
        "gamma": cv.gamma,
        "cells": cv.cells,
        "fit": result_file(&fit, &names, json!({"folds": a.folds, "seed": a.seed, "gamma_grid": grid, "solver": opts.solver})),
    });
    io::write_json(&a.out, &out)
}
