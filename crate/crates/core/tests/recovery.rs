mod common;

use sparsereg::cli::experiment::{read_rows, run_experiment, summarize, Method, SweepSpec};
use sparsereg::datagen::{generate, generate_nonlinear, NonlinearSpec, SyntheticSpec};
use sparsereg::features::expand_features_with;
use sparsereg::metrics::{cross_validate_k, support_metrics, CvOptions};
use sparsereg::{solve_cardinality, Dataset, Exec, SolveConfig, Status};

#[test]
fn lifted_solve_finds_representable_terms() {
    let n = 300;
    let inst = generate_nonlinear(&NonlinearSpec { n, p: 20, rho: 0.0, snr_sqrt: 20.0, a: 0.0, seed: 0, replication: 0 }).unwrap();
    let lifted = expand_features_with(inst.dataset.x(), true, Exec::default());
    let ds = Dataset::new(lifted.psi_x, inst.dataset.y().clone()).unwrap();
    let gamma = 1.0 / (n as f64).sqrt();
    let four = solve_cardinality(&ds, gamma, 4, &SolveConfig::default()).unwrap();
    assert_eq!(four.status, Status::Optimal);
    assert_eq!(four.support, inst.representable_support);
    // A fifth slot goes to a transform of X2 that soaks up part of the cosine term.
    let five = solve_cardinality(&ds, gamma, 5, &SolveConfig::default()).unwrap();
    let score = support_metrics(&five.support, &inst.representable_support, 4).unwrap();
    assert_eq!(score.accuracy_pct, 100.0);
    let extra: Vec<&str> = five
        .support
        .indices()
        .iter()
        .filter(|j| !inst.representable_support.contains(**j))
        .map(|&j| lifted.names[j].as_str())
        .collect();
    assert_eq!(extra.len(), 1);
    assert!(extra[0].contains("X2"), "unexpected extra term {extra:?}");
}

#[test]
fn cross_validation_finds_true_k_on_noiseless_data() {
    let inst = generate(&SyntheticSpec { n: 120, p: 30, k: 4, rho: 0.0, snr_sqrt: 1e6, seed: 3, replication: 0 }).unwrap();
    let opts = CvOptions { folds: 5, seed: 1, solver: SolveConfig::default() };
    let cv = cross_validate_k(&inst.dataset, &[1.0], (1, 8), &opts, Exec::default()).unwrap();
    assert_eq!(cv.k, 4);
}

#[test]
fn sweep_accuracy_rises_with_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs.csv");
    let spec: SweepSpec = serde_json::from_value(serde_json::json!({
        "n": [8, 16, 40, 80],
        "p": 40,
        "k": 3,
        "replications": 6,
        "seed": 2,
        "max_nodes": 500,
    }))
    .unwrap();
    run_experiment(&spec, &out, None).unwrap();
    let summary = summarize(&read_rows(&out).unwrap());
    let acc: Vec<f64> = summary.iter().filter(|r| r.method == Method::Exact).map(|r| r.accuracy_mean).collect();
    assert_eq!(acc.len(), 4);
    assert!(acc[0] < 60.0, "{acc:?}");
    assert_eq!(acc[3], 100.0, "{acc:?}");
    assert!(acc.windows(2).all(|w| w[1] >= w[0] - 10.0), "{acc:?}");
}
