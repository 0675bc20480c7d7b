use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use sparsereg::datagen::{generate, SyntheticSpec};
use sparsereg::features::expand_features_with;
use sparsereg::metrics::{cross_validate_k, CvOptions};
use sparsereg::oracle::gradient_at;
use sparsereg::{Exec, SolveConfig};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn instance(n: usize, p: usize, k: usize) -> sparsereg::Dataset {
    generate(&SyntheticSpec { n, p, k, rho: 0.1, snr_sqrt: 20.0, seed: 1, replication: 0 })
        .expect("valid spec")
        .dataset
}

fn gradient(c: &mut Criterion) {
    let mut group = c.benchmark_group("gradient");
    for p in [1_000usize, 10_000] {
        let ds = instance(500, p, 10);
        let alpha: Vec<f64> = ds.y().iter().map(|v| 0.5 * v).collect();
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, p), &p, |b, _| {
                b.iter(|| gradient_at(black_box(&ds), 0.1, black_box(&alpha), exec))
            });
        }
    }
    group.finish();
}

fn features(c: &mut Criterion) {
    let ds = instance(1_000, 200, 5);
    let mut group = c.benchmark_group("expand_features");
    for (name, exec) in POLICIES {
        group.bench_function(name, |b| b.iter(|| expand_features_with(black_box(ds.x()), true, exec)));
    }
    group.finish();
}

fn cross_validation(c: &mut Criterion) {
    let ds = instance(120, 60, 4);
    let opts = CvOptions { folds: 4, seed: 0, solver: SolveConfig { time_limit: 5.0, ..Default::default() } };
    let grid = [0.05, 0.5];
    let mut group = c.benchmark_group("cross_validate_k");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(name, |b| b.iter(|| cross_validate_k(black_box(&ds), &grid, (1, 6), &opts, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, gradient, features, cross_validation);
criterion_main!(benches);
