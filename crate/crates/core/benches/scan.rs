//! Sequential against parallel execution for the three data-parallel drivers:
//! the per-prime cycle scan, the random-map experiment and the random
//! self-map baseline. Without the `parallel` feature both variants run
//! sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dbm_core::experiment::{run_experiment, ExperimentConfig};
use dbm_core::heuristics::random_endofunction_baseline;
use dbm_core::scan::cycle_scan;
use dbm_core::variety::text::parse_map;
use dbm_core::variety::IntPoint;
use dbm_core::Exec;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn bench_cycle_scan(c: &mut Criterion) {
    let phi = parse_map("ambient projective 1\nx1^2 + 5*x2^2\nx2^2\n").unwrap();
    let point = IntPoint::from_i64(&[1, 1]);
    let mut group = c.benchmark_group("cycle_scan");
    for bound in [2_000u64, 10_000] {
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, bound), &bound, |b, &bound| {
                b.iter(|| cycle_scan(&phi, &point, black_box(bound), 1_000_000, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_experiment(c: &mut Criterion) {
    let cfg = ExperimentConfig {
        count: 16,
        bound: 200,
        ..ExperimentConfig::default()
    };
    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| run_experiment(black_box(&cfg), exec).unwrap())
        });
    }
    group.finish();
}

fn bench_baseline(c: &mut Criterion) {
    let mut group = c.benchmark_group("baseline");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, 100_000), |b| {
            b.iter(|| random_endofunction_baseline(black_box(100_000), 200, 7, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_cycle_scan, bench_experiment, bench_baseline);
criterion_main!(benches);
