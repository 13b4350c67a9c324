use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use padic_series::adele::h_series_cross_check;
use padic_series::corpus::{run_grid, GridConfig, IdentityId};
use padic_series::exactnum::primes_up_to;
use padic_series::exactnum::rational::{frac, int};
use padic_series::par::Execution;

const MODES: [(&str, Execution); 2] = [
    ("parallel", Execution::Parallel),
    ("sequential", Execution::Sequential),
];

fn small_grid() -> GridConfig {
    let mut g = GridConfig::default_grid();
    g.only = Some(vec![IdentityId::A4, IdentityId::A12, IdentityId::A16]);
    g.precision = 12;
    g.a16.k = vec![2];
    g
}

fn corpus(c: &mut Criterion) {
    let grid = small_grid();
    let mut group = c.benchmark_group("corpus_grid");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| black_box(run_grid(&grid, mode)))
        });
    }
    group.finish();
}

fn h_series(c: &mut Criterion) {
    let primes = primes_up_to(50);
    let mut group = c.benchmark_group("h_series_primes_to_50");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| {
                black_box(
                    h_series_cross_check(2, 1, &int(1), &frac(1, 3), &primes, 10, mode).unwrap(),
                )
            })
        });
    }
    group.finish();
}

criterion_group!(benches, corpus, h_series);
criterion_main!(benches);
