use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hindman_core::search::{max_mono_fu_family, min_universe_for_mono_pair_with, MonoPairMethod};
use hindman_core::{SearchConfig, SetColoring, Universe};

fn log_parity_sizes(c: &mut Criterion) {
    let mut group = c.benchmark_group("log_parity");
    for n in [8u32, 21, 40] {
        let cfg = SearchConfig::new(Universe::new(n).unwrap(), SetColoring::LogParity);
        group.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| {
            b.iter(|| max_mono_fu_family(black_box(cfg)).unwrap())
        });
    }
    group.finish();
}

fn generic_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("generic");
    group.sample_size(20);
    for n in [6u32, 8, 10] {
        let cfg = SearchConfig::new(Universe::new(n).unwrap(), SetColoring::SeededRandom { seed: 3 });
        group.bench_with_input(BenchmarkId::new("random", n), &cfg, |b, cfg| {
            b.iter(|| max_mono_fu_family(black_box(cfg)).unwrap())
        });
    }
    let cfg = SearchConfig::new(Universe::new(10).unwrap(), SetColoring::LogParity).without_symmetry();
    group.bench_function("log_parity_no_symmetry/10", |b| b.iter(|| max_mono_fu_family(black_box(&cfg)).unwrap()));
    group.finish();
}

fn min_n(c: &mut Criterion) {
    let mut group = c.benchmark_group("hindman_min_n");
    group.sample_size(10);
    for method in [MonoPairMethod::Naive, MonoPairMethod::Bitmask] {
        group.bench_function(format!("{method:?}/4"), |b| {
            b.iter(|| min_universe_for_mono_pair_with(black_box(4), method).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, log_parity_sizes, generic_search, min_n);
criterion_main!(benches);
