use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hindman_core::ordinals::{greedy_mono_sequence, ord_add};
use hindman_core::{CnfOrdinal, DisjointFamily, OrdinalColoring, Universe, Word};

fn fu_closure(c: &mut Criterion) {
    let u = Universe::new(20).unwrap();
    let singletons: Vec<_> = (0..12).map(|i| u.make_set([i]).unwrap()).collect();
    let fam = DisjointFamily::new(singletons).unwrap();
    c.bench_function("fu_closure/12", |b| b.iter(|| black_box(&fam).fu_closure().unwrap()));
}

fn word_reduction(c: &mut Criterion) {
    let x: Word = "g0 g1 g2 g3 g4 g5 g6 g7".parse().unwrap();
    let y = x.inverse();
    let z: Word = "g7^-1 g6^-1 g9 g9".parse().unwrap();
    c.bench_function("concat_reduce/full_cancel", |b| b.iter(|| black_box(&x).concat_reduce(black_box(&y))));
    c.bench_function("concat_reduce/partial", |b| b.iter(|| black_box(&x).concat_reduce(black_box(&z))));
}

fn ordinals(c: &mut Criterion) {
    let a: CnfOrdinal = "w^3*2+w*5+7".parse().unwrap();
    let d: CnfOrdinal = "w^3+w^2*4+1".parse().unwrap();
    c.bench_function("ord_add", |b| b.iter(|| ord_add(black_box(&a), black_box(&d))));
    let bound = CnfOrdinal::omega_pow(5);
    c.bench_function("greedy_mono_sequence/w^5", |b| {
        b.iter(|| greedy_mono_sequence(&OrdinalColoring::SeededRandom { seed: 1 }, &bound, 5, 8).unwrap())
    });
}

criterion_group!(benches, fu_closure, word_reduction, ordinals);
criterion_main!(benches);
