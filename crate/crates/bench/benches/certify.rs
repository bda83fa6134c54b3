use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use supercon_core::certifier::{
    certify_expansion_lemma, certify_pair_lemma, default_expansion_intervals, ExpansionParams,
    GridOptions, PairParams,
};
use supercon_core::profiles::ProfileConstants;

fn grid(n: usize) -> GridOptions {
    GridOptions {
        grid_n: n,
        margin: 1e-4,
        keep_cells: false,
    }
}

fn pair(c: &mut Criterion) {
    let params = PairParams {
        delta: 0.325,
        gamma: 1.0,
        p: 0.45,
    };
    let mut g = c.benchmark_group("certify_pair");
    g.sample_size(10);
    for n in [100, 300, 1000] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| certify_pair_lemma(params, (0.3, 0.3322), &grid(black_box(n))).unwrap())
        });
    }
    g.finish();
}

fn expansion(c: &mut Criterion) {
    let constants = ProfileConstants::theorem3();
    let iv = default_expansion_intervals(&constants);
    let params = ExpansionParams {
        delta: 0.325,
        big_delta: 0.18,
    };
    let mut g = c.benchmark_group("certify_expansion");
    g.sample_size(10);
    for n in [100, 300] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| certify_expansion_lemma(params, &constants, &iv, &grid(black_box(n))).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, pair, expansion);
criterion_main!(benches);
