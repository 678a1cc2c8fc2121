use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use povm_gap::berezin::{berezin_gap, default_quadrature, QuantizationLevel};
use povm_gap::povm::{bottleneck, spectral_gap, BottleneckMode};
use povm_gap_bench::pure_povm;
use std::hint::black_box;

fn gap(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_gap");
    for (n, outcomes) in [(2, 4), (4, 16), (8, 64), (12, 144)] {
        let povm = pure_povm(n, outcomes, 1);
        group.bench_with_input(BenchmarkId::new("n", n), &povm, |b, p| {
            b.iter(|| spectral_gap(black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn exact_bottleneck(c: &mut Criterion) {
    let mut group = c.benchmark_group("bottleneck_exact");
    group.sample_size(10);
    for outcomes in [8, 12, 16] {
        let povm = pure_povm(3, outcomes, 2);
        group.bench_with_input(BenchmarkId::new("outcomes", outcomes), &povm, |b, p| {
            b.iter(|| bottleneck(black_box(p), BottleneckMode::Exact).unwrap())
        });
    }
    group.finish();
}

fn berezin(c: &mut Criterion) {
    let mut group = c.benchmark_group("berezin_gap");
    group.sample_size(10);
    for k in [4, 8, 16] {
        let quad = default_quadrature(QuantizationLevel::new(k).unwrap()).unwrap();
        group.bench_with_input(BenchmarkId::new("k", k), &quad, |b, q| {
            b.iter(|| berezin_gap(black_box(q)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gap, exact_bottleneck, berezin);
criterion_main!(benches);
