use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use povm_gap::geometry::wasserstein;
use povm_gap_bench::cloud;
use std::hint::black_box;

fn wasserstein_clouds(c: &mut Criterion) {
    let mut group = c.benchmark_group("wasserstein");
    group.sample_size(10);
    for points in [100, 200, 500] {
        let a = cloud(3, points, 10);
        let b = cloud(3, points, 11);
        group.bench_with_input(BenchmarkId::new("points", points), &(a, b), |bench, (a, b)| {
            bench.iter(|| wasserstein(black_box(a), black_box(b)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, wasserstein_clouds);
criterion_main!(benches);
