use bandspec_bench::random_band;
use bandspec_core::linalg::{eigenvalues, eigenvalues_dense_oracle, truncation_stability_batch};
use bandspec_core::{presets, EigenRange};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn band_vs_dense(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigenvalues");
    for order in [50, 100, 200] {
        let band = random_band(order, 3, 11);
        let dense = band.to_dense_symmetric();
        group.bench_with_input(BenchmarkId::new("band", order), &band, |b, m| {
            b.iter(|| eigenvalues(black_box(m), EigenRange::All).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dense_oracle", order), &dense, |b, m| {
            b.iter(|| eigenvalues_dense_oracle(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn stability(c: &mut Criterion) {
    let model = presets::m1();
    c.bench_function("truncation_stability_batch M1 1..=200 N=800", |b| {
        b.iter(|| truncation_stability_batch(black_box(&model), 1..=200, 800).unwrap())
    });
}

criterion_group!(benches, band_vs_dense, stability);
criterion_main!(benches);
