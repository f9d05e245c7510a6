use bandspec_core::certificate::{certificate_sweep, certify};
use bandspec_core::conjugation::conjugate_and_report;
use bandspec_core::enclosure::enclose_default;
use bandspec_core::{presets, CutoffFunction, TauPolicy};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn single(c: &mut Criterion) {
    let model = presets::m2();
    let tau = TauPolicy::Quarter;
    c.bench_function("enclose_default M2 n=200", |b| b.iter(|| enclose_default(black_box(&model), 200).unwrap()));
    c.bench_function("certify M2 n=200", |b| b.iter(|| certify(black_box(&model), 200, &tau).unwrap()));
}

fn sweep(c: &mut Criterion) {
    let model = presets::m1();
    let tau = TauPolicy::Quarter;
    let mut group = c.benchmark_group("pipelines");
    group.sample_size(10);
    group.bench_function("certificate_sweep M1 50..=200 N=800", |b| {
        b.iter(|| certificate_sweep(black_box(&model), &tau, 50..=200, 800).unwrap())
    });
    group.bench_function("conjugate_and_report M1 n=60", |b| {
        b.iter(|| conjugate_and_report(black_box(&model), 60, &tau, &CutoffFunction::smoothstep(), 98).unwrap())
    });
    group.finish();
}

criterion_group!(benches, single, sweep);
criterion_main!(benches);
