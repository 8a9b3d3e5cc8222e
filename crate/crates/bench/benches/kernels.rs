use std::hint::black_box;

use clt_lab::dist::discretize_normal;
use clt_lab::metrics::{kolmogorov_normal, prokhorov, prokhorov_normal, wasserstein_normal};
use clt_lab::stein::evaluate_stein;
use clt_lab::{ArrayFamily, TestFunction};
use criterion::{criterion_group, criterion_main, Criterion};

fn row_sums(c: &mut Criterion) {
    let mut g = c.benchmark_group("row_sum");
    g.sample_size(10);
    g.bench_function("rademacher_exact_n1000", |b| {
        b.iter(|| {
            ArrayFamily::Rademacher
                .row_sum_exact(black_box(1000), 1e-12)
                .unwrap()
        })
    });
    let jump = ArrayFamily::jump(0.4).unwrap();
    g.bench_function("jump04_exact_n500", |b| {
        b.iter(|| jump.row_sum_exact(black_box(500), 1e-12).unwrap())
    });
    g.bench_function("jump04_sample_n500_reps1e5", |b| {
        b.iter(|| jump.row_sum_sample(black_box(500), 100_000, 7).unwrap())
    });
    g.finish();
}

fn metrics(c: &mut Criterion) {
    let row = ArrayFamily::jump(0.4)
        .unwrap()
        .row_sum_exact(500, 1e-12)
        .unwrap()
        .law;
    let reference = discretize_normal(10_000).unwrap();
    let mut g = c.benchmark_group("metrics");
    g.bench_function("kolmogorov_normal", |b| {
        b.iter(|| kolmogorov_normal(black_box(&row)))
    });
    g.bench_function("wasserstein_normal", |b| {
        b.iter(|| wasserstein_normal(black_box(&row)))
    });
    g.bench_function("prokhorov_normal", |b| {
        b.iter(|| prokhorov_normal(black_box(&row), 1.0, 1e-6).unwrap())
    });
    g.sample_size(20);
    g.bench_function("prokhorov_discretized_reference", |b| {
        b.iter(|| prokhorov(black_box(&row), &reference, 1.0, 1e-6).unwrap())
    });
    g.finish();
}

fn stein(c: &mut Criterion) {
    let mut g = c.benchmark_group("stein");
    g.sample_size(10);
    g.bench_function("evaluate_sigmoid", |b| {
        b.iter(|| evaluate_stein(black_box(&TestFunction::Sigmoid)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, row_sums, metrics, stein);
criterion_main!(benches);
