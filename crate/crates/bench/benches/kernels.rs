use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use renorm_core::characteristic::{f_limit, g_r, phi_n};
use renorm_core::diagrams::{verify_renorm_identity, wick_moments};
use renorm_core::partition::{z_n, z_renormalized};
use renorm_core::regulator::kappa;
use renorm_core::{QuadratureConfig, Regulator, Spectrum};

fn characteristic(c: &mut Criterion) {
    let h = Spectrum::harmonic();
    c.bench_function("phi_n harmonic n=1e5", |b| b.iter(|| phi_n(&h, black_box(1.0), 100_000)));
    c.bench_function("f_limit harmonic", |b| b.iter(|| f_limit(&h, black_box(1.0), 1e-12).unwrap()));
    c.bench_function("g_r harmonic", |b| b.iter(|| g_r(&h, 0.5772, black_box(1.0), 1e-12).unwrap()));
}

fn regulator(c: &mut Criterion) {
    let h = Spectrum::harmonic();
    let sharp = Regulator::SharpCutoff { a: 1.0 };
    c.bench_function("kappa harmonic sharp 1e-10", |b| {
        b.iter(|| kappa(&h, &sharp, black_box(1e-10)).unwrap())
    });
}

fn partition(c: &mut Criterion) {
    let h = Spectrum::harmonic();
    let q = QuadratureConfig::default();
    let mut group = c.benchmark_group("partition");
    group.sample_size(20);
    group.bench_function("z_n n=1000", |b| b.iter(|| z_n(&h, black_box(1.0), 1000, &q).unwrap()));
    group.bench_function("z_renormalized", |b| {
        b.iter(|| z_renormalized(&h, 0.5772156649, black_box(1.0), 0.0, &q).unwrap())
    });
    group.finish();
}

fn diagrams(c: &mut Criterion) {
    let mut group = c.benchmark_group("diagrams");
    group.sample_size(10);
    group.bench_function("wick_moments k=20", |b| b.iter(|| wick_moments(black_box(20))));
    group.bench_function("identity n=12", |b| b.iter(|| verify_renorm_identity(black_box(12))));
    group.finish();
}

criterion_group!(benches, characteristic, regulator, partition, diagrams);
criterion_main!(benches);
