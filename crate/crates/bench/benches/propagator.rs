use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use floquet_aah::spectral::certified_eigenvalues;
use floquet_aah::{critical_h, eigendecompose, one_period, ModelParams, SearchSettings};

fn drive(sites: usize, h: f64, omega: f64) -> ModelParams {
    ModelParams::new(sites).unwrap().with_h(h).unwrap().with_omega(omega).unwrap()
}

fn propagator(c: &mut Criterion) {
    let mut group = c.benchmark_group("one_period");
    for sites in [89, 233, 610] {
        let p = drive(sites, 0.8, 3.6);
        group.bench_function(sites.to_string(), |b| b.iter(|| one_period(black_box(&p)).unwrap()));
    }
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let p = drive(233, 0.8, 3.6);
    let u = one_period(&p).unwrap();
    let mut group = c.benchmark_group("spectrum_233");
    group.sample_size(10);
    group.bench_function("eigenvalues", |b| b.iter(|| certified_eigenvalues(black_box(&u)).unwrap()));
    group.bench_function("eigendecompose", |b| b.iter(|| eigendecompose(black_box(&u), p.omega()).unwrap()));
    group.finish();
}

fn search(c: &mut Criterion) {
    let p = drive(89, 0.0, 10.0);
    let settings = SearchSettings::default();
    let mut group = c.benchmark_group("critical_h");
    group.sample_size(10);
    group.bench_function("89_sites", |b| b.iter(|| critical_h(black_box(&p), 10.0, &settings).unwrap()));
    group.finish();
}

criterion_group!(benches, propagator, spectrum, search);
criterion_main!(benches);
