//! Benchmarks for the numerical kernels: quadrature construction, the
//! Legendre spectrum, one Euler-Lagrange sweep and a short density scan.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use onsager_core::{
    el_map, gauss_legendre, make_angular, scan, spectrum_quadrature, spectrum_sinpow_exact,
    AngularFamily, AzimuthalKernel, OrientationProfile, ScanConfig,
};

fn bench_quadrature(c: &mut Criterion) {
    c.bench_function("gauss_legendre_256", |b| {
        b.iter(|| gauss_legendre(std::hint::black_box(256)).unwrap())
    });
}

fn bench_spectrum(c: &mut Criterion) {
    let g = make_angular(AngularFamily::Onsager).unwrap();
    c.bench_function("spectrum_onsager_l40_n256", |b| {
        b.iter(|| spectrum_quadrature(&g, 40, 256).unwrap())
    });
}

fn bench_el_map(c: &mut Criterion) {
    let s = spectrum_sinpow_exact(1, 20).unwrap();
    let rule = Arc::new(gauss_legendre(128).unwrap());
    let vals: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|&u| (2.0 * u * u).exp())
        .collect();
    let f = OrientationProfile::new(rule, vals).unwrap();
    c.bench_function("el_map_n128_l20", |b| {
        b.iter(|| el_map(&f, &s, 8.0, 1.0).unwrap())
    });
}

fn bench_azimuthal_kernel(c: &mut Criterion) {
    let g = make_angular(AngularFamily::Onsager).unwrap();
    let rule = gauss_legendre(64).unwrap();
    c.bench_function("azimuthal_kernel_n64_m64", |b| {
        b.iter(|| AzimuthalKernel::new(&rule, &g, 64))
    });
}

fn bench_scan(c: &mut Criterion) {
    let s = spectrum_sinpow_exact(1, 12).unwrap();
    let rule = Arc::new(gauss_legendre(48).unwrap());
    c.bench_function("scan_maier_saupe_5pts", |b| {
        b.iter_batched(
            || ScanConfig::new(6.0, 8.0, 5, 1.0),
            |config| scan(&rule, &s, &config).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_quadrature,
    bench_spectrum,
    bench_el_map,
    bench_azimuthal_kernel,
    bench_scan
);
criterion_main!(benches);
