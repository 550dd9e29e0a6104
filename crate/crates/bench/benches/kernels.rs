use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use parametrix::bounds::{phi_envelope, upper_estimate_series};
use parametrix::gaussian_core::heat_kernel;
use parametrix::parametrix_engine::{phi1, ForwardKernel};
use parametrix::singular_quadrature::gauss_jacobi;
use parametrix::special_functions::{mittag_leffler, MLParams};
use parametrix_bench::{config, pair, unit_drift};

fn pointwise(c: &mut Criterion) {
    let p = pair();
    let d = unit_drift();
    c.bench_function("heat_kernel", |b| b.iter(|| heat_kernel(black_box(0.5), black_box(1.5))));
    c.bench_function("phi1", |b| b.iter(|| phi1(black_box(&p), &d)));
    let ml = MLParams::new(0.75, 1.0).unwrap();
    c.bench_function("mittag_leffler", |b| b.iter(|| mittag_leffler(ml, black_box(3.0))));
    c.bench_function("phi_envelope", |b| b.iter(|| phi_envelope(black_box(&p), 0.5, 1.0, 0.5)));
    c.bench_function("upper_estimate_series", |b| {
        b.iter(|| upper_estimate_series(black_box(&p), 0.5, 0.1, 0.5))
    });
}

fn quadrature(c: &mut Criterion) {
    c.bench_function("gauss_jacobi_20", |b| b.iter(|| gauss_jacobi(black_box(20), -0.25, -0.75)));
}

fn engine(c: &mut Criterion) {
    let d = unit_drift();
    let mut g = c.benchmark_group("forward_kernel");
    g.sample_size(10);
    for m in [1, 2] {
        let cfg = config(m);
        g.bench_function(format!("build_m{m}"), |b| {
            b.iter(|| ForwardKernel::new(&d, &cfg, 0.0, -0.5, 0.5).unwrap())
        });
    }
    let k = ForwardKernel::new(&d, &config(4), 0.0, -0.5, 0.5).unwrap();
    g.bench_function("eval_m4", |b| b.iter(|| k.eval(black_box(0.5), black_box(1.0))));
    g.finish();
}

criterion_group!(benches, pointwise, quadrature, engine);
criterion_main!(benches);
