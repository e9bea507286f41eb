use criterion::{black_box, criterion_group, criterion_main, Criterion};

use fascop::copula::sample_copula;
use fascop::fas::{fas_cdf, jakes_correlation, FasConfig, NakagamiMarginal};
use fascop::mvn::{mvn_cdf, MvnOpts};
use fascop::specfun::{bessel_j0, erf, std_normal_quantile};

fn scalar_kernels(c: &mut Criterion) {
    c.bench_function("erf sweep", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            let mut x = -6.0;
            while x < 6.0 {
                acc += erf(black_box(x));
                x += 0.001;
            }
            acc
        })
    });
    c.bench_function("normal quantile sweep", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 1..10_000 {
                acc += std_normal_quantile(black_box(i as f64 / 10_000.0)).unwrap();
            }
            acc
        })
    });
    c.bench_function("bessel_j0 mixed range", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            let mut x = 0.0;
            while x < 60.0 {
                acc += bessel_j0(black_box(x));
                x += 0.05;
            }
            acc
        })
    });
}

fn mvn_and_channel(c: &mut Criterion) {
    let opts = MvnOpts::with_tol(1e-4);
    let corr4 = jakes_correlation(&FasConfig::new(4, 1.0).unwrap());
    c.bench_function("mvn_cdf K=4 tol 1e-4", |b| {
        b.iter(|| mvn_cdf(black_box(&[-0.5, -0.5, -0.5, -0.5]), &corr4, &opts).unwrap())
    });
    let corr8 = jakes_correlation(&FasConfig::new(8, 0.5).unwrap());
    c.bench_function("mvn_cdf K=8 tol 1e-4", |b| {
        b.iter(|| mvn_cdf(black_box(&[-1.3; 8]), &corr8, &opts).unwrap())
    });

    let cfg = FasConfig::new(4, 0.5).unwrap();
    let nak = NakagamiMarginal::new(1.0, 1.0).unwrap();
    c.bench_function("fas_cdf K=4 tol 1e-4", |b| {
        b.iter(|| fas_cdf(black_box(0.7), &cfg, &nak, &opts).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    let corr = jakes_correlation(&FasConfig::new(4, 1.0).unwrap());
    c.bench_function("sample_copula 10k x 4", |b| {
        b.iter(|| sample_copula(black_box(&corr), 10_000, 42).unwrap())
    });
}

criterion_group!(benches, scalar_kernels, mvn_and_channel, sampling);
criterion_main!(benches);
