use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tlp_bench::reference_models;
use tlp_core::moments::truncated_moment_log;
use tlp_core::stats::{sorted, std_normal_cdf};
use tlp_core::{ks_statistic, limit_sample, make_limit_law, sample_trimmed, RngStream, Scheme, SimOptions};

fn bench_sampler(c: &mut Criterion) {
    let opts = SimOptions::default();
    let mut g = c.benchmark_group("sample_trimmed");
    g.sample_size(20);
    for (name, model) in reference_models() {
        let mut i = 0u64;
        g.bench_function(format!("{name}/r=500"), |b| {
            b.iter(|| {
                i += 1;
                sample_trimmed(&model, 500, 1.0, RngStream::new(1, i), &opts).unwrap()
            })
        });
    }
    g.finish();
}

fn bench_moments(c: &mut Criterion) {
    let mut g = c.benchmark_group("truncated_moment_quadrature");
    for (name, model) in reference_models() {
        g.bench_function(name, |b| {
            b.iter(|| truncated_moment_log(&model, 2.0, black_box(-3.0), true).unwrap())
        });
    }
    g.finish();
}

fn bench_ks(c: &mut Criterion) {
    let law = make_limit_law(Scheme::G0DetScale, 0.0, None, 1.0).unwrap();
    let xs = sorted(limit_sample(&law, RngStream::new(3, 0), 20_000).iter().map(|p| p[0]));
    c.bench_function("ks_statistic/n=20000", |b| b.iter(|| ks_statistic(black_box(&xs), std_normal_cdf).unwrap()));
}

criterion_group!(benches, bench_sampler, bench_moments, bench_ks);
criterion_main!(benches);
