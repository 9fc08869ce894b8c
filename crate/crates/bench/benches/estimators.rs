use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tmc_bench::{mvn_inputs, SEED};
use tmc_core::{generate_mvn, mc_estimate, tmc_estimate, Field1d, Method, Ode1d};

fn mvn(c: &mut Criterion) {
    let mut group = c.benchmark_group("mvn");
    group.sample_size(10);
    for s in [128, 256, 512, 1024] {
        let (mu, factor) = mvn_inputs(s);
        for method in [Method::Mc, Method::Tmc] {
            group.bench_with_input(BenchmarkId::new(method.label(), s), &s, |b, &n| {
                b.iter(|| generate_mvn(method, mu.view(), &factor, black_box(n), SEED, 0).unwrap())
            });
        }
    }
    group.finish();
}

fn ode1d(c: &mut Criterion) {
    let mut group = c.benchmark_group("ode1d-uniform");
    group.sample_size(10);
    for n in [128, 512] {
        let f = Ode1d::new(Field1d::Uniform, n, n).unwrap().integrand();
        group.bench_with_input(BenchmarkId::new("MC", n), &n, |b, &n| {
            b.iter(|| mc_estimate(&f, black_box(n), SEED, 0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("TMC", n), &n, |b, &n| {
            b.iter(|| tmc_estimate(&f, black_box(n), SEED, 0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, mvn, ode1d);
criterion_main!(benches);
