use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use asq_bench::fixture;
use asq_core::ManifoldKind;

fn bench_roundtrip(c: &mut Criterion) {
    let mut group = c.benchmark_group("synthesize_analyze");
    for (kind, res) in [
        (ManifoldKind::Torus1D, 1024),
        (ManifoldKind::Torus1D, 4096),
        (ManifoldKind::Torus2D, 128),
        (ManifoldKind::Torus2D, 256),
        (ManifoldKind::Sphere2D, 32),
        (ManifoldKind::Sphere2D, 64),
    ] {
        let f = fixture(kind, res);
        group.bench_with_input(
            BenchmarkId::new(format!("{kind:?}"), res),
            &f,
            |b, f| {
                b.iter(|| {
                    let nodal = f.synthesize();
                    std::hint::black_box(nodal.analyze().unwrap())
                })
            },
        );
    }
    group.finish();
}

fn bench_gradient(c: &mut Criterion) {
    let mut group = c.benchmark_group("gradient");
    for (kind, res) in [
        (ManifoldKind::Torus2D, 256),
        (ManifoldKind::Sphere2D, 64),
    ] {
        let f = fixture(kind, res);
        group.bench_with_input(BenchmarkId::new(format!("{kind:?}"), res), &f, |b, f| {
            b.iter(|| std::hint::black_box(f.gradient()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_roundtrip, bench_gradient);
criterion_main!(benches);
