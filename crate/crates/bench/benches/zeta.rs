use crdet::zeta::{sphere_zeta_continued, zeta_extrapolated, zeta_prime_zero_sphere, zeta_truncated};
use crdet::SpectralSequence;
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn zeta(c: &mut Criterion) {
    let seq = SpectralSequence::sphere(100_000, 1.0);
    c.bench_function("continued s=0.5", |b| b.iter(|| sphere_zeta_continued(black_box(0.5), 20).unwrap()));
    c.bench_function("zeta'(0) closed form", |b| b.iter(|| zeta_prime_zero_sphere(black_box(30)).unwrap()));
    c.bench_function("truncated s=2, 1e5 levels", |b| b.iter(|| zeta_truncated(&seq, black_box(2.0), 100_000)));
    c.bench_function("extrapolated s=2, 1e5 levels", |b| {
        b.iter(|| zeta_extrapolated(&seq, black_box(2.0), 100_000).unwrap())
    });
}

criterion_group!(benches, zeta);
criterion_main!(benches);
