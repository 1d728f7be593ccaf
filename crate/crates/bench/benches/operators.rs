use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use wreath_core::finite::{verify_unitary_equivalence, DEFAULT_BASIS_CAP};
use wreath_core::green::{random_hermitian, rank_one_check};
use wreath_core::schrodinger::{dos_estimate, DosMode};
use wreath_core::{FiniteMeasure, GroupSpec};

fn measure(g: GroupSpec, atoms: &[(&str, &str)]) -> FiniteMeasure<GroupSpec> {
    FiniteMeasure::from_literals(g, atoms.iter().copied()).unwrap()
}

fn dos(c: &mut Criterion) {
    let base = measure(GroupSpec::Z, &[("1", "1"), ("-1", "1")]);
    let lamp = measure(GroupSpec::CyclicZmod { n: 2 }, &[("1", "1")]);
    let mut group = c.benchmark_group("dos");
    group.sample_size(20);
    group.bench_function("moments/R40x200", |b| {
        b.iter(|| dos_estimate(&base, &lamp, 40, 200, 1, DosMode { order: 8, eigen: false, dense_cap: 4096 }).unwrap())
    });
    group.bench_function("eigen/R40x50", |b| {
        b.iter(|| dos_estimate(&base, &lamp, 40, 50, 1, DosMode { order: 8, eigen: true, dense_cap: 4096 }).unwrap())
    });
    group.finish();
}

fn finite(c: &mut Criterion) {
    let base = measure(GroupSpec::CyclicZmod { n: 2 }, &[("1", "1")]);
    let lamp = measure(GroupSpec::CyclicZmod { n: 4 }, &[("1", "1"), ("3", "1")]);
    c.bench_function("verify_finite/Z4_wr_Z2", |b| {
        b.iter(|| verify_unitary_equivalence(&base, &lamp, DEFAULT_BASIS_CAP).unwrap())
    });
}

fn resolvent(c: &mut Criterion) {
    let h = random_hermitian(50, 1, 0);
    c.bench_function("rank_one/dim50", |b| b.iter(|| rank_one_check(&h, 7, 1.3, Complex64::new(0.2, 0.1)).unwrap()));
}

criterion_group!(benches, dos, finite, resolvent);
criterion_main!(benches);
