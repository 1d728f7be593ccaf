use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wreath_core::walk::DEFAULT_STATE_CAP;
use wreath_core::{
    annealed_moments, lamp_moment_table, plancherel_moments, word_enumeration_oracle, wreath_measure, FiniteMeasure,
    GroupSpec,
};

fn lamplighter() -> (FiniteMeasure<GroupSpec>, FiniteMeasure<GroupSpec>) {
    let base = FiniteMeasure::from_literals(GroupSpec::Z, [("1", "1"), ("-1", "1")]).unwrap();
    let lamp = FiniteMeasure::from_literals(GroupSpec::CyclicZmod { n: 2 }, [("1", "1")]).unwrap();
    (base, lamp)
}

fn moments(c: &mut Criterion) {
    let (base, lamp) = lamplighter();
    let wreath = wreath_measure(&base, &lamp).unwrap();
    let mut group = c.benchmark_group("lamplighter_moments");
    for order in [8usize, 12, 16] {
        group.bench_with_input(BenchmarkId::new("plancherel", order), &order, |b, &n| {
            b.iter(|| plancherel_moments(&wreath, n, DEFAULT_STATE_CAP).unwrap())
        });
        let table = lamp_moment_table(&lamp, order).unwrap();
        group.bench_with_input(BenchmarkId::new("annealed", order), &order, |b, &n| {
            b.iter(|| annealed_moments(&base, &table, n, DEFAULT_STATE_CAP).unwrap())
        });
    }
    let table = lamp_moment_table(&lamp, 10).unwrap();
    group.bench_function("enumeration/10", |b| b.iter(|| word_enumeration_oracle(&base, &table, 10, None).unwrap()));
    group.finish();
}

criterion_group!(benches, moments);
criterion_main!(benches);
