use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rsu_trust::fuzzy::{AssessmentKind, Assessor, FuzzyEngine, LookupGrid, LookupTable};
use rsu_trust_bench::sample_inputs;

fn assess(c: &mut Criterion) {
    let e = FuzzyEngine::default();
    c.bench_function("assess_worked_example", |b| {
        b.iter(|| e.assess(black_box(0.8), black_box(4), black_box(0.33), AssessmentKind::Reward))
    });
    let inputs = sample_inputs();
    c.bench_function("assess_grid_sample", |b| {
        b.iter(|| {
            inputs
                .iter()
                .map(|&(d, s, r)| e.assess(d, s, r, AssessmentKind::Punishment).unwrap())
                .sum::<f64>()
        })
    });
    let t = LookupTable::build(&e, LookupGrid::default()).unwrap();
    c.bench_function("lookup_nearest", |b| {
        b.iter(|| t.assess(black_box(0.8), black_box(4), black_box(0.33), AssessmentKind::Reward))
    });
}

fn build_lookup(c: &mut Criterion) {
    let e = FuzzyEngine::default();
    let mut g = c.benchmark_group("lookup");
    g.sample_size(10);
    g.bench_function("build_default_grid", |b| {
        b.iter(|| LookupTable::build(&e, LookupGrid::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, assess, build_lookup);
criterion_main!(benches);
