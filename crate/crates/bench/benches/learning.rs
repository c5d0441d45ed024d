use chrism_bench::fixture;
use chrism_core::{em_learn, parse_observations, parse_program, EmConfig, ExecutionStrategy};
use criterion::{criterion_group, criterion_main, Criterion};

fn learn_rps(c: &mut Criterion) {
    let p = parse_program(&fixture("rps.chrism")).unwrap();
    let data = parse_observations(&fixture("rps.obs")).unwrap();
    let s = ExecutionStrategy::refined(&p);
    c.bench_function("em/rps", |b| {
        b.iter(|| em_learn(&p, &data, &s, &p.switches, &EmConfig::default()).unwrap())
    });
}

criterion_group!(benches, learn_rps);
criterion_main!(benches);
