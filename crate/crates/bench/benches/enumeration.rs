use chrism_bench::{fixture, graph_query};
use chrism_core::{distribution, parse_program, parse_query, ExecutionStrategy, Limits};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn enumerate_graphs(c: &mut Criterion) {
    let p = parse_program(&fixture("random_graph.chrism")).unwrap();
    let s = ExecutionStrategy::refined(&p);
    let mut group = c.benchmark_group("distribution/random_graph");
    group.sample_size(10);
    // 3/(N-1) exceeds 1 for N in {2, 3}.
    for n in [1usize, 4] {
        let q = parse_query(&graph_query(n)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &q, |b, q| {
            b.iter(|| distribution(&p, black_box(q), &s, &p.switches, &Limits::default()).unwrap())
        });
    }
    group.finish();
}

fn enumerate_dense(c: &mut Criterion) {
    let p = parse_program(&fixture("dense_graph.chrism")).unwrap();
    let s = ExecutionStrategy::refined(&p);
    let q = parse_query("node(1),node(2),node(3)").unwrap();
    c.bench_function("distribution/dense_graph_3", |b| {
        b.iter(|| distribution(&p, black_box(&q), &s, &p.switches, &Limits::default()).unwrap())
    });
}

fn enumerate_rps(c: &mut Criterion) {
    let p = parse_program(&fixture("rps.chrism")).unwrap();
    let s = ExecutionStrategy::refined(&p);
    let q = parse_query("player(tom),player(jon)").unwrap();
    c.bench_function("distribution/rps", |b| {
        b.iter(|| distribution(&p, black_box(&q), &s, &p.switches, &Limits::default()).unwrap())
    });
}

criterion_group!(benches, enumerate_graphs, enumerate_dense, enumerate_rps);
criterion_main!(benches);
