use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rbpebble_core::*;

fn bench_exact_tradeoff(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve-exact-tradeoff");
    let model = ModelSpec::new(Variant::Oneshot);
    for (d, m) in [(2usize, 5usize), (2, 8), (3, 6)] {
        let dag = gen_tradeoff_dag(d, m).unwrap();
        let r = d + 2;
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("d{d}m{m}R{r}")),
            &dag,
            |b, dag| {
                b.iter(|| solve_exact(dag, &model, r, &SearchLimits::default()).unwrap());
            },
        );
    }
    group.finish();
}

fn bench_exact_ladder(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve-exact-ladder");
    group.sample_size(10);
    let model = ModelSpec::new(Variant::Oneshot);
    let mut b = DagBuilder::new("grp");
    for m in ["m1", "m2", "m3"] {
        b.node(m);
    }
    b.node("t");
    for m in ["m1", "m2", "m3"] {
        b.edge(m, "t");
    }
    b.group(
        vec!["m1".into(), "m2".into(), "m3".into()],
        vec!["t".into()],
    );
    let base = b.build().unwrap();
    for h in [4usize, 8] {
        let dag = cd_transform(&base, 4, h).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("h{h}")), &dag, |b, dag| {
            b.iter(|| solve_exact(dag, &model, 4, &SearchLimits::default()).unwrap());
        });
    }
    group.finish();
}

fn bench_greedy_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("greedy-grid");
    let model = ModelSpec::new(Variant::Oneshot);
    for (l, k, kp) in [(3usize, 6usize, 4usize), (8, 40, 36)] {
        let grid = gen_greedy_grid(l, k, kp).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("l{l}k{k}")),
            &grid,
            |b, grid| {
                b.iter(|| {
                    greedy_pebble(&grid.dag, &model, grid.r, GreedyPolicy::default()).unwrap()
                });
            },
        );
    }
    group.finish();
}

fn bench_validate(c: &mut Criterion) {
    let model = ModelSpec::new(Variant::Oneshot);
    let grid = gen_greedy_grid(8, 40, 36).unwrap();
    let trace = greedy_pebble(&grid.dag, &model, grid.r, GreedyPolicy::default()).unwrap();
    c.bench_function("validate-grid-trace", |b| {
        b.iter(|| validate_trace(&grid.dag, &model, grid.r, &trace).unwrap());
    });
}

criterion_group!(
    benches,
    bench_exact_tradeoff,
    bench_exact_ladder,
    bench_greedy_grid,
    bench_validate
);
criterion_main!(benches);
