use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use patrol_bench::{chain_config, grid_config};
use patrol_core::metrics::refresh_series;
use patrol_core::{run, PolicyKind};

fn engine(c: &mut Criterion) {
    let mut group = c.benchmark_group("engine");
    let horizon = 10_000;
    group.throughput(Throughput::Elements(horizon));
    for policy in PolicyKind::ALL {
        let config = grid_config(10, 10, policy, 1, horizon);
        group.bench_with_input(BenchmarkId::new("grid10x10", policy), &config, |b, cfg| b.iter(|| run(cfg).unwrap()));
    }
    for robots in [3, 9] {
        let config = grid_config(10, 10, PolicyKind::LfvE, robots, horizon);
        group.bench_with_input(BenchmarkId::new("grid10x10_LFV_E_robots", robots), &config, |b, cfg| {
            b.iter(|| run(cfg).unwrap())
        });
    }
    group.finish();

    let trace = run(&chain_config(12, PolicyKind::LfvV, 50_000)).unwrap();
    c.bench_function("metrics/refresh_series_50k", |b| b.iter(|| refresh_series(&trace)));
}

criterion_group!(benches, engine);
criterion_main!(benches);
