use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use patrol_bench::{chain_config, grid_config};
use patrol_core::generators::{cycle, four_cycle_chain};
use patrol_core::oracle::{exhaustive_tiebreak_search, hamiltonian_cycle, reference_run, SearchLimits};
use patrol_core::{PolicyKind, VertexId};

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    for k in [2, 3, 4] {
        let g = four_cycle_chain(k).unwrap();
        let horizon = 20 * g.vertex_count() as u64;
        group.bench_with_input(BenchmarkId::new("four_cycle_chain_LRV_V", k), &g, |b, g| {
            b.iter(|| exhaustive_tiebreak_search(g, PolicyKind::LrvV, VertexId(0), horizon, SearchLimits::default()).unwrap())
        });
    }
    group.finish();

    let ring = cycle(20).unwrap();
    c.bench_function("hamiltonian/cycle20", |b| b.iter(|| hamiltonian_cycle(&ring).unwrap()));

    let config = grid_config(5, 5, PolicyKind::LrvE, 2, 2_000);
    c.bench_function("reference/grid5x5_2k", |b| b.iter(|| reference_run(&config).unwrap()));
    let config = chain_config(6, PolicyKind::LfvV, 2_000);
    c.bench_function("reference/chain6_2k", |b| b.iter(|| reference_run(&config).unwrap()));
}

criterion_group!(benches, oracle);
criterion_main!(benches);
