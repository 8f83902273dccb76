use patrol_core::format::{parse_graph, write_graph};
use patrol_core::generators::{
    cycle, diamond_gadget_chain, flower_barrier, four_cycle_chain, grid_triangulation, path_dual, FLOWER_START,
};
use patrol_core::metrics::{frequency_histogram, refresh_series, visit_rounds, windowed_peaks};
use patrol_core::oracle::{exhaustive_tiebreak_search, hamiltonian_cycle, SearchLimits};
use patrol_core::ownership::{assign_owners, verify_dual_edge_owners, verify_owner_adjacency};
use patrol_core::verify::{random_config, random_connected_graph};
use patrol_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_graph() -> impl Strategy<Value = Graph> {
    (2usize..=16, any::<u64>()).prop_map(|(n, seed)| random_connected_graph(&mut ChaCha8Rng::seed_from_u64(seed), n))
}

fn arb_view() -> impl Strategy<Value = LocalView> {
    let neighbor = (
        proptest::option::of(0u64..50),
        0u64..20,
        proptest::option::of(0u64..50),
        0u64..20,
    );
    (proptest::collection::vec(neighbor, 1..=4), 50u64..60).prop_map(|(ns, round)| {
        let neighbors = ns
            .into_iter()
            .enumerate()
            .map(|(i, (lv, vc, lt, tc))| NeighborView {
                vertex: VertexId(i + 1),
                state: VertexState { last_visit: lv, visit_count: vc + u64::from(lv.is_some()) },
                edge: EdgeId(10 + 3 * i),
                edge_state: EdgeState { last_traversal: lt, traversal_count: tc + u64::from(lt.is_some()) },
            })
            .collect();
        LocalView { round, current: VertexId(0), current_state: VertexState::default(), neighbors }
    })
}

fn choose(policy: PolicyKind, view: &LocalView) -> Decision {
    let mut tb = TieBreakState::new(&TieBreak::LowestId);
    decide(policy, view, &mut tb, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
}

proptest! {
    #[test]
    fn adjacency_is_symmetric_with_shared_edge_ids(g in arb_graph()) {
        let mut degree_sum = 0;
        for v in g.vertices() {
            degree_sum += g.degree(v);
            for &(w, e) in g.adjacent(v) {
                prop_assert!(g.adjacent(w).contains(&(v, e)));
                let (a, b) = g.endpoints(e);
                prop_assert!((a, b) == (v, w) || (a, b) == (w, v));
            }
        }
        prop_assert_eq!(degree_sum, 2 * g.edge_count());
    }

    #[test]
    fn text_format_round_trips(g in arb_graph()) {
        prop_assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
    }

    #[test]
    fn decisions_are_deterministic(view in arb_view()) {
        for policy in PolicyKind::DETERMINISTIC {
            prop_assert_eq!(choose(policy, &view), choose(policy, &view));
        }
    }

    #[test]
    fn lrv_ignores_time_translation(view in arb_view(), shift in 1u64..1000) {
        let mut shifted = view.clone();
        shifted.round += shift;
        for n in &mut shifted.neighbors {
            n.state.last_visit = n.state.last_visit.map(|r| r + shift);
            n.edge_state.last_traversal = n.edge_state.last_traversal.map(|r| r + shift);
        }
        for policy in [PolicyKind::LrvV, PolicyKind::LrvE] {
            prop_assert_eq!(choose(policy, &view), choose(policy, &shifted));
        }
    }

    #[test]
    fn lfv_ignores_count_scaling(view in arb_view(), factor in 1u64..50) {
        let mut scaled = view.clone();
        for n in &mut scaled.neighbors {
            n.state.visit_count *= factor;
            n.edge_state.traversal_count *= factor;
        }
        for policy in [PolicyKind::LfvV, PolicyKind::LfvE] {
            prop_assert_eq!(choose(policy, &view), choose(policy, &scaled));
        }
    }

    #[test]
    fn vertex_policies_ignore_edge_labels(view in arb_view(), perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut ids: Vec<usize> = (0..view.neighbors.len()).map(|i| 100 + 7 * i).collect();
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
        let mut relabeled = view.clone();
        for (n, id) in relabeled.neighbors.iter_mut().zip(ids) {
            n.edge = EdgeId(id);
        }
        for policy in [PolicyKind::LrvV, PolicyKind::LfvV] {
            prop_assert_eq!(choose(policy, &view).next, choose(policy, &relabeled).next);
        }
    }

    #[test]
    fn edge_policies_ignore_vertex_labels(view in arb_view(), perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut ids: Vec<usize> = (0..view.neighbors.len()).map(|i| 200 + 5 * i).collect();
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
        let mut relabeled = view.clone();
        for (n, id) in relabeled.neighbors.iter_mut().zip(ids) {
            n.vertex = VertexId(id);
        }
        relabeled.neighbors.sort_by_key(|n| n.vertex);
        for policy in [PolicyKind::LrvE, PolicyKind::LfvE] {
            prop_assert_eq!(choose(policy, &view).via, choose(policy, &relabeled).via);
        }
    }

    #[test]
    fn runs_conserve_counts_and_move_one_edge_per_round(seed in any::<u64>()) {
        let mut config = random_config(&mut ChaCha8Rng::seed_from_u64(seed));
        config.tiebreak = TieBreak::LowestId;
        let trace = run(&config).unwrap();
        prop_assert!(frequency_histogram(&trace).is_conserved(&trace));
        let mut positions: Vec<VertexId> = Vec::new();
        for r in 0..=trace.horizon {
            for p in trace.placements.iter().filter(|p| p.round == r) {
                prop_assert_eq!(p.robot, positions.len());
                positions.push(p.vertex);
            }
            if r == 0 {
                continue;
            }
            let events = trace.round_events(r);
            // Robots placed this round only move from the next round on.
            let movers = trace.placements.iter().filter(|p| p.round < r).count();
            prop_assert_eq!(events.len(), movers);
            for (i, e) in events.iter().enumerate() {
                prop_assert_eq!(e.robot, i);
                prop_assert_eq!(e.from, positions[i]);
                prop_assert_eq!(config.graph.endpoints(e.edge), if e.from < e.to { (e.from, e.to) } else { (e.to, e.from) });
                positions[i] = e.to;
            }
        }
    }

    #[test]
    fn search_dominates_lowest_id_and_replays(n in 3usize..=6, seed in any::<u64>(), horizon in 1u64..=20,
                                               policy in proptest::sample::select(PolicyKind::DETERMINISTIC.to_vec())) {
        let g = random_connected_graph(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let worst = exhaustive_tiebreak_search(&g, policy, VertexId(0), horizon, SearchLimits::default()).unwrap();
        // Even a capped search keeps the all-lowest-id branch, so it dominates.
        let lowest = refresh_series(&run(&SimConfig::new(g.clone(), policy, horizon)).unwrap()).peak();
        prop_assert!(worst.peak >= lowest);
        let replay = run(&SimConfig::new(g, policy, horizon).tiebreak(worst.tiebreak())).unwrap();
        prop_assert_eq!(refresh_series(&replay).peak(), worst.peak);
    }

    #[test]
    fn family_shapes(k in 1usize..=30, delta in 2usize..=6, len in 1usize..=8, w in 1usize..=8, h in 1usize..=8) {
        let chain = four_cycle_chain(k).unwrap();
        prop_assert_eq!(chain.vertex_count(), 4 * k);
        prop_assert_eq!(chain.edge_count(), 5 * k - 1);
        prop_assert_eq!(chain.max_degree(), if k == 1 { 2 } else { 3 });
        prop_assert_eq!(chain.vertices().filter(|&v| chain.degree(v) == 3).count(), 2 * (k - 1));

        let flower = flower_barrier(delta, len).unwrap();
        prop_assert_eq!(flower.degree(VertexId(FLOWER_START)), delta);
        prop_assert!(flower.is_connected());

        let t = grid_triangulation(w, h).unwrap();
        let dual = t.dual();
        prop_assert_eq!(dual.vertex_count(), 2 * w * h);
        prop_assert!(dual.max_degree() <= 3);
        prop_assert!(validate(dual, true).is_ok());

        for g in [chain, flower, dual.clone(), diamond_gadget_chain(k).unwrap(), cycle(k + 2).unwrap(), path_dual(k).unwrap()] {
            prop_assert!(g.is_connected());
            prop_assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
        }
    }

    #[test]
    fn owner_adjacency_implies_dual_edge_bound(w in 1usize..=6, h in 1usize..=6) {
        let t = grid_triangulation(w, h).unwrap();
        let owners = assign_owners(&t).unwrap();
        prop_assert!(verify_owner_adjacency(&t, &owners).is_ok());
        prop_assert!(verify_dual_edge_owners(&t, &owners).is_ok());
    }
}

#[test]
fn boundary_triangles_of_grids_have_degree_at_most_two() {
    let t = grid_triangulation(4, 3).unwrap();
    let dual = t.dual();
    let boundary = |(a, b): (usize, usize)| {
        let (pa, pb) = (t.points()[a], t.points()[b]);
        (pa.x == pb.x && (pa.x == 0.0 || pa.x == 4.0)) || (pa.y == pb.y && (pa.y == 0.0 || pa.y == 3.0))
    };
    for (i, tri) in t.triangles().iter().enumerate() {
        let on_boundary = [(tri[0], tri[1]), (tri[0], tri[2]), (tri[1], tri[2])].into_iter().any(boundary);
        if on_boundary {
            assert!(dual.degree(VertexId(i)) <= 2, "triangle {i}");
        }
    }
}

#[test]
fn path_diameter_is_n_minus_one() {
    for n in 2..40 {
        assert_eq!(path_dual(n).unwrap().diameter().unwrap(), n - 1);
    }
}

#[test]
fn cycles_are_hamiltonian_with_length_n() {
    for n in 3..=12 {
        assert_eq!(hamiltonian_cycle(&cycle(n).unwrap()).unwrap(), Some(n));
    }
}

#[test]
fn save_load_round_trip_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let g = grid_triangulation(3, 2).unwrap().into_dual();
    let path = dir.path().join("grid.graph");
    patrol_core::generators::save(&g, &path).unwrap();
    assert_eq!(patrol_core::generators::load(&path).unwrap(), g);
}

/// Worst peak over every tie-break script, by plain enumeration through the
/// engine: a script that runs dry is extended by each possible choice, and
/// out-of-range choices are dropped.
fn brute_force_worst(g: &Graph, policy: PolicyKind, horizon: Round) -> Round {
    let mut worst = 0;
    let mut stack = vec![Vec::new()];
    while let Some(script) = stack.pop() {
        let config = SimConfig::new(g.clone(), policy, horizon).tiebreak(TieBreak::Scripted(script.clone()));
        match run(&config) {
            Ok(trace) => worst = worst.max(refresh_series(&trace).peak()),
            Err(EngineError::Policy { source: PolicyError::ScriptExhausted(_), .. }) => {
                for c in 0..g.max_degree() {
                    let mut next = script.clone();
                    next.push(c);
                    stack.push(next);
                }
            }
            Err(EngineError::Policy { source: PolicyError::ScriptOutOfRange { .. }, .. }) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn search_matches_brute_force_for_lrv(n in 3usize..=7, seed in any::<u64>(), horizon in 1u64..=40,
                                          policy in proptest::sample::select(vec![PolicyKind::LrvV, PolicyKind::LrvE])) {
        let g = random_connected_graph(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let worst = exhaustive_tiebreak_search(&g, policy, VertexId(0), horizon, SearchLimits::default()).unwrap();
        prop_assert_eq!(worst.peak, brute_force_worst(&g, policy, horizon));
    }
}

/// On the two-cycle chain no tie-break schedule beats lowest-id: the search
/// and the brute-force enumeration agree that the worst peak equals the
/// lowest-id peak.
#[test]
fn two_cycle_chain_search_matches_lowest_id() {
    let g = four_cycle_chain(2).unwrap();
    let horizon = 200;
    let worst = exhaustive_tiebreak_search(&g, PolicyKind::LrvV, VertexId(0), horizon, SearchLimits::default()).unwrap();
    assert!(worst.complete);
    assert_eq!(worst.peak, brute_force_worst(&g, PolicyKind::LrvV, horizon));
    let lowest = run(&SimConfig::new(g, PolicyKind::LrvV, horizon)).unwrap();
    let lowest_peak = windowed_peaks(&visit_rounds(&lowest), horizon, 0).into_iter().max().unwrap();
    assert_eq!(worst.peak, lowest_peak);
}
