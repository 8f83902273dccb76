//! Shared fixtures for the criterion benches.

use patrol_core::generators::{four_cycle_chain, grid_triangulation};
use patrol_core::{PolicyKind, Round, SimConfig};

/// `r` robots spread over a `w`×`h` grid dual.
pub fn grid_config(w: usize, h: usize, policy: PolicyKind, robots: usize, horizon: Round) -> SimConfig {
    let g = grid_triangulation(w, h).expect("valid grid").into_dual();
    let n = g.vertex_count();
    SimConfig::new(g, policy, horizon).robots((0..robots).map(|i| i * n / robots))
}

pub fn chain_config(k: usize, policy: PolicyKind, horizon: Round) -> SimConfig {
    SimConfig::new(four_cycle_chain(k).expect("k ≥ 1"), policy, horizon)
}
