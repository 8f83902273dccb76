//! Simulation and analysis of local patrolling policies on the dual graphs
//! of triangulations.
//!
//! A swarm of patrolling robots walks the dual graph (one vertex per
//! triangle). At every synchronous round each robot looks only at its
//! current vertex, the adjacent vertices and the incident edges, and moves
//! along one edge chosen by a local policy: least recently visited vertex
//! or edge (LRV-v, LRV-e), least frequently visited vertex or edge (LFV-v,
//! LFV-e), or a random walk.
//!
//! The crate provides graph generators for the adversarial families used to
//! probe those policies, a deterministic multi-robot engine, refresh-time
//! metrics, owner assignment for the distributed triangulation, and
//! brute-force oracles (tie-break search, Hamiltonian cycles, a reference
//! simulator).

pub mod engine;
pub mod format;
pub mod generators;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod ownership;
pub mod policies;
pub mod triangulation;
pub mod verify;

pub use engine::{run, Arrival, EngineError, Event, Placement, SimConfig, Simulation, Trace};
pub use generators::{Family, FamilySpec, GenError};
pub use graph::{
    validate, EdgeId, EdgeState, Graph, GraphError, LocalView, NeighborView, Round, ValidationReport, VertexId,
    VertexState, Violation,
};
pub use metrics::{refresh_series, GrowthFit, GrowthModel, RefreshSeries};
pub use policies::{decide, Decision, PolicyError, PolicyKind, TieBreak, TieBreakState};
pub use triangulation::{Point, Triangulation};
