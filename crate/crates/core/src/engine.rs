//! Synchronous-round multi-robot simulation.
//!
//! Round 0 is the initial placement: every starting robot marks its vertex
//! as visited at round 0. In each later round `t` the robots move one at a
//! time in ascending id order. Each robot reads the live state (including
//! moves already made by lower ids in round `t`), crosses one edge, and
//! stamps the edge and the destination vertex with `t`.
//!
//! A robot arriving at round `t` is placed and marks its vertex at the start
//! of round `t`; it makes its first move in round `t + 1`.

use std::io::{self, Write};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, EdgeState, Graph, LocalView, NeighborView, Round, VertexId, VertexState};
use crate::policies::{decide, PolicyError, PolicyKind, TieBreak, TieBreakState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("start vertex {vertex} out of range for graph with {n} vertices")]
    InvalidStart { vertex: VertexId, n: usize },
    #[error("arrival at round {round} is after the horizon {horizon}")]
    ArrivalAfterHorizon { round: Round, horizon: Round },
    #[error("simulation already reached its horizon {0}")]
    Finished(Round),
    #[error("round {round}, robot {robot}: {source}")]
    Policy {
        round: Round,
        robot: usize,
        #[source]
        source: PolicyError,
    },
}

/// A robot joining mid-run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrival {
    pub round: Round,
    pub vertex: VertexId,
}

/// Full description of one simulation run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub graph: Arc<Graph>,
    pub policy: PolicyKind,
    pub tiebreak: TieBreak,
    pub robots: Vec<VertexId>,
    pub arrivals: Vec<Arrival>,
    pub horizon: Round,
    /// Seeds the walk of [`PolicyKind::Random`].
    pub seed: u64,
}

impl SimConfig {
    /// One robot at vertex 0, lowest-id tie-breaking, seed 0.
    pub fn new(graph: impl Into<Arc<Graph>>, policy: PolicyKind, horizon: Round) -> Self {
        Self {
            graph: graph.into(),
            policy,
            tiebreak: TieBreak::LowestId,
            robots: vec![VertexId(0)],
            arrivals: Vec::new(),
            horizon,
            seed: 0,
        }
    }

    pub fn robots(mut self, starts: impl IntoIterator<Item = usize>) -> Self {
        self.robots = starts.into_iter().map(VertexId).collect();
        self
    }

    pub fn arrivals(mut self, arrivals: impl IntoIterator<Item = (Round, usize)>) -> Self {
        self.arrivals = arrivals
            .into_iter()
            .map(|(round, v)| Arrival { round, vertex: VertexId(v) })
            .collect();
        self
    }

    pub fn tiebreak(mut self, tiebreak: TieBreak) -> Self {
        self.tiebreak = tiebreak;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let n = self.graph.vertex_count();
        for &vertex in self.robots.iter().chain(self.arrivals.iter().map(|a| &a.vertex)) {
            if vertex.0 >= n {
                return Err(EngineError::InvalidStart { vertex, n });
            }
        }
        if let Some(a) = self.arrivals.iter().find(|a| a.round > self.horizon) {
            return Err(EngineError::ArrivalAfterHorizon {
                round: a.round,
                horizon: self.horizon,
            });
        }
        Ok(())
    }
}

/// One robot crossing one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub round: Round,
    pub robot: usize,
    pub from: VertexId,
    pub edge: EdgeId,
    pub to: VertexId,
}

/// A robot being put on the graph (at round 0 or on arrival).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Placement {
    pub round: Round,
    pub robot: usize,
    pub vertex: VertexId,
}

/// Complete record of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub horizon: Round,
    pub placements: Vec<Placement>,
    /// Ordered by round, then robot id.
    pub events: Vec<Event>,
    pub vertex_states: Vec<VertexState>,
    pub edge_states: Vec<EdgeState>,
}

impl Trace {
    pub fn vertex_count(&self) -> usize {
        self.vertex_states.len()
    }

    /// Events of a single round.
    pub fn round_events(&self, round: Round) -> &[Event] {
        let lo = self.events.partition_point(|e| e.round < round);
        let hi = self.events.partition_point(|e| e.round <= round);
        &self.events[lo..hi]
    }

    /// Writes `round,robot,from,edge,to` rows.
    pub fn write_events_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "round,robot,from,edge,to")?;
        for e in &self.events {
            writeln!(out, "{},{},{},{},{}", e.round, e.robot, e.from, e.edge, e.to)?;
        }
        Ok(())
    }
}

/// Live simulation state.
#[derive(Debug, Clone)]
pub struct Simulation {
    graph: Arc<Graph>,
    policy: PolicyKind,
    tiebreak: TieBreakState,
    walk_rng: ChaCha8Rng,
    round: Round,
    horizon: Round,
    positions: Vec<VertexId>,
    /// Arrivals not yet placed, in activation order.
    pending: Vec<Arrival>,
    vertex_states: Vec<VertexState>,
    edge_states: Vec<EdgeState>,
    placements: Vec<Placement>,
    events: Vec<Event>,
}

impl Simulation {
    pub fn new(config: &SimConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let mut pending = config.arrivals.clone();
        pending.sort_by_key(|a| a.round);
        pending.reverse();
        let mut sim = Self {
            graph: Arc::clone(&config.graph),
            policy: config.policy,
            tiebreak: TieBreakState::new(&config.tiebreak),
            walk_rng: ChaCha8Rng::seed_from_u64(config.seed),
            round: 0,
            horizon: config.horizon,
            positions: Vec::new(),
            pending,
            vertex_states: vec![VertexState::default(); config.graph.vertex_count()],
            edge_states: vec![EdgeState::default(); config.graph.edge_count()],
            placements: Vec::new(),
            events: Vec::new(),
        };
        for &v in &config.robots {
            sim.place(v);
        }
        sim.activate_arrivals();
        Ok(sim)
    }

    fn place(&mut self, vertex: VertexId) {
        let robot = self.positions.len();
        self.positions.push(vertex);
        self.vertex_states[vertex.0].visit(self.round);
        self.placements.push(Placement {
            round: self.round,
            robot,
            vertex,
        });
    }

    fn activate_arrivals(&mut self) {
        while let Some(a) = self.pending.last().copied() {
            if a.round != self.round {
                break;
            }
            self.pending.pop();
            self.place(a.vertex);
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// The last completed round (0 right after construction).
    pub fn round(&self) -> Round {
        self.round
    }

    pub fn horizon(&self) -> Round {
        self.horizon
    }

    pub fn is_finished(&self) -> bool {
        self.round >= self.horizon
    }

    pub fn positions(&self) -> &[VertexId] {
        &self.positions
    }

    pub fn vertex_states(&self) -> &[VertexState] {
        &self.vertex_states
    }

    pub fn edge_states(&self) -> &[EdgeState] {
        &self.edge_states
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Everything a robot standing on `v` may observe.
    pub fn local_view(&self, v: VertexId) -> LocalView {
        LocalView {
            round: self.round,
            current: v,
            current_state: self.vertex_states[v.0],
            neighbors: self
                .graph
                .adjacent(v)
                .iter()
                .map(|&(w, e)| NeighborView {
                    vertex: w,
                    state: self.vertex_states[w.0],
                    edge: e,
                    edge_state: self.edge_states[e.0],
                })
                .collect(),
        }
    }

    /// Advances by one round.
    pub fn step(&mut self) -> Result<(), EngineError> {
        if self.is_finished() {
            return Err(EngineError::Finished(self.horizon));
        }
        self.round += 1;
        let round = self.round;
        let movers = self.positions.len();
        self.activate_arrivals();
        for robot in 0..movers {
            let from = self.positions[robot];
            let view = self.local_view(from);
            let d = decide(self.policy, &view, &mut self.tiebreak, &mut self.walk_rng)
                .map_err(|source| EngineError::Policy { round, robot, source })?;
            self.edge_states[d.via.0].traverse(round);
            self.vertex_states[d.next.0].visit(round);
            self.positions[robot] = d.next;
            self.events.push(Event {
                round,
                robot,
                from,
                edge: d.via,
                to: d.next,
            });
        }
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<(), EngineError> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(())
    }

    /// Scripted tie-break choices consumed so far.
    pub fn script_consumed(&self) -> usize {
        self.tiebreak.consumed()
    }

    pub fn into_trace(self) -> Trace {
        Trace {
            horizon: self.horizon,
            placements: self.placements,
            events: self.events,
            vertex_states: self.vertex_states,
            edge_states: self.edge_states,
        }
    }
}

/// Runs a configuration to its horizon.
pub fn run(config: &SimConfig) -> Result<Trace, EngineError> {
    let mut sim = Simulation::new(config)?;
    sim.run_to_end()?;
    Ok(sim.into_trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cycle, path_dual};

    #[test]
    fn init_marks_starts() {
        let sim = Simulation::new(&SimConfig::new(cycle(4).unwrap(), PolicyKind::LrvV, 5)).unwrap();
        let counts: Vec<_> = sim.vertex_states().iter().map(|s| s.visit_count).collect();
        assert_eq!(counts, [1, 0, 0, 0]);
        assert_eq!(sim.vertex_states()[0].last_visit, Some(0));

        let sim = Simulation::new(&SimConfig::new(cycle(4).unwrap(), PolicyKind::LrvV, 5).robots([2, 2])).unwrap();
        assert_eq!(sim.vertex_states()[2].visit_count, 2);
    }

    #[test]
    fn deferred_arrival() {
        let cfg = SimConfig::new(cycle(4).unwrap(), PolicyKind::LrvV, 8)
            .robots([])
            .arrivals([(5, 3)]);
        let mut sim = Simulation::new(&cfg).unwrap();
        for _ in 0..4 {
            sim.step().unwrap();
            assert_eq!(sim.vertex_states()[3].visit_count, 0);
        }
        sim.step().unwrap();
        assert_eq!(sim.vertex_states()[3].last_visit, Some(5));
        assert!(sim.events().is_empty());
        sim.step().unwrap();
        assert_eq!(sim.events().len(), 1);
        assert_eq!(sim.events()[0].robot, 0);
    }

    #[test]
    fn invalid_config() {
        let g = cycle(4).unwrap();
        assert!(matches!(
            Simulation::new(&SimConfig::new(g.clone(), PolicyKind::LrvV, 5).robots([4])),
            Err(EngineError::InvalidStart { .. })
        ));
        assert!(matches!(
            Simulation::new(&SimConfig::new(g, PolicyKind::LrvV, 5).arrivals([(6, 0)])),
            Err(EngineError::ArrivalAfterHorizon { .. })
        ));
    }

    #[test]
    fn path_lrv_hand_simulation() {
        let trace = run(&SimConfig::new(path_dual(3).unwrap(), PolicyKind::LrvV, 2)).unwrap();
        let to: Vec<_> = trace.events.iter().map(|e| e.to.0).collect();
        assert_eq!(to, [1, 2]);
    }

    #[test]
    fn cycle_lrv_period_four() {
        let trace = run(&SimConfig::new(cycle(4).unwrap(), PolicyKind::LrvV, 12)).unwrap();
        let to: Vec<_> = trace.events.iter().map(|e| e.to.0).collect();
        assert_eq!(to, [1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3, 0]);
        let counts: Vec<_> = trace.vertex_states.iter().map(|s| s.visit_count).collect();
        assert_eq!(counts, [4, 3, 3, 3]);
    }

    #[test]
    fn forced_moves_on_single_edge() {
        let trace = run(&SimConfig::new(path_dual(2).unwrap(), PolicyKind::LfvV, 1).robots([0, 0])).unwrap();
        assert_eq!(trace.vertex_states[1].visit_count, 2);
        assert_eq!(trace.round_events(1).len(), 2);
    }

    #[test]
    fn zero_horizon() {
        let trace = run(&SimConfig::new(cycle(4).unwrap(), PolicyKind::LrvV, 0)).unwrap();
        assert!(trace.events.is_empty());
        assert_eq!(trace.vertex_states[0].visit_count, 1);
        let mut sim = Simulation::new(&SimConfig::new(cycle(4).unwrap(), PolicyKind::LrvV, 0)).unwrap();
        assert_eq!(sim.step(), Err(EngineError::Finished(0)));
    }

    #[test]
    fn events_csv() {
        let trace = run(&SimConfig::new(path_dual(2).unwrap(), PolicyKind::LrvV, 2)).unwrap();
        let mut buf = Vec::new();
        trace.write_events_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "round,robot,from,edge,to\n1,0,0,0,1\n2,0,1,0,0\n");
    }
}
