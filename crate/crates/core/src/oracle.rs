//! Brute-force verifiers: adversarial tie-break search, Hamiltonian cycle
//! enumeration and a naive reference simulator for differential testing.
//!
//! Nothing here calls into the engine or the policy module; the only shared
//! pieces are the graph type and the event record.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Event, SimConfig};
use crate::graph::{EdgeId, Graph, Round, VertexId};
use crate::policies::{PolicyKind, TieBreak};

/// Largest graph accepted by [`hamiltonian_cycle`].
pub const HAMILTONIAN_CAP: usize = 24;

/// Default cap on search nodes for [`exhaustive_tiebreak_search`].
pub const DEFAULT_STATE_CAP: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("exact Hamiltonian search is limited to {cap} vertices, graph has {n}; use the n/r proxy bound")]
    TooLarge { n: usize, cap: usize },
    #[error("start vertex {0} out of range")]
    InvalidStart(VertexId),
    #[error("tie-break search is not defined for the random walk")]
    UnsupportedPolicy,
    #[error("vertex {0} has no neighbors")]
    Isolated(VertexId),
}

/// Length of a Hamiltonian cycle of `g` (always `n`), or `None` if there is
/// none. Exact backtracking; refuses graphs above [`HAMILTONIAN_CAP`].
pub fn hamiltonian_cycle(g: &Graph) -> Result<Option<usize>, OracleError> {
    let n = g.vertex_count();
    if n > HAMILTONIAN_CAP {
        return Err(OracleError::TooLarge { n, cap: HAMILTONIAN_CAP });
    }
    if n < 3 || g.vertices().any(|v| g.degree(v) < 2) {
        return Ok(None);
    }
    let adj: Vec<u32> = g
        .vertices()
        .map(|v| g.adjacent(v).iter().fold(0u32, |m, &(w, _)| m | 1 << w.0))
        .collect();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };

    fn extend(adj: &[u32], full: u32, visited: u32, at: usize) -> bool {
        if visited == full {
            return adj[at] & 1 != 0;
        }
        let mut cand = adj[at] & !visited;
        while cand != 0 {
            let next = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            if extend(adj, full, visited | 1 << next, next) {
                return true;
            }
        }
        false
    }

    Ok(extend(&adj, full, 1, 0).then_some(n))
}

/// Outcome of [`exhaustive_tiebreak_search`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorstCaseResult {
    pub graph: String,
    pub policy: PolicyKind,
    pub start: VertexId,
    pub horizon: Round,
    /// Refresh times are measured over rounds `measure_from..=horizon`.
    pub measure_from: Round,
    /// Largest per-vertex refresh time reachable by any tie-break sequence.
    pub peak: Round,
    /// Scripted tie-break choices reproducing `peak`.
    pub witness: Vec<usize>,
    /// `false` when the state cap was hit; `peak` is then a lower bound.
    pub complete: bool,
    pub states_explored: u64,
}

impl WorstCaseResult {
    pub fn tiebreak(&self) -> TieBreak {
        TieBreak::Scripted(self.witness.clone())
    }
}

const NEVER: u32 = u32::MAX;

#[derive(Clone)]
struct SearchState {
    round: u32,
    pos: u32,
    vlast: Vec<u32>,
    vcount: Vec<u32>,
    elast: Vec<u32>,
    ecount: Vec<u32>,
}

impl SearchState {
    fn key(&self) -> Box<[u32]> {
        let mut k = Vec::with_capacity(2 + 2 * (self.vlast.len() + self.elast.len()));
        k.push(self.round);
        k.push(self.pos);
        k.extend_from_slice(&self.vlast);
        k.extend_from_slice(&self.vcount);
        k.extend_from_slice(&self.elast);
        k.extend_from_slice(&self.ecount);
        k.into_boxed_slice()
    }

    fn gap(&self, v: usize, t: u32) -> u32 {
        match self.vlast[v] {
            NEVER => t,
            last => t - last,
        }
    }
}

struct Search<'g> {
    adj: Vec<Vec<(u32, u32)>>,
    policy: PolicyKind,
    horizon: u32,
    from: u32,
    cap: u64,
    explored: u64,
    exhausted: bool,
    /// Best future value and the choice achieving it, per branching state.
    memo: HashMap<Box<[u32]>, (u32, usize)>,
    _graph: &'g Graph,
}

impl Search<'_> {
    /// Candidates tied for the policy minimum, in tie-break order.
    fn tied(&self, s: &SearchState) -> Vec<(u32, u32)> {
        let nbrs = &self.adj[s.pos as usize];
        // NEVER sorts last as u32, so map it below every round for recency
        let rec = |x: u32| if x == NEVER { 0 } else { x as u64 + 1 };
        let key = |&(w, e): &(u32, u32)| -> u64 {
            match self.policy {
                PolicyKind::LrvV => rec(s.vlast[w as usize]),
                PolicyKind::LrvE => rec(s.elast[e as usize]),
                PolicyKind::LfvV => s.vcount[w as usize] as u64,
                PolicyKind::LfvE => s.ecount[e as usize] as u64,
                PolicyKind::Random => unreachable!(),
            }
        };
        let best = nbrs.iter().map(key).min().unwrap();
        let mut tied: Vec<_> = nbrs.iter().copied().filter(|c| key(c) == best).collect();
        if self.policy.uses_edges() {
            tied.sort_by_key(|&(_, e)| e);
        } else {
            tied.sort_by_key(|&(w, _)| w);
        }
        tied
    }

    fn apply(&self, s: &mut SearchState, (w, e): (u32, u32)) -> u32 {
        let t = s.round + 1;
        let gap = s.gap(w as usize, t);
        s.round = t;
        s.pos = w;
        s.vlast[w as usize] = t;
        s.vcount[w as usize] += 1;
        s.elast[e as usize] = t;
        s.ecount[e as usize] += 1;
        if t >= self.from {
            gap
        } else {
            0
        }
    }

    fn trailing(&self, s: &SearchState) -> u32 {
        if self.horizon < self.from {
            return 0;
        }
        (0..s.vlast.len())
            .filter(|&v| s.vlast[v] != self.horizon)
            .map(|v| s.gap(v, self.horizon))
            .max()
            .unwrap_or(0)
    }

    /// Largest gap incurred from `s` to the horizon under the best choices.
    fn value(&mut self, mut s: SearchState) -> u32 {
        let mut acc = 0;
        loop {
            if s.round == self.horizon {
                return acc.max(self.trailing(&s));
            }
            self.explored += 1;
            let tied = self.tied(&s);
            if tied.len() == 1 {
                acc = acc.max(self.apply(&mut s, tied[0]));
                continue;
            }
            let key = s.key();
            if let Some(&(v, _)) = self.memo.get(&key) {
                return acc.max(v);
            }
            if self.explored >= self.cap {
                self.exhausted = true;
            }
            let choices = if self.exhausted { 1 } else { tied.len() };
            let mut best = (0, 0);
            for (i, &c) in tied.iter().enumerate().take(choices) {
                let mut next = s.clone();
                let gap = self.apply(&mut next, c);
                let v = gap.max(self.value(next));
                if i == 0 || v > best.0 {
                    best = (v, i);
                }
            }
            self.memo.insert(key, best);
            return acc.max(best.0);
        }
    }

    fn witness(&self, mut s: SearchState) -> Vec<usize> {
        let mut out = Vec::new();
        while s.round < self.horizon {
            let tied = self.tied(&s);
            let choice = if tied.len() == 1 {
                0
            } else {
                let (_, c) = self.memo[&s.key()];
                out.push(c);
                c
            };
            self.apply(&mut s, tied[choice]);
        }
        out
    }
}

/// Bounds of an [`exhaustive_tiebreak_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    /// First round whose refresh times count towards the peak; `0` measures
    /// the whole run including initial coverage.
    pub measure_from: Round,
    /// Search nodes expanded before falling back to choice 0.
    pub state_cap: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            measure_from: 0,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

impl SearchLimits {
    pub fn from_round(measure_from: Round) -> Self {
        Self {
            measure_from,
            ..Self::default()
        }
    }
}

/// Enumerates every scripted tie-break sequence for one robot starting at
/// `start` and returns the largest per-vertex refresh time reachable within
/// `horizon` rounds, together with the lexicographically smallest witness.
///
/// The peak matches [`crate::metrics::windowed_peaks`] with the same
/// window, so replaying the witness through the engine reproduces it.
///
/// States at branching points are memoized on the full vertex and edge
/// state. When more than `state_cap` search nodes have been expanded the
/// remaining branches follow choice 0 and the result is flagged incomplete.
pub fn exhaustive_tiebreak_search(
    g: &Graph,
    policy: PolicyKind,
    start: VertexId,
    horizon: Round,
    limits: SearchLimits,
) -> Result<WorstCaseResult, OracleError> {
    if policy == PolicyKind::Random {
        return Err(OracleError::UnsupportedPolicy);
    }
    if !g.contains(start) {
        return Err(OracleError::InvalidStart(start));
    }
    if let Some(v) = g.vertices().find(|&v| g.degree(v) == 0) {
        if g.vertex_count() > 1 || horizon > 0 {
            return Err(OracleError::Isolated(v));
        }
    }
    let horizon32 = u32::try_from(horizon).expect("horizon fits in u32");
    let adj = g
        .vertices()
        .map(|v| g.adjacent(v).iter().map(|&(w, e)| (w.0 as u32, e.0 as u32)).collect())
        .collect();
    let mut root = SearchState {
        round: 0,
        pos: start.0 as u32,
        vlast: vec![NEVER; g.vertex_count()],
        vcount: vec![0; g.vertex_count()],
        elast: vec![NEVER; g.edge_count()],
        ecount: vec![0; g.edge_count()],
    };
    root.vlast[start.0] = 0;
    root.vcount[start.0] = 1;

    let mut search = Search {
        adj,
        policy,
        horizon: horizon32,
        from: u32::try_from(limits.measure_from).unwrap_or(u32::MAX),
        cap: limits.state_cap,
        explored: 0,
        exhausted: false,
        memo: HashMap::new(),
        _graph: g,
    };
    let peak = search.value(root.clone());
    let witness = search.witness(root);

    let label = g
        .metadata()
        .iter()
        .filter(|(k, _)| k.as_str() != crate::graph::META_TRIANGULATION_DUAL)
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ");
    Ok(WorstCaseResult {
        graph: label,
        policy,
        start,
        horizon,
        measure_from: limits.measure_from,
        peak: peak as Round,
        witness,
        complete: !search.exhausted,
        states_explored: search.explored,
    })
}

/// Reads a witness file: one choice index per line.
pub fn parse_witness(text: &str) -> Result<Vec<usize>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|_| format!("line {}: bad choice index `{}`", i + 1, l.trim()))
        })
        .collect()
}

pub fn write_witness(witness: &[usize]) -> String {
    witness.iter().map(|c| format!("{c}\n")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("reference simulator failed at round {round}, robot {robot}")]
pub struct ReferenceError {
    pub round: Round,
    pub robot: usize,
}

/// Naive re-implementation of the simulation loop, used only to cross-check
/// the engine. Linear scans everywhere; `-1` marks "never".
pub struct ReferenceSim {
    n: usize,
    edges: Vec<(usize, usize)>,
    policy: PolicyKind,
    script: Option<Vec<usize>>,
    script_pos: usize,
    tie_rng: Option<ChaCha8Rng>,
    walk_rng: ChaCha8Rng,
    pub round: Round,
    horizon: Round,
    robots: Vec<usize>,
    arrivals: Vec<(Round, usize)>,
    pub last_visit: Vec<i64>,
    pub visits: Vec<u64>,
    pub last_traversal: Vec<i64>,
    pub traversals: Vec<u64>,
    pub events: Vec<Event>,
}

impl ReferenceSim {
    pub fn new(config: &SimConfig) -> Self {
        let g = &config.graph;
        let edges = g.edges().iter().map(|&(u, v)| (u.0, v.0)).collect();
        let (script, tie_rng) = match &config.tiebreak {
            TieBreak::LowestId => (None, None),
            TieBreak::SeededRandom(s) => (None, Some(ChaCha8Rng::seed_from_u64(*s))),
            TieBreak::Scripted(seq) => (Some(seq.clone()), None),
        };
        let mut sim = ReferenceSim {
            n: g.vertex_count(),
            edges,
            policy: config.policy,
            script,
            script_pos: 0,
            tie_rng,
            walk_rng: ChaCha8Rng::seed_from_u64(config.seed),
            round: 0,
            horizon: config.horizon,
            robots: Vec::new(),
            arrivals: config.arrivals.iter().map(|a| (a.round, a.vertex.0)).collect(),
            last_visit: vec![-1; g.vertex_count()],
            visits: vec![0; g.vertex_count()],
            last_traversal: vec![-1; g.edge_count()],
            traversals: vec![0; g.edge_count()],
            events: Vec::new(),
        };
        for r in &config.robots {
            sim.robots.push(r.0);
            sim.last_visit[r.0] = 0;
            sim.visits[r.0] += 1;
        }
        sim.arrive(0);
        sim
    }

    fn arrive(&mut self, t: Round) {
        for i in 0..self.arrivals.len() {
            let (round, v) = self.arrivals[i];
            if round == t {
                self.robots.push(v);
                self.last_visit[v] = t as i64;
                self.visits[v] += 1;
            }
        }
    }

    /// (neighbor, edge) pairs of `v`, sorted by neighbor.
    fn incident(&self, v: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if a == v {
                out.push((b, e));
            } else if b == v {
                out.push((a, e));
            }
        }
        out.sort();
        out
    }

    pub fn step(&mut self) -> Result<(), ReferenceError> {
        let t = self.round + 1;
        let movers = self.robots.len();
        self.arrive(t);
        for robot in 0..movers {
            let here = self.robots[robot];
            let options = self.incident(here);
            let fail = ReferenceError { round: t, robot };
            if options.is_empty() {
                return Err(fail);
            }
            let pick = if self.policy == PolicyKind::Random {
                options[self.walk_rng.gen_range(0..options.len())]
            } else {
                let score = |&(w, e): &(usize, usize)| -> i64 {
                    match self.policy {
                        PolicyKind::LrvV => self.last_visit[w],
                        PolicyKind::LrvE => self.last_traversal[e],
                        PolicyKind::LfvV => self.visits[w] as i64,
                        PolicyKind::LfvE => self.traversals[e] as i64,
                        PolicyKind::Random => 0,
                    }
                };
                let mut ranked: Vec<(i64, usize, (usize, usize))> = options
                    .iter()
                    .map(|o| {
                        let id = if self.policy.uses_edges() { o.1 } else { o.0 };
                        (score(o), id, *o)
                    })
                    .collect();
                ranked.sort();
                let low = ranked[0].0;
                let tied: Vec<_> = ranked.iter().filter(|r| r.0 == low).map(|r| r.2).collect();
                let idx = if tied.len() < 2 {
                    0
                } else if let Some(script) = &self.script {
                    let c = *script.get(self.script_pos).ok_or(fail.clone())?;
                    if c >= tied.len() {
                        return Err(fail);
                    }
                    self.script_pos += 1;
                    c
                } else if let Some(rng) = &mut self.tie_rng {
                    rng.gen_range(0..tied.len())
                } else {
                    0
                };
                tied[idx]
            };
            let (to, e) = pick;
            self.last_traversal[e] = t as i64;
            self.traversals[e] += 1;
            self.last_visit[to] = t as i64;
            self.visits[to] += 1;
            self.robots[robot] = to;
            self.events.push(Event {
                round: t,
                robot,
                from: VertexId(here),
                edge: EdgeId(e),
                to: VertexId(to),
            });
        }
        self.round = t;
        Ok(())
    }

    pub fn run(mut self) -> Result<Self, ReferenceError> {
        while self.round < self.horizon {
            self.step()?;
        }
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }
}

/// Runs the reference simulator to the horizon.
pub fn reference_run(config: &SimConfig) -> Result<ReferenceSim, ReferenceError> {
    ReferenceSim::new(config).run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cycle, four_cycle_chain, grid_triangulation, path_dual};

    /// Independent check: try every permutation starting at 0.
    fn brute_hamiltonian(g: &Graph) -> bool {
        fn perms(rest: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
            if k == rest.len() {
                return f(rest);
            }
            for i in k..rest.len() {
                rest.swap(k, i);
                if perms(rest, k + 1, f) {
                    return true;
                }
                rest.swap(k, i);
            }
            false
        }
        let n = g.vertex_count();
        if n < 3 {
            return false;
        }
        let mut rest: Vec<usize> = (1..n).collect();
        perms(&mut rest, 0, &mut |p| {
            let mut prev = 0;
            for &v in p {
                if g.edge_between(VertexId(prev), VertexId(v)).is_none() {
                    return false;
                }
                prev = v;
            }
            g.edge_between(VertexId(prev), VertexId(0)).is_some()
        })
    }

    #[test]
    fn hamiltonian_small_cases() {
        assert_eq!(hamiltonian_cycle(&cycle(6).unwrap()), Ok(Some(6)));
        assert_eq!(hamiltonian_cycle(&path_dual(4).unwrap()), Ok(None));
        let grid = grid_triangulation(2, 2).unwrap();
        assert!(!brute_hamiltonian(grid.dual()));
        assert_eq!(hamiltonian_cycle(grid.dual()), Ok(None));
        assert!(matches!(
            hamiltonian_cycle(&cycle(30).unwrap()),
            Err(OracleError::TooLarge { n: 30, .. })
        ));
    }

    #[test]
    fn hamiltonian_matches_permutation_brute_force() {
        let graphs = [
            four_cycle_chain(2).unwrap(),
            Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap(),
            Graph::new(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]).unwrap(),
            Graph::new(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]).unwrap(),
        ];
        for g in &graphs {
            assert_eq!(hamiltonian_cycle(g).unwrap().is_some(), brute_hamiltonian(g));
        }
    }

    #[test]
    fn cycle_worst_case_is_four() {
        let r = exhaustive_tiebreak_search(&cycle(4).unwrap(), PolicyKind::LrvV, VertexId(0), 40, SearchLimits::default())
            .unwrap();
        assert_eq!(r.peak, 4);
        assert!(r.complete);
        assert_eq!(r.witness.len(), 1);
    }

    #[test]
    fn path_worst_case_lrv_is_four() {
        for policy in [PolicyKind::LrvV, PolicyKind::LrvE] {
            for start in 0..3 {
                let r = exhaustive_tiebreak_search(&path_dual(3).unwrap(), policy, VertexId(start), 30, SearchLimits::default())
                    .unwrap();
                assert_eq!(r.peak, 4, "{policy} from {start}");
            }
        }
    }

    #[test]
    fn path_worst_case_lfv() {
        // LFV-v: at the middle vertex the two ends tie every other visit, and
        // returning to the same end twice (0, 1, 0, 1, 2) leaves the far end
        // alone for six rounds, repeatable forever.
        // LFV-e: a robot standing on the middle vertex has crossed each edge
        // an odd number of times (start at an end) or an even number of times
        // (start in the middle); only the latter produces ties.
        let expected = [(PolicyKind::LfvV, [6, 6, 6]), (PolicyKind::LfvE, [4, 6, 4])];
        for (policy, peaks) in expected {
            for (start, peak) in peaks.into_iter().enumerate() {
                let r = exhaustive_tiebreak_search(&path_dual(3).unwrap(), policy, VertexId(start), 40, SearchLimits::from_round(20))
                    .unwrap();
                assert_eq!(r.peak, peak, "{policy} from {start}");
            }
        }
    }

    #[test]
    fn search_rejects_random_and_bad_start() {
        let g = cycle(4).unwrap();
        assert_eq!(
            exhaustive_tiebreak_search(&g, PolicyKind::Random, VertexId(0), 5, SearchLimits::default()),
            Err(OracleError::UnsupportedPolicy)
        );
        assert_eq!(
            exhaustive_tiebreak_search(&g, PolicyKind::LrvV, VertexId(7), 5, SearchLimits::default()),
            Err(OracleError::InvalidStart(VertexId(7)))
        );
    }

    #[test]
    fn capped_search_is_flagged() {
        let g = four_cycle_chain(3).unwrap();
        let r = exhaustive_tiebreak_search(&g, PolicyKind::LfvV, VertexId(0), 60, SearchLimits { measure_from: 0, state_cap: 5 }).unwrap();
        assert!(!r.complete);
    }

    #[test]
    fn witness_text() {
        assert_eq!(parse_witness("0\n2\n\n1\n").unwrap(), [0, 2, 1]);
        assert!(parse_witness("0\nx\n").unwrap_err().contains("line 2"));
        assert_eq!(write_witness(&[1, 0]), "1\n0\n");
    }
}
