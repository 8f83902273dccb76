//! Undirected simple graphs with dense vertex and edge ids.
//!
//! Edges are stored in canonical form (`u < v`, sorted lexicographically) and
//! the edge id of an edge is its position in that order. Adjacency lists are
//! sorted by neighbor id, so every iteration in the crate is deterministic.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Simulation time, counted in synchronous rounds.
pub type Round = u64;

/// Dense vertex index in `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

/// Dense edge index in `0..m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(usize, usize),
    #[error("graph is disconnected: no path from {0} to {1}")]
    Disconnected(VertexId, VertexId),
}

/// Patrol state of a vertex: when it was last visited and how often.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexState {
    pub last_visit: Option<Round>,
    pub visit_count: u64,
}

impl VertexState {
    /// Records a visit at `round`.
    pub fn visit(&mut self, round: Round) {
        debug_assert!(self.last_visit.is_none_or(|r| r <= round));
        self.last_visit = Some(round);
        self.visit_count += 1;
    }
}

/// Patrol state of an edge: when it was last traversed and how often.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeState {
    pub last_traversal: Option<Round>,
    pub traversal_count: u64,
}

impl EdgeState {
    pub fn traverse(&mut self, round: Round) {
        debug_assert!(self.last_traversal.is_none_or(|r| r <= round));
        self.last_traversal = Some(round);
        self.traversal_count += 1;
    }
}

/// One adjacency entry of a [`LocalView`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborView {
    pub vertex: VertexId,
    pub state: VertexState,
    pub edge: EdgeId,
    pub edge_state: EdgeState,
}

/// Everything a policy may look at when a robot decides where to go next:
/// the current vertex, its adjacent vertices and the incident edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalView {
    pub round: Round,
    pub current: VertexId,
    pub current_state: VertexState,
    /// Sorted by ascending neighbor id.
    pub neighbors: Vec<NeighborView>,
}

/// Undirected graph with dense ids and free-form metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    metadata: BTreeMap<String, String>,
}

/// Metadata key marking a graph as the dual of a triangulation.
pub const META_TRIANGULATION_DUAL: &str = "triangulation_dual";
/// Metadata key holding the family name.
pub const META_FAMILY: &str = "family";

impl Graph {
    /// Builds a simple graph. Edges may be given in any order and
    /// orientation; they are canonicalized and sorted, and edge ids follow
    /// the sorted order.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut canon = Vec::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        Ok(Self::from_raw(n, canon))
    }

    /// Builds a graph from an edge list without any simplicity checks. Edge
    /// ids follow the given order. Intended for constructing malformed
    /// graphs that [`validate`] should reject; everything else goes through
    /// [`Graph::new`].
    ///
    /// Panics if an endpoint is out of range.
    pub fn from_raw(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        let edges: Vec<_> = edges
            .into_iter()
            .map(|(u, v)| (VertexId(u), VertexId(v)))
            .collect();
        for (i, &(u, v)) in edges.iter().enumerate() {
            adjacency[u.0].push((v, EdgeId(i)));
            if u != v {
                adjacency[v.0].push((u, EdgeId(i)));
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self {
            n,
            edges,
            adjacency,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.insert(key.into(), value.to_string());
        self
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut BTreeMap<String, String> {
        &mut self.metadata
    }

    /// Whether the graph carries the triangulation-dual tag.
    pub fn is_triangulation_dual(&self) -> bool {
        self.metadata
            .get(META_TRIANGULATION_DUAL)
            .is_some_and(|v| v == "true")
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n).map(VertexId)
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    #[inline]
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e.0]
    }

    /// Adjacency of `v` in ascending neighbor order.
    pub fn neighbors(&self, v: VertexId) -> Result<&[(VertexId, EdgeId)], GraphError> {
        self.adjacency
            .get(v.0)
            .map(Vec::as_slice)
            .ok_or(GraphError::VertexOutOfRange { vertex: v.0, n: self.n })
    }

    /// Unchecked adjacency access for hot loops.
    #[inline]
    pub fn adjacent(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v.0]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.0].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.0 < self.n
    }

    /// Edge joining `u` and `v`, if any.
    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let list = self.adjacency.get(u.0)?;
        list.binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| list[i].1)
    }

    /// Hop distances from `source`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, source: VertexId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[source.0] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.0].unwrap();
            for &(w, _) in &self.adjacency[u.0] {
                if dist[w.0].is_none() {
                    dist[w.0] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.bfs_distances(VertexId(0)).iter().all(Option::is_some)
    }

    /// Largest shortest-path hop distance, by BFS from every vertex.
    pub fn diameter(&self) -> Result<usize, GraphError> {
        let mut best = 0;
        for s in self.vertices() {
            for (t, d) in self.bfs_distances(s).into_iter().enumerate() {
                match d {
                    Some(d) => best = best.max(d),
                    None => return Err(GraphError::Disconnected(s, VertexId(t))),
                }
            }
        }
        Ok(best)
    }
}

/// A single structural problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SelfLoop(VertexId),
    ParallelEdge(VertexId, VertexId),
    AsymmetricAdjacency { vertex: VertexId, edge: EdgeId },
    Disconnected(VertexId, VertexId),
    DegreeExceeded { vertex: VertexId, degree: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop(v) => write!(f, "self-loop at {v}"),
            Violation::ParallelEdge(u, v) => write!(f, "parallel edges between {u} and {v}"),
            Violation::AsymmetricAdjacency { vertex, edge } => {
                write!(f, "adjacency of {vertex} inconsistent with edge {edge}")
            }
            Violation::Disconnected(u, v) => write!(f, "no path from {u} to {v}"),
            Violation::DegreeExceeded { vertex, degree } => {
                write!(f, "vertex {vertex} has degree {degree} > 3")
            }
        }
    }
}

/// Outcome of [`validate`]; an empty report means the graph is fine.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks simplicity, adjacency symmetry, connectivity and, when
/// `require_max_deg3` is set, the degree bound of triangulation duals.
pub fn validate(g: &Graph, require_max_deg3: bool) -> ValidationReport {
    let mut violations = Vec::new();

    let mut seen = BTreeMap::new();
    for (i, &(u, v)) in g.edges.iter().enumerate() {
        if u == v {
            violations.push(Violation::SelfLoop(u));
            continue;
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key, i).is_some() {
            violations.push(Violation::ParallelEdge(key.0, key.1));
        }
    }

    for (i, &(u, v)) in g.edges.iter().enumerate() {
        let e = EdgeId(i);
        for (a, b) in [(u, v), (v, u)] {
            if !g.adjacency[a.0].contains(&(b, e)) {
                violations.push(Violation::AsymmetricAdjacency { vertex: a, edge: e });
            }
        }
    }
    for (a, list) in g.adjacency.iter().enumerate() {
        for &(b, e) in list {
            let ok = g
                .edges
                .get(e.0)
                .is_some_and(|&(x, y)| (x.0 == a && y == b) || (y.0 == a && x == b));
            if !ok {
                violations.push(Violation::AsymmetricAdjacency { vertex: VertexId(a), edge: e });
            }
        }
    }

    if g.n > 0 {
        let dist = g.bfs_distances(VertexId(0));
        if let Some(t) = dist.iter().position(Option::is_none) {
            violations.push(Violation::Disconnected(VertexId(0), VertexId(t)));
        }
    }

    if require_max_deg3 {
        for v in g.vertices() {
            let degree = g.degree(v);
            if degree > 3 {
                violations.push(Violation::DegreeExceeded { vertex: v, degree });
            }
        }
    }

    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle4() -> Graph {
        Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }

    #[test]
    fn canonical_edge_order() {
        let g = Graph::new(3, [(2, 1), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(VertexId(0), VertexId(1)), (VertexId(1), VertexId(2))]);
    }

    #[test]
    fn cycle_neighbors_sorted() {
        let g = cycle4();
        let e01 = g.edge_between(VertexId(0), VertexId(1)).unwrap();
        let e03 = g.edge_between(VertexId(0), VertexId(3)).unwrap();
        assert_eq!(
            g.neighbors(VertexId(0)).unwrap(),
            &[(VertexId(1), e01), (VertexId(3), e03)]
        );
    }

    #[test]
    fn neighbors_out_of_range() {
        assert_eq!(
            cycle4().neighbors(VertexId(9)),
            Err(GraphError::VertexOutOfRange { vertex: 9, n: 4 })
        );
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(Graph::new(3, [(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(Graph::new(3, [(0, 1), (1, 0)]), Err(GraphError::DuplicateEdge(0, 1)));
        assert!(matches!(Graph::new(2, [(0, 2)]), Err(GraphError::VertexOutOfRange { .. })));
    }

    #[test]
    fn diameter_of_disconnected_graph_names_pair() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        assert_eq!(g.diameter(), Err(GraphError::Disconnected(VertexId(0), VertexId(2))));
    }

    #[test]
    fn trivial_diameters() {
        assert_eq!(Graph::new(1, []).unwrap().diameter(), Ok(0));
        assert_eq!(cycle4().diameter(), Ok(2));
    }

    #[test]
    fn validate_reports_self_loop() {
        let g = Graph::from_raw(2, vec![(0, 1), (1, 1)]);
        let report = validate(&g, false);
        assert!(!report.is_ok());
        assert!(report.violations.contains(&Violation::SelfLoop(VertexId(1))));
        assert_eq!(Violation::SelfLoop(VertexId(1)).to_string(), "self-loop at 1");
    }

    #[test]
    fn validate_reports_parallel_and_disconnected() {
        let g = Graph::from_raw(4, vec![(0, 1), (1, 0), (2, 3)]);
        let report = validate(&g, false);
        assert!(report.violations.contains(&Violation::ParallelEdge(VertexId(0), VertexId(1))));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Disconnected(..))));
    }

    #[test]
    fn validate_degree_flag() {
        let star = Graph::new(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert!(validate(&star, false).is_ok());
        assert_eq!(
            validate(&star, true).violations,
            vec![Violation::DegreeExceeded { vertex: VertexId(0), degree: 4 }]
        );
        assert!(validate(&cycle4(), true).is_ok());
    }

    #[test]
    fn vertex_state_visits() {
        let mut s = VertexState::default();
        assert_eq!(s.last_visit, None);
        s.visit(0);
        s.visit(3);
        assert_eq!(s, VertexState { last_visit: Some(3), visit_count: 2 });
    }
}
