//! Owner assignment for the distributed triangulation.
//!
//! Each triangle is owned by one of its corners, and each dual edge by the
//! pair of owners of its two triangles. The assignment is valid when the
//! owners of any two adjacent triangles are distinct primal vertices joined
//! by a primal edge, so every dual edge maps onto a primal communication
//! link.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::graph::{EdgeId, VertexId};
use crate::triangulation::Triangulation;

/// Node budget of [`assign_owners`].
pub const DEFAULT_OWNER_BUDGET: u64 = 1_000_000;

/// Upper bound checked on the number of dual edges any one primal vertex
/// owns: six triangles around a primal vertex, three dual edges each.
pub const OWNED_DUAL_EDGE_BOUND: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwnerMap {
    /// Owning primal vertex of each triangle.
    pub triangle_owner: Vec<usize>,
    /// Owners of the two triangles of each dual edge, lower triangle first.
    pub dual_edge_owners: Vec<(usize, usize)>,
}

impl OwnerMap {
    pub fn from_triangle_owners(t: &Triangulation, triangle_owner: Vec<usize>) -> Self {
        let dual_edge_owners = t
            .dual()
            .edges()
            .iter()
            .map(|&(a, b)| (triangle_owner[a.0], triangle_owner[b.0]))
            .collect();
        Self {
            triangle_owner,
            dual_edge_owners,
        }
    }

    /// Number of dual edges each primal vertex is an owner of.
    pub fn owned_dual_edges(&self, primal_vertices: usize) -> Vec<usize> {
        let mut count = vec![0; primal_vertices];
        for &(a, b) in &self.dual_edge_owners {
            count[a] += 1;
            count[b] += 1;
        }
        count
    }
}

/// Returned when no valid assignment was found.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("owner search {outcome} after {nodes} nodes ({assigned}/{total} triangles assigned)",
    outcome = if *.exhausted { "ran out of budget" } else { "proved infeasibility" },
    assigned = .partial.iter().filter(|o| o.is_some()).count(),
    total = .partial.len())]
pub struct InfeasibilityReport {
    /// Deepest partial assignment reached.
    pub partial: Vec<Option<usize>>,
    pub nodes: u64,
    /// `true` if the budget ran out, `false` if the search space was
    /// exhausted without a solution.
    pub exhausted: bool,
}

fn compatible(t: &Triangulation, a: usize, b: usize) -> bool {
    a != b && t.primal_adjacent(a, b)
}

pub fn assign_owners(t: &Triangulation) -> Result<OwnerMap, InfeasibilityReport> {
    assign_owners_with_budget(t, DEFAULT_OWNER_BUDGET)
}

/// Backtracking search over corner choices. Triangles are processed in BFS
/// order over the dual graph. Candidate corners lying on an edge shared with
/// an already-assigned neighbor come first, then the rest; ties go to the
/// lowest primal id.
pub fn assign_owners_with_budget(t: &Triangulation, budget: u64) -> Result<OwnerMap, InfeasibilityReport> {
    let dual = t.dual();
    let nt = dual.vertex_count();

    let mut order = Vec::with_capacity(nt);
    let mut seen = vec![false; nt];
    for root in 0..nt {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(w, _) in dual.adjacent(VertexId(u)) {
                if !seen[w.0] {
                    seen[w.0] = true;
                    queue.push_back(w.0);
                }
            }
        }
    }

    struct Ctx<'a> {
        t: &'a Triangulation,
        order: Vec<usize>,
        owner: Vec<Option<usize>>,
        best: Vec<Option<usize>>,
        best_depth: usize,
        nodes: u64,
        budget: u64,
    }

    impl Ctx<'_> {
        fn candidates(&self, tri: usize) -> Vec<usize> {
            let corners = self.t.triangles()[tri];
            let mut preferred = Vec::new();
            for &(w, e) in self.t.dual().adjacent(VertexId(tri)) {
                if self.owner[w.0].is_some() {
                    let (a, b) = self.t.shared_edge(e);
                    preferred.extend([a, b]);
                }
            }
            let mut ranked: Vec<(bool, usize)> = corners
                .iter()
                .map(|&c| (!preferred.contains(&c), c))
                .collect();
            ranked.sort_unstable();
            ranked
                .into_iter()
                .map(|(_, c)| c)
                .filter(|&c| {
                    self.t.dual().adjacent(VertexId(tri)).iter().all(|&(w, _)| match self.owner[w.0] {
                        Some(o) => compatible(self.t, c, o),
                        None => true,
                    })
                })
                .collect()
        }

        /// `Some(true)` solved, `Some(false)` dead end, `None` out of budget.
        fn solve(&mut self, depth: usize) -> Option<bool> {
            if depth > self.best_depth {
                self.best_depth = depth;
                self.best = self.owner.clone();
            }
            if depth == self.order.len() {
                return Some(true);
            }
            let tri = self.order[depth];
            for c in self.candidates(tri) {
                self.nodes += 1;
                if self.nodes > self.budget {
                    return None;
                }
                self.owner[tri] = Some(c);
                match self.solve(depth + 1) {
                    Some(true) => return Some(true),
                    Some(false) => {}
                    None => return None,
                }
                self.owner[tri] = None;
            }
            Some(false)
        }
    }

    let mut ctx = Ctx {
        t,
        order,
        owner: vec![None; nt],
        best: vec![None; nt],
        best_depth: 0,
        nodes: 0,
        budget,
    };
    match ctx.solve(0) {
        Some(true) => {
            let owners = ctx.owner.into_iter().map(|o| o.unwrap()).collect();
            Ok(OwnerMap::from_triangle_owners(t, owners))
        }
        outcome => Err(InfeasibilityReport {
            partial: ctx.best,
            nodes: ctx.nodes,
            exhausted: outcome.is_none(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OwnershipViolation {
    /// The owner is not a corner of its triangle.
    NotCorner { triangle: VertexId, owner: usize },
    /// Owners of two adjacent triangles are equal or not primal-adjacent.
    OwnersNotAdjacent { triangles: (VertexId, VertexId), owners: (usize, usize) },
    /// A dual edge's owner pair disagrees with its triangles' owners.
    OwnerPairMismatch { edge: EdgeId },
    /// A primal vertex owns more dual edges than allowed.
    ExcessOwnership { vertex: usize, owned: usize, bound: usize },
}

impl fmt::Display for OwnershipViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotCorner { triangle, owner } => write!(f, "owner {owner} is not a corner of triangle {triangle}"),
            Self::OwnersNotAdjacent { triangles, owners } => write!(
                f,
                "triangles {} and {} have owners {} and {} that are not primal neighbors",
                triangles.0, triangles.1, owners.0, owners.1
            ),
            Self::OwnerPairMismatch { edge } => write!(f, "dual edge {edge} has inconsistent owners"),
            Self::ExcessOwnership { vertex, owned, bound } => {
                write!(f, "primal vertex {vertex} owns {owned} dual edges (bound {bound})")
            }
        }
    }
}

/// Checks that owners are corners and that every pair of adjacent triangles
/// has distinct, primal-adjacent owners. Returns the violating pairs.
pub fn verify_owner_adjacency(t: &Triangulation, o: &OwnerMap) -> Result<(), Vec<OwnershipViolation>> {
    let mut violations = Vec::new();
    for (tri, &owner) in o.triangle_owner.iter().enumerate() {
        if !t.triangles()[tri].contains(&owner) {
            violations.push(OwnershipViolation::NotCorner {
                triangle: VertexId(tri),
                owner,
            });
        }
    }
    for &(a, b) in t.dual().edges() {
        let owners = (o.triangle_owner[a.0], o.triangle_owner[b.0]);
        if !compatible(t, owners.0, owners.1) {
            violations.push(OwnershipViolation::OwnersNotAdjacent {
                triangles: (a, b),
                owners,
            });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Result of [`verify_dual_edge_owners`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualEdgeReport {
    pub violations: Vec<OwnershipViolation>,
    /// Most dual edges owned by any single primal vertex.
    pub max_owned: usize,
    pub bound: usize,
}

impl DualEdgeReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every dual edge: its owner pair must match the owners of its two
/// triangles, and those must be joined by a primal edge. Also checks that no
/// primal vertex owns more than [`OWNED_DUAL_EDGE_BOUND`] dual edges, nor
/// more than three per triangle it owns.
pub fn verify_dual_edge_owners(t: &Triangulation, o: &OwnerMap) -> DualEdgeReport {
    let mut violations = Vec::new();
    for (i, &(a, b)) in t.dual().edges().iter().enumerate() {
        let expected = (o.triangle_owner[a.0], o.triangle_owner[b.0]);
        let Some(&pair) = o.dual_edge_owners.get(i) else {
            violations.push(OwnershipViolation::OwnerPairMismatch { edge: EdgeId(i) });
            continue;
        };
        if pair != expected {
            violations.push(OwnershipViolation::OwnerPairMismatch { edge: EdgeId(i) });
        }
        if !compatible(t, pair.0, pair.1) {
            violations.push(OwnershipViolation::OwnersNotAdjacent {
                triangles: (a, b),
                owners: pair,
            });
        }
    }

    let owned = o.owned_dual_edges(t.points().len());
    let mut triangles_owned = vec![0; t.points().len()];
    for &v in &o.triangle_owner {
        triangles_owned[v] += 1;
    }
    for (v, &count) in owned.iter().enumerate() {
        let bound = OWNED_DUAL_EDGE_BOUND.min(3 * triangles_owned[v]);
        if count > bound {
            violations.push(OwnershipViolation::ExcessOwnership {
                vertex: v,
                owned: count,
                bound,
            });
        }
    }

    DualEdgeReport {
        violations,
        max_owned: owned.into_iter().max().unwrap_or(0),
        bound: OWNED_DUAL_EDGE_BOUND,
    }
}
