//! Constructors for the graph families used in experiments.
//!
//! Every generator records its family name and parameters in the graph
//! metadata, plus the ids of any distinguished vertices (`entry`, `exit`,
//! `start`, `terminal`).
//!
//! # Wiring
//!
//! * `path(n)`: vertices `0..n` in a line.
//! * `cycle(n)`: vertices `0..n` around a ring; the dual of `n` triangles
//!   fanned around one interior primal vertex.
//! * `four_cycle_chain(k)`: cycle `i` is `4i → 4i+1 → 4i+2 → 4i+3 → 4i`.
//!   The entry of cycle `i` is `4i`, its exit is the opposite vertex `4i+2`,
//!   and a connector edge joins `4i+2` to `4(i+1)`. `4k` vertices,
//!   `5k - 1` edges, `2(k - 1)` vertices of degree 3.
//! * `diamond_gadget_chain(k)`: gadget `i` spans `L = 6i` to `R = 6i + 6`
//!   with internal vertices `t = 6i+1`, `b = 6i+2`, `c = 6i+3`,
//!   `x = 6i+4`, `y = 6i+5` and edges `L-t, L-b, t-c, b-c, c-x, c-y, x-R,
//!   y-R`. A walk arriving at the degree-4 hub `c` from the left has three
//!   onward routes, and one of them (the other of `t`/`b`) leads back
//!   left. Consecutive gadgets share their terminal, which also has degree
//!   4. `6k + 1` vertices, `8k` edges. This wiring is a reconstruction of a
//!   published figure whose exact layout is not available.
//! * `flower_barrier(delta, stair_len)`: start `s = 0`, common terminal
//!   `z = 1`, edge `s-z`. Staircase `j` (for `j < delta - 1`) is a path of
//!   `stair_len` vertices starting at `2 + j(stair_len + 2)`, joined to `s`
//!   at its first vertex and to `z` at its last. The path vertex at offset
//!   `stair_len / 2` is a flower center carrying one triangular petal made
//!   of the two vertices that follow the path. `2 + (delta-1)(stair_len+2)`
//!   vertices.
//! * `grid_triangulation(w, h)`: primal points `(i, j)` with id
//!   `j(w+1) + i`; unit square `(i, j)` is split along its `(i,j)-(i+1,j+1)`
//!   diagonal into triangle `2(jw+i)` (below the diagonal) and
//!   `2(jw+i) + 1` (above it).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::format::{load_graph as load, save_graph as save};
use crate::graph::{Graph, META_FAMILY, META_TRIANGULATION_DUAL};
use crate::triangulation::{Point, Triangulation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("unknown family `{0}` (expected one of: {families})", families = Family::NAMES.join(", "))]
    UnknownFamily(String),
    #[error("{family}: missing parameter `{param}` (usage: {usage})", usage = family.usage())]
    MissingParam { family: Family, param: &'static str },
    #[error("{family}: unknown parameter `{param}` (usage: {usage})", usage = family.usage())]
    UnknownParam { family: Family, param: String },
    #[error("{family}: {param} = {value} but {requirement} (usage: {usage})", usage = family.usage())]
    InvalidParam {
        family: Family,
        param: &'static str,
        value: i64,
        requirement: &'static str,
    },
    #[error("bad parameter `{0}`, expected key=value")]
    BadParamSyntax(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Path,
    Cycle,
    FourCycleChain,
    DiamondGadgetChain,
    FlowerBarrier,
    GridTriangulation,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Path,
        Family::Cycle,
        Family::FourCycleChain,
        Family::DiamondGadgetChain,
        Family::FlowerBarrier,
        Family::GridTriangulation,
    ];
    const NAMES: [&'static str; 6] = [
        "path",
        "cycle",
        "four_cycle_chain",
        "diamond_gadget_chain",
        "flower_barrier",
        "grid_triangulation",
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES[self as usize]
    }

    pub fn params(self) -> &'static [&'static str] {
        match self {
            Family::Path | Family::Cycle => &["n"],
            Family::FourCycleChain | Family::DiamondGadgetChain => &["k"],
            Family::FlowerBarrier => &["delta", "stair_len"],
            Family::GridTriangulation => &["w", "h"],
        }
    }

    pub fn usage(self) -> &'static str {
        match self {
            Family::Path => "path n=<n >= 1>",
            Family::Cycle => "cycle n=<n >= 3>",
            Family::FourCycleChain => "four_cycle_chain k=<k >= 1>",
            Family::DiamondGadgetChain => "diamond_gadget_chain k=<k >= 1>",
            Family::FlowerBarrier => "flower_barrier delta=<delta >= 2> stair_len=<len >= 1>",
            Family::GridTriangulation => "grid_triangulation w=<w >= 1> h=<h >= 1>",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        let family = match norm.as_str() {
            "path" | "path_dual" => Family::Path,
            "cycle" => Family::Cycle,
            "four_cycle_chain" => Family::FourCycleChain,
            "diamond_gadget_chain" | "diamond" => Family::DiamondGadgetChain,
            "flower_barrier" | "flower" => Family::FlowerBarrier,
            "grid_triangulation" | "grid" => Family::GridTriangulation,
            _ => return Err(GenError::UnknownFamily(s.to_string())),
        };
        Ok(family)
    }
}

/// A graph family together with its integer parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub params: BTreeMap<String, i64>,
}

impl FamilySpec {
    pub fn new(family: Family, params: impl IntoIterator<Item = (impl Into<String>, i64)>) -> Self {
        Self {
            family,
            params: params
                .into_iter()
                .map(|(k, v)| (k.into().replace('-', "_"), v))
                .collect(),
        }
    }

    /// Parses `key=value` tokens.
    pub fn parse(family: &str, params: &[impl AsRef<str>]) -> Result<Self, GenError> {
        let family: Family = family.parse()?;
        let mut map = BTreeMap::new();
        for p in params {
            let p = p.as_ref();
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| GenError::BadParamSyntax(p.to_string()))?;
            let v: i64 = v
                .trim()
                .parse()
                .map_err(|_| GenError::BadParamSyntax(p.to_string()))?;
            map.insert(k.trim().replace('-', "_"), v);
        }
        Ok(Self { family, params: map })
    }

    fn check(&self) -> Result<(), GenError> {
        for k in self.params.keys() {
            if !self.family.params().contains(&k.as_str()) {
                return Err(GenError::UnknownParam {
                    family: self.family,
                    param: k.clone(),
                });
            }
        }
        Ok(())
    }

    fn get(&self, param: &'static str, min: i64, requirement: &'static str) -> Result<usize, GenError> {
        let value = *self.params.get(param).ok_or(GenError::MissingParam {
            family: self.family,
            param,
        })?;
        if value < min {
            return Err(GenError::InvalidParam {
                family: self.family,
                param,
                value,
                requirement,
            });
        }
        Ok(value as usize)
    }

    /// Builds the graph. For `grid_triangulation` this is the dual graph.
    pub fn graph(&self) -> Result<Graph, GenError> {
        self.check()?;
        match self.family {
            Family::GridTriangulation => Ok(self.triangulation()?.into_dual()),
            Family::Path => path_dual(self.get("n", 1, "n must be >= 1")?),
            Family::Cycle => cycle(self.get("n", 3, "n must be >= 3")?),
            Family::FourCycleChain => four_cycle_chain(self.get("k", 1, "k must be >= 1")?),
            Family::DiamondGadgetChain => diamond_gadget_chain(self.get("k", 1, "k must be >= 1")?),
            Family::FlowerBarrier => flower_barrier(
                self.get("delta", 2, "delta must be >= 2")?,
                self.get("stair_len", 1, "stair_len must be >= 1")?,
            ),
        }
    }

    /// Builds the primal triangulation; only `grid_triangulation` has one.
    pub fn triangulation(&self) -> Result<Triangulation, GenError> {
        self.check()?;
        if self.family != Family::GridTriangulation {
            return Err(GenError::UnknownFamily(format!("{} has no triangulation", self.family)));
        }
        grid_triangulation(
            self.get("w", 1, "w must be >= 1")?,
            self.get("h", 1, "h must be >= 1")?,
        )
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

fn tag(g: Graph, family: Family, params: &[(&str, usize)], dual: bool) -> Graph {
    let mut g = g.with_metadata(META_FAMILY, family);
    for (k, v) in params {
        g = g.with_metadata(*k, v);
    }
    if dual {
        g = g.with_metadata(META_TRIANGULATION_DUAL, true);
    }
    g
}

fn invalid(family: Family, param: &'static str, value: usize, requirement: &'static str) -> GenError {
    GenError::InvalidParam {
        family,
        param,
        value: value as i64,
        requirement,
    }
}

pub fn path_dual(n: usize) -> Result<Graph, GenError> {
    if n == 0 {
        return Err(invalid(Family::Path, "n", n, "n must be >= 1"));
    }
    let g = Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path is simple");
    Ok(tag(g, Family::Path, &[("n", n)], true))
}

pub fn cycle(n: usize) -> Result<Graph, GenError> {
    if n < 3 {
        return Err(invalid(Family::Cycle, "n", n, "n must be >= 3"));
    }
    let g = Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is simple");
    Ok(tag(g, Family::Cycle, &[("n", n)], true))
}

pub fn four_cycle_chain(k: usize) -> Result<Graph, GenError> {
    if k == 0 {
        return Err(invalid(Family::FourCycleChain, "k", k, "k must be >= 1"));
    }
    let mut edges = Vec::with_capacity(5 * k);
    for i in 0..k {
        let b = 4 * i;
        edges.extend([(b, b + 1), (b + 1, b + 2), (b + 2, b + 3), (b + 3, b)]);
        if i + 1 < k {
            edges.push((b + 2, b + 4));
        }
    }
    let g = Graph::new(4 * k, edges).expect("chain is simple");
    Ok(tag(g, Family::FourCycleChain, &[("k", k)], true)
        .with_metadata("entry", 0)
        .with_metadata("exit", 4 * k - 2))
}

pub fn diamond_gadget_chain(k: usize) -> Result<Graph, GenError> {
    if k == 0 {
        return Err(invalid(Family::DiamondGadgetChain, "k", k, "k must be >= 1"));
    }
    let mut edges = Vec::with_capacity(8 * k);
    for i in 0..k {
        let l = 6 * i;
        let (t, b, c, x, y, r) = (l + 1, l + 2, l + 3, l + 4, l + 5, l + 6);
        edges.extend([(l, t), (l, b), (t, c), (b, c), (c, x), (c, y), (x, r), (y, r)]);
    }
    let g = Graph::new(6 * k + 1, edges).expect("gadget chain is simple");
    Ok(tag(g, Family::DiamondGadgetChain, &[("k", k)], false)
        .with_metadata("entry", 0)
        .with_metadata("exit", 6 * k))
}

/// Vertex ids of one staircase of a [`flower_barrier`] graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Staircase {
    /// Path vertices from the `s` side to the terminal side.
    pub path: Vec<usize>,
    pub flower_center: usize,
    pub petals: [usize; 2],
}

pub const FLOWER_START: usize = 0;
pub const FLOWER_TERMINAL: usize = 1;

/// Layout of the staircases of `flower_barrier(delta, stair_len)`.
pub fn flower_staircases(delta: usize, stair_len: usize) -> Vec<Staircase> {
    (0..delta.saturating_sub(1))
        .map(|j| {
            let base = 2 + j * (stair_len + 2);
            Staircase {
                path: (base..base + stair_len).collect(),
                flower_center: base + stair_len / 2,
                petals: [base + stair_len, base + stair_len + 1],
            }
        })
        .collect()
}

pub fn flower_barrier_vertex_count(delta: usize, stair_len: usize) -> usize {
    2 + (delta - 1) * (stair_len + 2)
}

pub fn flower_barrier(delta: usize, stair_len: usize) -> Result<Graph, GenError> {
    if delta < 2 {
        return Err(invalid(Family::FlowerBarrier, "delta", delta, "delta must be >= 2"));
    }
    if stair_len == 0 {
        return Err(invalid(Family::FlowerBarrier, "stair_len", stair_len, "stair_len must be >= 1"));
    }
    let mut edges = vec![(FLOWER_START, FLOWER_TERMINAL)];
    for st in flower_staircases(delta, stair_len) {
        edges.push((FLOWER_START, st.path[0]));
        edges.extend(st.path.windows(2).map(|w| (w[0], w[1])));
        edges.push((*st.path.last().unwrap(), FLOWER_TERMINAL));
        let [a, b] = st.petals;
        edges.extend([(st.flower_center, a), (a, b), (b, st.flower_center)]);
    }
    let g = Graph::new(flower_barrier_vertex_count(delta, stair_len), edges)
        .expect("flower graph is simple");
    Ok(tag(
        g,
        Family::FlowerBarrier,
        &[("delta", delta), ("stair_len", stair_len)],
        false,
    )
    .with_metadata("start", FLOWER_START)
    .with_metadata("terminal", FLOWER_TERMINAL))
}

pub fn grid_triangulation(w: usize, h: usize) -> Result<Triangulation, GenError> {
    if w == 0 {
        return Err(invalid(Family::GridTriangulation, "w", w, "w must be >= 1"));
    }
    if h == 0 {
        return Err(invalid(Family::GridTriangulation, "h", h, "h must be >= 1"));
    }
    let id = |i: usize, j: usize| j * (w + 1) + i;
    let points = (0..=h)
        .flat_map(|j| (0..=w).map(move |i| Point { x: i as f64, y: j as f64 }))
        .collect();
    let mut triangles = Vec::with_capacity(2 * w * h);
    for j in 0..h {
        for i in 0..w {
            let (p00, p10, p01, p11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            triangles.push([p00, p10, p11]);
            triangles.push([p00, p11, p01]);
        }
    }
    let mut t = Triangulation::new(points, triangles).expect("grid triangulation is valid");
    let dual = std::mem::replace(t.dual_mut(), Graph::new(0, []).unwrap());
    *t.dual_mut() = tag(dual, Family::GridTriangulation, &[("w", w), ("h", h)], true);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{validate, VertexId};

    fn degrees(g: &Graph) -> Vec<usize> {
        g.vertices().map(|v| g.degree(v)).collect()
    }

    #[test]
    fn path_shapes() {
        let p1 = path_dual(1).unwrap();
        assert_eq!((p1.vertex_count(), p1.edge_count()), (1, 0));
        assert_eq!(path_dual(2).unwrap().edge_count(), 1);
        assert_eq!(degrees(&path_dual(5).unwrap()), [1, 2, 2, 2, 1]);
        assert!(path_dual(0).is_err());
    }

    #[test]
    fn cycle_shapes() {
        assert_eq!(degrees(&cycle(3).unwrap()), [2, 2, 2]);
        let c8 = cycle(8).unwrap();
        assert_eq!(c8.edge_count(), 8);
        assert_eq!(c8.diameter(), Ok(4));
        assert_eq!(cycle(6).unwrap().diameter(), Ok(3));
        assert!(cycle(2).is_err());
    }

    #[test]
    fn four_cycle_chain_counts() {
        let g1 = four_cycle_chain(1).unwrap();
        assert_eq!((g1.vertex_count(), g1.edge_count(), g1.max_degree()), (4, 4, 2));
        let g2 = four_cycle_chain(2).unwrap();
        assert_eq!((g2.vertex_count(), g2.edge_count()), (8, 9));
        assert_eq!(degrees(&g2).iter().filter(|&&d| d == 3).count(), 2);
        // the connector vertex on either side has three neighbors
        assert_eq!(g2.neighbors(VertexId(2)).unwrap().len(), 3);
        let g4 = four_cycle_chain(4).unwrap();
        assert_eq!((g4.vertex_count(), g4.edge_count()), (16, 19));
        assert!(validate(&g4, true).is_ok());
    }

    #[test]
    fn diamond_chain_shapes() {
        let g1 = diamond_gadget_chain(1).unwrap();
        assert!(validate(&g1, false).is_ok());
        let g2 = diamond_gadget_chain(2).unwrap();
        assert_eq!(g2.vertex_count(), 2 * g1.vertex_count() - 1);
        assert_eq!(g2.edge_count(), 16);
        let g3 = diamond_gadget_chain(3).unwrap();
        assert!(degrees(&g3).contains(&4));
        assert!(!validate(&g3, true).is_ok());
    }

    #[test]
    fn flower_shapes() {
        let g = flower_barrier(2, 1).unwrap();
        assert_eq!(g.degree(VertexId(FLOWER_START)), 2);
        assert_eq!(g.vertex_count(), 5);

        let g = flower_barrier(3, 4).unwrap();
        assert_eq!(g.degree(VertexId(FLOWER_START)), 3);
        assert_eq!(g.degree(VertexId(FLOWER_TERMINAL)), 3);
        assert_eq!(g.vertex_count(), 14);
        let st = flower_staircases(3, 4);
        assert_eq!(st.len(), 2);
        for s in &st {
            assert!(g.edge_between(VertexId(*s.path.last().unwrap()), VertexId(FLOWER_TERMINAL)).is_some());
            assert_eq!(g.degree(VertexId(s.flower_center)), 4);
        }

        let g = flower_barrier(4, 6).unwrap();
        assert_eq!(g.vertex_count(), 26);
        assert_eq!(g.vertex_count(), flower_barrier_vertex_count(4, 6));
        assert_eq!(g.metadata()["start"], "0");
    }

    #[test]
    fn grid_small_cases() {
        let t = grid_triangulation(1, 1).unwrap();
        assert_eq!(t.dual().vertex_count(), 2);
        assert_eq!(t.dual().edge_count(), 1);

        // T1 - T0 - T3 - T2: the lower-left triangle touches the upper-right one
        // across the shared vertical x = 1.
        let t = grid_triangulation(2, 1).unwrap();
        let pairs: Vec<_> = t.dual().edges().iter().map(|&(u, v)| (u.0, v.0)).collect();
        assert_eq!(pairs, [(0, 1), (0, 3), (2, 3)]);

        let t = grid_triangulation(10, 10).unwrap();
        assert_eq!(t.dual().vertex_count(), 200);
        assert!(validate(t.dual(), true).is_ok());
    }

    #[test]
    fn spec_parsing() {
        let s = FamilySpec::parse("four-cycle-chain", &["k=3"]).unwrap();
        assert_eq!(s.graph().unwrap().vertex_count(), 12);
        let s = FamilySpec::parse("flower", &["delta=3", "stair-len=4"]).unwrap();
        assert_eq!(s.graph().unwrap().vertex_count(), 14);
        assert!(matches!(
            FamilySpec::parse("cycle", &["n=2"]).unwrap().graph(),
            Err(GenError::InvalidParam { .. })
        ));
        assert!(matches!(
            FamilySpec::parse("cycle", &["k=2"]).unwrap().graph(),
            Err(GenError::UnknownParam { .. })
        ));
        assert!(matches!(FamilySpec::parse("torus", &["n=2"]), Err(GenError::UnknownFamily(_))));
        assert!(FamilySpec::parse("cycle", &["n"]).is_err());
    }
}
