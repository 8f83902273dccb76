//! Primal triangulations and their dual graphs.
//!
//! Text format:
//!
//! ```text
//! P <vertex count>
//! <id> <x> <y>        (ids 0.. in order)
//! T <triangle count>
//! <a> <b> <c>         (primal vertex ids)
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::format::{parse_err, FormatError};
use crate::graph::{EdgeId, Graph, VertexId, META_TRIANGULATION_DUAL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TriangulationError {
    #[error("triangle {triangle} references missing primal vertex {vertex}")]
    MissingVertex { triangle: usize, vertex: usize },
    #[error("triangle {0} is degenerate (repeated corner)")]
    Degenerate(usize),
    #[error("primal edge {0}-{1} is shared by more than two triangles")]
    OverfullEdge(usize, usize),
    #[error("triangle {0} appears twice")]
    DuplicateTriangle(usize),
}

/// A triangulated region: primal vertices, primal edges, triangles, and
/// the dual graph with one vertex per triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    points: Vec<Point>,
    primal_edges: Vec<(usize, usize)>,
    triangles: Vec<[usize; 3]>,
    /// Primal adjacency, sorted.
    primal_adjacency: Vec<Vec<usize>>,
    /// For each dual edge, the primal edge the two triangles share.
    shared_edges: Vec<(usize, usize)>,
    dual: Graph,
}

impl Triangulation {
    /// Derives primal edges and the dual graph from a triangle list.
    /// Corners of each triangle are stored sorted.
    pub fn new(points: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self, TriangulationError> {
        let mut edge_triangles: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        let mut sorted = Vec::with_capacity(triangles.len());
        let mut seen = std::collections::HashSet::new();
        for (t, mut tri) in triangles.into_iter().enumerate() {
            for &v in &tri {
                if v >= points.len() {
                    return Err(TriangulationError::MissingVertex { triangle: t, vertex: v });
                }
            }
            tri.sort_unstable();
            if tri[0] == tri[1] || tri[1] == tri[2] {
                return Err(TriangulationError::Degenerate(t));
            }
            if !seen.insert(tri) {
                return Err(TriangulationError::DuplicateTriangle(t));
            }
            for (a, b) in [(tri[0], tri[1]), (tri[0], tri[2]), (tri[1], tri[2])] {
                let owners = edge_triangles.entry((a, b)).or_default();
                owners.push(t);
                if owners.len() > 2 {
                    return Err(TriangulationError::OverfullEdge(a, b));
                }
            }
            sorted.push(tri);
        }

        let primal_edges: Vec<_> = edge_triangles.keys().copied().collect();
        let mut primal_adjacency = vec![Vec::new(); points.len()];
        for &(a, b) in &primal_edges {
            primal_adjacency[a].push(b);
            primal_adjacency[b].push(a);
        }
        for list in &mut primal_adjacency {
            list.sort_unstable();
        }

        let mut dual_edges: Vec<((usize, usize), (usize, usize))> = edge_triangles
            .iter()
            .filter(|(_, ts)| ts.len() == 2)
            .map(|(&shared, ts)| ((ts[0].min(ts[1]), ts[0].max(ts[1])), shared))
            .collect();
        dual_edges.sort_unstable();
        let dual = Graph::new(sorted.len(), dual_edges.iter().map(|&(d, _)| d))
            .expect("two triangles share at most one edge")
            .with_metadata(META_TRIANGULATION_DUAL, true);
        let shared_edges = dual_edges.into_iter().map(|(_, s)| s).collect();

        Ok(Self {
            points,
            primal_edges,
            triangles: sorted,
            primal_adjacency,
            shared_edges,
            dual,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn primal_edges(&self) -> &[(usize, usize)] {
        &self.primal_edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn dual(&self) -> &Graph {
        &self.dual
    }

    pub fn into_dual(self) -> Graph {
        self.dual
    }

    pub fn dual_mut(&mut self) -> &mut Graph {
        &mut self.dual
    }

    pub fn primal_neighbors(&self, v: usize) -> &[usize] {
        &self.primal_adjacency[v]
    }

    pub fn primal_adjacent(&self, a: usize, b: usize) -> bool {
        self.primal_adjacency
            .get(a)
            .is_some_and(|l| l.binary_search(&b).is_ok())
    }

    /// Primal edge shared by the two triangles joined by dual edge `e`.
    pub fn shared_edge(&self, e: EdgeId) -> (usize, usize) {
        self.shared_edges[e.0]
    }

    pub fn triangle(&self, t: VertexId) -> [usize; 3] {
        self.triangles[t.0]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "P {}", self.points.len()).unwrap();
        for (i, p) in self.points.iter().enumerate() {
            writeln!(out, "{i} {} {}", p.x, p.y).unwrap();
        }
        writeln!(out, "T {}", self.triangles.len()).unwrap();
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let section = |lines: &mut dyn Iterator<Item = (usize, &str)>, tag: &str| {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| parse_err(text.lines().count() + 1, format!("missing `{tag}` section")))?;
            let mut f = line.split_whitespace();
            if f.next() != Some(tag) {
                return Err(parse_err(lineno, format!("expected `{tag} <count>`")));
            }
            f.next()
                .and_then(|c| c.parse::<usize>().ok())
                .ok_or_else(|| parse_err(lineno, format!("expected `{tag} <count>`")))
        };

        let np = section(&mut lines, "P")?;
        let mut points = Vec::with_capacity(np);
        for i in 0..np {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| parse_err(text.lines().count() + 1, "truncated P section"))?;
            let f: Vec<_> = line.split_whitespace().collect();
            let [id, x, y] = f[..] else {
                return Err(parse_err(lineno, "expected `id x y`"));
            };
            if id.parse::<usize>().ok() != Some(i) {
                return Err(parse_err(lineno, format!("expected vertex id {i}")));
            }
            let coord = |s: &str| s.parse::<f64>().map_err(|_| parse_err(lineno, format!("bad coordinate `{s}`")));
            points.push(Point { x: coord(x)?, y: coord(y)? });
        }

        let nt = section(&mut lines, "T")?;
        let mut triangles = Vec::with_capacity(nt);
        let mut last_line = 1;
        for _ in 0..nt {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| parse_err(text.lines().count() + 1, "truncated T section"))?;
            last_line = lineno;
            let ids: Result<Vec<usize>, _> = line.split_whitespace().map(str::parse).collect();
            match ids.as_deref() {
                Ok(&[a, b, c]) => triangles.push([a, b, c]),
                _ => return Err(parse_err(lineno, "expected `a b c`")),
            }
        }
        if let Some((lineno, _)) = lines.next() {
            return Err(parse_err(lineno, "unexpected content after T section"));
        }
        Self::new(points, triangles).map_err(|e| parse_err(last_line, e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FormatError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FormatError> {
        Self::parse(&fs::read_to_string(path)?)
    }
}
