//! Plain-text graph format.
//!
//! ```text
//! n m
//! u v          (m lines, u < v, ascending lexicographic order)
//! # key value  (optional metadata lines)
//! ```
//!
//! The writer is byte-stable: the same graph always produces the same text.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::graph::{Graph, GraphError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub(crate) fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", g.vertex_count(), g.edge_count()).unwrap();
    for &(u, v) in g.edges() {
        writeln!(out, "{} {}", u.0.min(v.0), u.0.max(v.0)).unwrap();
    }
    for (k, v) in g.metadata() {
        writeln!(out, "# {k} {v}").unwrap();
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Graph, FormatError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let (lineno, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<_> = header.split_whitespace().collect();
    let [n, m] = fields[..] else {
        return Err(parse_err(lineno, "expected header `n m`"));
    };
    let n: usize = n.parse().map_err(|_| parse_err(lineno, format!("bad vertex count `{n}`")))?;
    let m: usize = m.parse().map_err(|_| parse_err(lineno, format!("bad edge count `{m}`")))?;

    let mut edges = Vec::with_capacity(m);
    let mut seen = std::collections::HashSet::with_capacity(m);
    for _ in 0..m {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| parse_err(text.lines().count() + 1, format!("expected {m} edge lines")))?;
        let fields: Vec<_> = line.split_whitespace().collect();
        let [u, v] = fields[..] else {
            return Err(parse_err(lineno, "expected edge `u v`"));
        };
        let parse_vertex = |s: &str| -> Result<usize, FormatError> {
            let x: usize = s.parse().map_err(|_| parse_err(lineno, format!("bad vertex `{s}`")))?;
            if x >= n {
                return Err(parse_err(lineno, format!("vertex {x} out of range")));
            }
            Ok(x)
        };
        let (u, v) = (parse_vertex(u)?, parse_vertex(v)?);
        if u == v {
            return Err(parse_err(lineno, format!("self-loop at {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(parse_err(lineno, format!("duplicate edge {u} {v}")));
        }
        edges.push((u, v));
    }

    let mut g = Graph::new(n, edges).map_err(|e: GraphError| parse_err(1, e.to_string()))?;
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let Some(rest) = line.strip_prefix('#') else {
            return Err(parse_err(lineno, "unexpected content after edge list"));
        };
        let rest = rest.trim();
        let (key, value) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        if key.is_empty() {
            continue;
        }
        g.metadata_mut().insert(key.to_string(), value.trim().to_string());
    }
    Ok(g)
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<(), FormatError> {
    fs::write(path, write_graph(g))?;
    Ok(())
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph, FormatError> {
    parse_graph(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_sorted_edges_and_metadata() {
        let g = Graph::new(3, [(2, 1), (0, 1)])
            .unwrap()
            .with_metadata("family", "path")
            .with_metadata("n", 3);
        assert_eq!(write_graph(&g), "3 2\n0 1\n1 2\n# family path\n# n 3\n");
    }

    #[test]
    fn malformed_header_is_line_one() {
        let err = parse_graph("three 2\n0 1\n").unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 1, .. }), "{err}");
        let err = parse_graph("3\n").unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn rejects_self_loop_with_line_number() {
        let err = parse_graph("4 2\n0 1\n3 3\n").unwrap_err();
        match err {
            FormatError::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("self-loop"), "{message}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        assert!(parse_graph("3 2\n0 1\n1 0\n").unwrap_err().to_string().contains("duplicate"));
        assert!(parse_graph("3 1\n0 3\n").unwrap_err().to_string().contains("out of range"));
        assert!(parse_graph("3 2\n0 1\n").unwrap_err().to_string().contains("expected 2 edge"));
    }

    #[test]
    fn metadata_values_keep_spaces() {
        let g = parse_graph("2 1\n0 1\n# note hello world\n\n").unwrap();
        assert_eq!(g.metadata()["note"], "hello world");
    }
}
