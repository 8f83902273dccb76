//! Local patrolling policies.
//!
//! A policy sees only a [`LocalView`] and picks one incident edge. The four
//! deterministic policies each minimize a key over the neighbors; ties are
//! settled by a [`TieBreak`] rule.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, LocalView, NeighborView, Round, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("vertex {0} has no neighbors")]
    Isolated(VertexId),
    #[error("scripted tie-break exhausted after {0} choices")]
    ScriptExhausted(usize),
    #[error("scripted choice {choice} out of range for a tie among {tied} candidates")]
    ScriptOutOfRange { choice: usize, tied: usize },
    #[error("unknown policy `{0}` (expected lrv-v, lrv-e, lfv-v, lfv-e or random)")]
    UnknownPolicy(String),
    #[error("bad tie-break `{0}` (expected lowest-id, seeded-random:<seed> or scripted:<i,j,..>)")]
    BadTieBreak(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    /// Least recently visited adjacent vertex.
    LrvV,
    /// Least recently traversed incident edge.
    LrvE,
    /// Least frequently visited adjacent vertex.
    LfvV,
    /// Least frequently traversed incident edge.
    LfvE,
    /// Uniform random neighbor.
    Random,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::LrvV,
        PolicyKind::LrvE,
        PolicyKind::LfvV,
        PolicyKind::LfvE,
        PolicyKind::Random,
    ];
    pub const DETERMINISTIC: [PolicyKind; 4] =
        [PolicyKind::LrvV, PolicyKind::LrvE, PolicyKind::LfvV, PolicyKind::LfvE];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::LrvV => "LRV_V",
            PolicyKind::LrvE => "LRV_E",
            PolicyKind::LfvV => "LFV_V",
            PolicyKind::LfvE => "LFV_E",
            PolicyKind::Random => "RANDOM",
        }
    }

    /// Edge policies compare incident edges, vertex policies compare
    /// neighboring vertices.
    pub fn uses_edges(self) -> bool {
        matches!(self, PolicyKind::LrvE | PolicyKind::LfvE)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "lrv_v" => Ok(PolicyKind::LrvV),
            "lrv_e" => Ok(PolicyKind::LrvE),
            "lfv_v" => Ok(PolicyKind::LfvV),
            "lfv_e" => Ok(PolicyKind::LfvE),
            "random" => Ok(PolicyKind::Random),
            _ => Err(PolicyError::UnknownPolicy(s.to_string())),
        }
    }
}

/// How a tie among equally good candidates is settled.
///
/// Candidates are ordered by ascending neighbor id (vertex policies) or
/// ascending edge id (edge policies). A `Scripted` entry is an index into
/// that order and is consumed only when there are at least two candidates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TieBreak {
    #[default]
    LowestId,
    SeededRandom(u64),
    Scripted(Vec<usize>),
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TieBreak::LowestId => f.write_str("lowest-id"),
            TieBreak::SeededRandom(s) => write!(f, "seeded-random:{s}"),
            TieBreak::Scripted(seq) => {
                f.write_str("scripted:")?;
                for (i, c) in seq.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for TieBreak {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PolicyError::BadTieBreak(s.to_string());
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let (name, arg) = match norm.split_once(':') {
            Some((n, a)) => (n.to_string(), Some(a.to_string())),
            None => (norm.clone(), None),
        };
        match (name.as_str(), arg) {
            ("lowest-id", None) => Ok(TieBreak::LowestId),
            ("seeded-random", Some(a)) => a.trim().parse().map(TieBreak::SeededRandom).map_err(|_| bad()),
            ("scripted", Some(a)) => a
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()
                .map(TieBreak::Scripted),
            _ => Err(bad()),
        }
    }
}

/// Mutable tie-break state carried by a simulation.
#[derive(Debug, Clone)]
pub enum TieBreakState {
    LowestId,
    SeededRandom(ChaCha8Rng),
    Scripted { choices: Vec<usize>, cursor: usize },
}

impl TieBreakState {
    pub fn new(rule: &TieBreak) -> Self {
        match rule {
            TieBreak::LowestId => TieBreakState::LowestId,
            TieBreak::SeededRandom(seed) => TieBreakState::SeededRandom(ChaCha8Rng::seed_from_u64(*seed)),
            TieBreak::Scripted(choices) => TieBreakState::Scripted {
                choices: choices.clone(),
                cursor: 0,
            },
        }
    }

    /// Index into a tied set of size `tied >= 2`.
    pub fn pick(&mut self, tied: usize) -> Result<usize, PolicyError> {
        debug_assert!(tied >= 2);
        match self {
            TieBreakState::LowestId => Ok(0),
            TieBreakState::SeededRandom(rng) => Ok(rng.gen_range(0..tied)),
            TieBreakState::Scripted { choices, cursor } => {
                let choice = *choices.get(*cursor).ok_or(PolicyError::ScriptExhausted(*cursor))?;
                if choice >= tied {
                    return Err(PolicyError::ScriptOutOfRange { choice, tied });
                }
                *cursor += 1;
                Ok(choice)
            }
        }
    }

    /// Number of scripted choices consumed so far.
    pub fn consumed(&self) -> usize {
        match self {
            TieBreakState::Scripted { cursor, .. } => *cursor,
            _ => 0,
        }
    }
}

/// Where a robot goes next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub next: VertexId,
    pub via: EdgeId,
}

/// Ordering key for "least recently": never visited sorts before any round.
#[inline]
fn recency_key(last: Option<Round>) -> (bool, Round) {
    match last {
        None => (false, 0),
        Some(r) => (true, r),
    }
}

/// Chooses the next move for a robot.
///
/// `walk_rng` drives [`PolicyKind::Random`] and is untouched by the other
/// policies.
pub fn decide(
    policy: PolicyKind,
    view: &LocalView,
    tiebreak: &mut TieBreakState,
    walk_rng: &mut dyn RngCore,
) -> Result<Decision, PolicyError> {
    if view.neighbors.is_empty() {
        return Err(PolicyError::Isolated(view.current));
    }
    let to_decision = |n: &NeighborView| Decision {
        next: n.vertex,
        via: n.edge,
    };

    if policy == PolicyKind::Random {
        let i = walk_rng.gen_range(0..view.neighbors.len());
        return Ok(to_decision(&view.neighbors[i]));
    }

    let mut tied: Vec<&NeighborView> = match policy {
        PolicyKind::LrvV => argmin(&view.neighbors, |n| recency_key(n.state.last_visit)),
        PolicyKind::LrvE => argmin(&view.neighbors, |n| recency_key(n.edge_state.last_traversal)),
        PolicyKind::LfvV => argmin(&view.neighbors, |n| n.state.visit_count),
        PolicyKind::LfvE => argmin(&view.neighbors, |n| n.edge_state.traversal_count),
        PolicyKind::Random => unreachable!(),
    };
    if policy.uses_edges() {
        tied.sort_by_key(|n| n.edge);
    } else {
        tied.sort_by_key(|n| n.vertex);
    }
    let pick = if tied.len() == 1 { 0 } else { tiebreak.pick(tied.len())? };
    Ok(to_decision(tied[pick]))
}

fn argmin<K: Ord>(items: &[NeighborView], key: impl Fn(&NeighborView) -> K) -> Vec<&NeighborView> {
    let best = items.iter().map(&key).min().expect("non-empty");
    items.iter().filter(|n| key(n) == best).collect()
}
