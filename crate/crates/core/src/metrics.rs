//! Refresh-time and frequency analytics over traces.
//!
//! The refresh time of vertex `v` at round `t` is `t - p`, where `p` is the
//! last round strictly before `t` in which `v` was visited, or `0` if it was
//! never visited before `t`. A vertex visited at rounds `a < b` therefore
//! peaks at `b - a` right before the second visit.

use std::io::{self, Write};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::Trace;
use crate::graph::{Graph, Round};
use crate::oracle::{self, OracleError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("robot count must be positive")]
    ZeroRobots,
    #[error("graph has no Hamiltonian cycle; use the n/r proxy bound instead")]
    NoHamiltonianCycle,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("growth fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("growth fit needs positive values, got ({0}, {1})")]
    NonPositive(String, String),
}

/// Distinct visit rounds of each vertex, ascending.
pub fn visit_rounds(trace: &Trace) -> Vec<Vec<Round>> {
    let mut visits = vec![Vec::new(); trace.vertex_count()];
    let mut push = |v: usize, r: Round| {
        let list: &mut Vec<Round> = &mut visits[v];
        if list.last() != Some(&r) {
            list.push(r);
        }
    };
    // placements and events interleave by round
    let (mut p, mut e) = (0, 0);
    while p < trace.placements.len() || e < trace.events.len() {
        let take_placement = match (trace.placements.get(p), trace.events.get(e)) {
            (Some(pl), Some(ev)) => pl.round <= ev.round,
            (Some(_), None) => true,
            _ => false,
        };
        if take_placement {
            let pl = trace.placements[p];
            push(pl.vertex.0, pl.round);
            p += 1;
        } else {
            let ev = trace.events[e];
            push(ev.to.0, ev.round);
            e += 1;
        }
    }
    visits
}

/// Largest refresh time of each vertex over rounds `from..=horizon`.
pub fn windowed_peaks(visits: &[Vec<Round>], horizon: Round, from: Round) -> Vec<Round> {
    visits
        .iter()
        .map(|rounds| {
            if from > horizon {
                return 0;
            }
            let mut prev = 0;
            let mut peak = 0;
            for &b in rounds {
                if b >= from {
                    peak = peak.max(b - prev);
                }
                prev = b;
            }
            if rounds.last() != Some(&horizon) {
                peak = peak.max(horizon - prev);
            }
            peak
        })
        .collect()
}

/// Refresh statistics of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefreshSeries {
    /// Max refresh time over all vertices, indexed by round `0..=horizon`.
    pub max_refresh: Vec<Round>,
    /// Fraction of vertices visited at or before each round.
    pub coverage_fraction: Vec<f64>,
    /// Per-vertex largest gap, counting the initial gap from round 0 and
    /// the trailing gap up to the horizon.
    pub peak_refresh: Vec<Round>,
    /// First round at which every vertex has been visited.
    pub coverage_time: Option<Round>,
}

impl RefreshSeries {
    pub fn peak(&self) -> Round {
        self.peak_refresh.iter().copied().max().unwrap_or(0)
    }

    /// Largest per-round max refresh over rounds `from..=horizon`.
    pub fn max_refresh_since(&self, from: Round) -> Round {
        self.max_refresh
            .iter()
            .skip(from as usize)
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Writes `round,max_refresh,coverage_fraction` rows.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "round,max_refresh,coverage_fraction")?;
        for (t, (m, c)) in self.max_refresh.iter().zip(&self.coverage_fraction).enumerate() {
            writeln!(out, "{t},{m},{c:.6}")?;
        }
        Ok(())
    }
}

pub fn refresh_series(trace: &Trace) -> RefreshSeries {
    let n = trace.vertex_count();
    let visits = visit_rounds(trace);
    let horizon = trace.horizon;

    let mut cursor = vec![0usize; n];
    let mut last: Vec<Option<Round>> = vec![None; n];
    let mut covered = 0usize;
    let mut coverage_time = None;
    let mut max_refresh = Vec::with_capacity(horizon as usize + 1);
    let mut coverage_fraction = Vec::with_capacity(horizon as usize + 1);
    for t in 0..=horizon {
        let mut m = 0;
        for v in 0..n {
            m = m.max(t - last[v].unwrap_or(0));
        }
        max_refresh.push(m);
        for v in 0..n {
            if visits[v].get(cursor[v]) == Some(&t) {
                cursor[v] += 1;
                if last[v].is_none() {
                    covered += 1;
                }
                last[v] = Some(t);
            }
        }
        if covered == n && coverage_time.is_none() {
            coverage_time = Some(t);
        }
        coverage_fraction.push(if n == 0 { 1.0 } else { covered as f64 / n as f64 });
    }

    RefreshSeries {
        max_refresh,
        coverage_fraction,
        peak_refresh: windowed_peaks(&visits, horizon, 0),
        coverage_time,
    }
}

/// Final visit and traversal counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyHistogram {
    pub vertex_counts: Vec<u64>,
    pub edge_counts: Vec<u64>,
}

impl FrequencyHistogram {
    /// Vertex counts sum to placements plus moves; edge counts to moves.
    pub fn is_conserved(&self, trace: &Trace) -> bool {
        let moves = trace.events.len() as u64;
        self.vertex_counts.iter().sum::<u64>() == trace.placements.len() as u64 + moves
            && self.edge_counts.iter().sum::<u64>() == moves
    }
}

pub fn frequency_histogram(trace: &Trace) -> FrequencyHistogram {
    FrequencyHistogram {
        vertex_counts: trace.vertex_states.iter().map(|s| s.visit_count).collect(),
        edge_counts: trace.edge_states.iter().map(|s| s.traversal_count).collect(),
    }
}

/// `|H| / r` for a known Hamiltonian cycle length.
pub fn baseline_from_length(cycle_len: u64, robots: u64) -> Result<Ratio<u64>, MetricsError> {
    if robots == 0 {
        return Err(MetricsError::ZeroRobots);
    }
    Ok(Ratio::new(cycle_len, robots))
}

/// Lower bound on the achievable max refresh with `robots` robots, from the
/// Hamiltonian cycle of `g` found by exhaustive search.
pub fn baseline_lower_bound(g: &Graph, robots: u64) -> Result<Ratio<u64>, MetricsError> {
    if robots == 0 {
        return Err(MetricsError::ZeroRobots);
    }
    match oracle::hamiltonian_cycle(g)? {
        Some(len) => baseline_from_length(len as u64, robots),
        None => Err(MetricsError::NoHamiltonianCycle),
    }
}

/// `n / r`, the stand-in when no Hamiltonian cycle is known.
pub fn proxy_lower_bound(g: &Graph, robots: u64) -> Result<Ratio<u64>, MetricsError> {
    baseline_from_length(g.vertex_count() as u64, robots)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    /// `y = a * x^b`
    Power,
    /// `y = a * q^x`
    Geometric,
}

/// Least-squares fit in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    pub points: Vec<(f64, f64)>,
    /// Slope of the log-space regression.
    pub slope: f64,
    pub intercept: f64,
}

impl GrowthFit {
    /// Power-law exponent.
    pub fn exponent(&self) -> Option<f64> {
        (self.model == GrowthModel::Power).then_some(self.slope)
    }

    /// Per-step geometric ratio.
    pub fn ratio(&self) -> Option<f64> {
        (self.model == GrowthModel::Geometric).then(|| self.slope.exp())
    }
}

pub fn fit_growth(points: &[(f64, f64)], model: GrowthModel) -> Result<GrowthFit, MetricsError> {
    if points.len() < 3 {
        return Err(MetricsError::TooFewPoints(points.len()));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if y <= 0.0 || (model == GrowthModel::Power && x <= 0.0) {
            return Err(MetricsError::NonPositive(x.to_string(), y.to_string()));
        }
        xs.push(match model {
            GrowthModel::Power => x.ln(),
            GrowthModel::Geometric => x,
        });
        ys.push(y.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    Ok(GrowthFit {
        model,
        points: points.to_vec(),
        slope,
        intercept: my - slope * mx,
    })
}

/// One row of a run summary table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub family: String,
    pub param: String,
    pub policy: String,
    pub robots: usize,
    pub seed: u64,
    pub peak_refresh: Round,
    pub coverage_time: Option<Round>,
}
