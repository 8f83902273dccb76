//! Acceptance suites shared by `patrol verify` and the acceptance test
//! target. Every check returns a [`CriterionResult`] instead of panicking so
//! callers can print one line per criterion and keep going.
//!
//! Constants below are the pinned tolerances; change them only together with
//! the decisions ledger.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::{run, EngineError, Event, SimConfig, Simulation};
use crate::format::{parse_graph, write_graph};
use crate::generators::{
    cycle, diamond_gadget_chain, flower_barrier, flower_staircases, four_cycle_chain, grid_triangulation, path_dual,
    FLOWER_START,
};
use crate::graph::{validate, Graph, Round, VertexId};
use crate::metrics::{
    baseline_from_length, fit_growth, frequency_histogram, refresh_series, visit_rounds, windowed_peaks, GrowthModel,
};
use crate::oracle::{exhaustive_tiebreak_search, ReferenceSim, SearchLimits};
use crate::ownership::{assign_owners, verify_dual_edge_owners, verify_owner_adjacency, OWNED_DUAL_EDGE_BOUND};
use crate::policies::{PolicyKind, TieBreak};

/// Coverage must complete within `COVERAGE_FACTOR · n · d` rounds.
pub const COVERAGE_FACTOR: u64 = 10;
/// Seeds per instance for the visit-count bound.
pub const FREQUENCY_SEEDS: u64 = 20;
/// Edge-frequency latency ceiling, in multiples of `m · d`.
pub const LATENCY_FACTOR: u64 = 4;
pub const LATENCY_SEEDS: u64 = 10;
/// Grid sizes whose duals have 50, 128 and 200 vertices.
pub const LATENCY_GRIDS: [(usize, usize); 3] = [(5, 5), (8, 8), (10, 10)];
pub const CHAIN_SWEEP: std::ops::RangeInclusive<usize> = 4..=12;
/// Chain sweeps run for `CHAIN_HORIZON_FACTOR · n²` rounds.
pub const CHAIN_HORIZON_FACTOR: u64 = 40;
pub const CHAIN_EXPONENT_RANGE: (f64, f64) = (1.6, 2.5);
pub const WORST_CASE_KS: [usize; 3] = [2, 3, 4];
pub const DIAMOND_KS: [usize; 3] = [1, 2, 3];
/// Exhaustive searches run for `WORST_CASE_HORIZON_FACTOR · n` rounds.
pub const WORST_CASE_HORIZON_FACTOR: u64 = 20;
pub const WORST_CASE_MIN_RATIO: f64 = 1.5;
pub const DIAMOND_REPORT_RATIO: f64 = 1.8;
pub const SPEEDUP_GRID: (usize, usize) = (10, 10);
pub const SPEEDUP_ROBOTS: [usize; 3] = [1, 3, 9];
pub const SPEEDUP_HORIZON: Round = 40_000;
pub const SPEEDUP_WARMUP: Round = 20_000;
/// Steady-state peak must stay within this multiple of `n / r`.
pub const SPEEDUP_BASELINE_FACTOR: u64 = 3;
pub const SPEEDUP_MIN_RATIO: f64 = 4.0;
pub const FLOWER_DELTA: usize = 3;
pub const FLOWER_STAIR_LEN: usize = 4;
pub const FLOWER_HORIZON: Round = 2_000;
pub const OWNERSHIP_MAX_GRID: usize = 10;
pub const DIFFERENTIAL_CONFIGS: usize = 500;
pub const DIFFERENTIAL_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Invariants,
    Theorems,
    Differential,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Invariants, Suite::Theorems, Suite::Differential];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Invariants => "invariants",
            Suite::Theorems => "theorems",
            Suite::Differential => "differential",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (expected invariants, theorems or differential)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    fn new(id: impl Into<String>, title: &'static str, passed: bool, detail: String) -> Self {
        CriterionResult { id: id.into(), title, passed, detail }
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {} {}: {}", self.id, self.title, self.detail)
    }
}

pub fn run_suite(suite: Suite) -> Vec<CriterionResult> {
    match suite {
        Suite::Invariants => invariants(),
        Suite::Theorems => vec![
            coverage_guarantee(),
            frequency_bound(),
            edge_latency_bound(),
            chain_growth(),
            worst_case_growth(),
            multi_robot_speedup(),
            flower_frequency_ratio(),
            ownership_bounds(),
        ],
        Suite::Differential => vec![differential()],
    }
}

/// Small-to-medium members of every family, all with at most 200 vertices.
pub fn family_instances() -> Vec<Graph> {
    let mut out = Vec::new();
    for n in [2, 3, 10, 50, 200] {
        out.push(path_dual(n).expect("valid path"));
    }
    for n in [3, 4, 12, 101, 200] {
        out.push(cycle(n).expect("valid cycle"));
    }
    for k in [1, 2, 5, 12, 50] {
        out.push(four_cycle_chain(k).expect("valid chain"));
    }
    for k in [1, 3, 10, 33] {
        out.push(diamond_gadget_chain(k).expect("valid chain"));
    }
    for (delta, len) in [(2, 1), (3, 4), (4, 6), (6, 10)] {
        out.push(flower_barrier(delta, len).expect("valid flower"));
    }
    for (w, h) in [(1, 1), (2, 3), (5, 5), (1, 20), (10, 10)] {
        out.push(grid_triangulation(w, h).expect("valid grid").into_dual());
    }
    out
}

fn label(g: &Graph) -> String {
    let parts: Vec<String> = g
        .metadata()
        .iter()
        .filter(|(k, _)| k.as_str() != crate::graph::META_TRIANGULATION_DUAL)
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    if parts.is_empty() {
        format!("n={}", g.vertex_count())
    } else {
        parts.join(" ")
    }
}

fn diameter(g: &Graph) -> u64 {
    g.diameter().expect("family instances are connected") as u64
}

pub fn coverage_guarantee() -> CriterionResult {
    let mut failures = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut runs = 0;
    for g in family_instances() {
        let n = g.vertex_count() as u64;
        let d = diameter(&g).max(1);
        let budget = COVERAGE_FACTOR * n * d;
        let g = std::sync::Arc::new(g);
        for policy in PolicyKind::DETERMINISTIC {
            runs += 1;
            let trace = run(&SimConfig::new(g.clone(), policy, budget)).expect("valid config");
            match refresh_series(&trace).coverage_time {
                Some(t) => worst_ratio = worst_ratio.max(t as f64 / (n * d) as f64),
                None => failures.push(format!("{} {policy}", label(&g))),
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{runs} runs covered; worst coverage time {worst_ratio:.2}·n·d (limit {COVERAGE_FACTOR}·n·d)")
    } else {
        format!("not covered within {COVERAGE_FACTOR}·n·d: {}", failures.join(", "))
    };
    CriterionResult::new("C1", "coverage within 10·n·d", failures.is_empty(), detail)
}

/// Maximum visit count over rounds at which some vertex is still unvisited,
/// for one LFV_V run.
fn max_count_before_coverage(config: &SimConfig) -> u64 {
    let mut sim = Simulation::new(config).expect("valid config");
    let mut worst = 0;
    loop {
        let states = sim.vertex_states();
        if states.iter().all(|s| s.visit_count > 0) {
            return worst;
        }
        worst = worst.max(states.iter().map(|s| s.visit_count).max().unwrap_or(0));
        if sim.is_finished() {
            return worst;
        }
        sim.step().expect("connected graph");
    }
}

pub fn frequency_bound() -> CriterionResult {
    let mut violations = Vec::new();
    let mut runs = 0;
    let mut tightest: f64 = 0.0;
    for g in family_instances() {
        let n = g.vertex_count();
        let d = diameter(&g) as u32;
        let bound = (g.max_degree() as u64).saturating_pow(d);
        let horizon = COVERAGE_FACTOR * n as u64 * u64::from(d.max(1));
        let g = std::sync::Arc::new(g);
        for seed in 0..FREQUENCY_SEEDS {
            runs += 1;
            let config = SimConfig::new(g.clone(), PolicyKind::LfvV, horizon)
                .robots([(seed as usize * 7919) % n])
                .tiebreak(TieBreak::SeededRandom(seed))
                .seed(seed);
            let worst = max_count_before_coverage(&config);
            tightest = tightest.max(worst as f64 / bound as f64);
            if worst > bound {
                violations.push(format!("{} seed {seed}: {worst} > {bound}", label(&g)));
            }
        }
    }
    let detail = if violations.is_empty() {
        format!("{runs} runs, zero violations; tightest count/bound {tightest:.3}")
    } else {
        format!("{} violations: {}", violations.len(), violations.join("; "))
    };
    CriterionResult::new("C2", "LFV_V visit count ≤ δ^d before coverage", violations.is_empty(), detail)
}

pub fn edge_latency_bound() -> CriterionResult {
    let mut violations = Vec::new();
    let mut summary = Vec::new();
    for (w, h) in LATENCY_GRIDS {
        let g = std::sync::Arc::new(grid_triangulation(w, h).expect("valid grid").into_dual());
        let n = g.vertex_count();
        let md = g.edge_count() as u64 * diameter(&g);
        let bound = LATENCY_FACTOR * md;
        // The window must be longer than the bound for a violation to show.
        let horizon = md + 2 * bound;
        let mut worst = 0;
        for seed in 1..=LATENCY_SEEDS {
            let config = SimConfig::new(g.clone(), PolicyKind::LfvE, horizon)
                .robots([(seed as usize * n) / (LATENCY_SEEDS as usize + 1)])
                .tiebreak(TieBreak::SeededRandom(seed))
                .seed(seed);
            let trace = run(&config).expect("valid config");
            let peak = windowed_peaks(&visit_rounds(&trace), horizon, md).into_iter().max().unwrap_or(0);
            worst = worst.max(peak);
            if peak > bound {
                violations.push(format!("n={n} seed {seed}: {peak} > {bound}"));
            }
        }
        summary.push(format!("n={n}: worst {worst} ≤ {bound}"));
    }
    let detail = if violations.is_empty() {
        format!("zero violations over {LATENCY_SEEDS} seeds each; {}", summary.join(", "))
    } else {
        format!("{} violations: {}", violations.len(), violations.join("; "))
    };
    CriterionResult::new("C3", "LFV_E steady peak ≤ 4·m·d on grid duals", violations.is_empty(), detail)
}

/// Peak refresh of the last 4-cycle of `four_cycle_chain(k)` under `policy`.
pub fn chain_last_component_peak(k: usize, policy: PolicyKind) -> Round {
    let g = four_cycle_chain(k).expect("k ≥ 1");
    let n = g.vertex_count() as u64;
    let horizon = CHAIN_HORIZON_FACTOR * n * n;
    let trace = run(&SimConfig::new(g, policy, horizon)).expect("valid config");
    let peaks = windowed_peaks(&visit_rounds(&trace), horizon, 0);
    peaks[4 * (k - 1)..4 * k].iter().copied().max().unwrap_or(0)
}

pub fn chain_growth() -> CriterionResult {
    let exponent = |policy| {
        let points: Vec<(f64, f64)> =
            CHAIN_SWEEP.map(|k| (k as f64, chain_last_component_peak(k, policy) as f64)).collect();
        fit_growth(&points, GrowthModel::Power).ok().and_then(|f| f.exponent())
    };
    let (lo, hi) = CHAIN_EXPONENT_RANGE;
    let lfv = exponent(PolicyKind::LfvV);
    let lrv = exponent(PolicyKind::LrvE);
    let passed = lfv.is_some_and(|e| (lo..=hi).contains(&e));
    let show = |e: Option<f64>| e.map_or("n/a".to_string(), |e| format!("{e:.3}"));
    let detail = format!(
        "LFV_V exponent {} (accept [{lo}, {hi}]); LRV_E exponent {} (reported)",
        show(lfv),
        show(lrv)
    );
    CriterionResult::new("C4", "quadratic-type growth on 4-cycle chains", passed, detail)
}

/// Worst-case search plus engine replay for one graph. Returns the worst
/// peak and whether the witness replays to exactly that peak.
pub fn search_and_replay(g: &Graph, policy: PolicyKind) -> (Round, bool, bool) {
    let horizon = WORST_CASE_HORIZON_FACTOR * g.vertex_count() as u64;
    let result = exhaustive_tiebreak_search(g, policy, VertexId(0), horizon, SearchLimits::default())
        .expect("deterministic policy on a connected graph");
    let config = SimConfig::new(g.clone(), policy, horizon).tiebreak(result.tiebreak());
    let mut sim = Simulation::new(&config).expect("valid config");
    let replayed = sim.run_to_end().is_ok() && sim.script_consumed() == result.witness.len() && {
        let trace = sim.into_trace();
        windowed_peaks(&visit_rounds(&trace), horizon, result.measure_from).into_iter().max() == Some(result.peak)
    };
    (result.peak, replayed, result.complete)
}

pub fn worst_case_growth() -> CriterionResult {
    let family = |build: fn(usize) -> Graph, ks: &[usize]| {
        let rows: Vec<(usize, Round, bool, bool)> = ks
            .iter()
            .map(|&k| {
                let (peak, replayed, complete) = search_and_replay(&build(k), PolicyKind::LrvV);
                (k, peak, replayed, complete)
            })
            .collect();
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.0 as f64, r.1 as f64)).collect();
        let ratio = fit_growth(&points, GrowthModel::Geometric).ok().and_then(|f| f.ratio()).unwrap_or(0.0);
        (rows, ratio)
    };
    let (chain, chain_ratio) = family(|k| four_cycle_chain(k).expect("k ≥ 1"), &WORST_CASE_KS);
    let (diamond, diamond_ratio) = family(|k| diamond_gadget_chain(k).expect("k ≥ 1"), &DIAMOND_KS);
    let all_replay = chain.iter().chain(&diamond).all(|r| r.2);
    let passed = all_replay && (chain_ratio >= WORST_CASE_MIN_RATIO || diamond_ratio >= WORST_CASE_MIN_RATIO);
    let fmt_rows = |rows: &[(usize, Round, bool, bool)]| {
        rows.iter()
            .map(|r| format!("k={}:{}{}", r.0, r.1, if r.3 { "" } else { "(lower bound)" }))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let detail = format!(
        "four_cycle_chain {} ratio {chain_ratio:.3}; diamond_gadget_chain {} ratio {diamond_ratio:.3}{}; witnesses replay: {}",
        fmt_rows(&chain),
        fmt_rows(&diamond),
        if diamond_ratio >= DIAMOND_REPORT_RATIO { " (≥ 1.8)" } else { "" },
        if all_replay { "all exact" } else { "MISMATCH" }
    );
    CriterionResult::new("C5", "worst-case LRV_V super-linear growth", passed, detail)
}

/// Steady-state max refresh and the time-averaged max refresh over the same
/// window, for `r` robots spread evenly over the vertex ids.
pub fn speedup_run(g: &std::sync::Arc<Graph>, policy: PolicyKind, r: usize) -> (Round, f64) {
    let n = g.vertex_count();
    let config = SimConfig::new(g.clone(), policy, SPEEDUP_HORIZON).robots((0..r).map(|i| i * n / r));
    let series = refresh_series(&run(&config).expect("valid config"));
    let window = &series.max_refresh[SPEEDUP_WARMUP as usize..];
    let mean = window.iter().sum::<Round>() as f64 / window.len() as f64;
    (series.max_refresh_since(SPEEDUP_WARMUP), mean)
}

pub fn multi_robot_speedup() -> CriterionResult {
    let (w, h) = SPEEDUP_GRID;
    let g = std::sync::Arc::new(grid_triangulation(w, h).expect("valid grid").into_dual());
    let n = g.vertex_count() as u64;
    let mut passed = true;
    let mut parts = Vec::new();
    for policy in [PolicyKind::LrvV, PolicyKind::LfvE] {
        let runs: Vec<(usize, Round, f64)> = SPEEDUP_ROBOTS
            .iter()
            .map(|&r| {
                let (peak, mean) = speedup_run(&g, policy, r);
                (r, peak, mean)
            })
            .collect();
        let mut line = Vec::new();
        for &(r, peak, mean) in &runs {
            // peak ≤ factor · n / r, kept in integers.
            let ok = peak * r as u64 <= SPEEDUP_BASELINE_FACTOR * n;
            passed &= ok;
            let limit = baseline_from_length(SPEEDUP_BASELINE_FACTOR * n, r as u64).expect("r ≥ 1");
            line.push(format!(
                "r={r} peak {peak} {} {:.1} (mean {mean:.1})",
                if ok { "≤" } else { ">" },
                *limit.numer() as f64 / *limit.denom() as f64
            ));
        }
        let ratio = runs[0].1 as f64 / runs[runs.len() - 1].1 as f64;
        passed &= ratio >= SPEEDUP_MIN_RATIO;
        parts.push(format!("{policy}: {}; peak(1)/peak(9) {ratio:.2}", line.join(", ")));
    }
    let detail = format!("n={n}, limit 3·n/r, ratio ≥ {SPEEDUP_MIN_RATIO}; {}", parts.join(" | "));
    CriterionResult::new("C6", "linear multi-robot speedup on a grid dual", passed, detail)
}

fn median(values: &mut [u64]) -> f64 {
    values.sort_unstable();
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid] as f64
    } else {
        (values[mid - 1] + values[mid]) as f64 / 2.0
    }
}

/// Best ratio of the start vertex's visit count to the median staircase
/// count, over all rounds where that median is at least one.
pub fn flower_ratio(delta: usize, stair_len: usize, horizon: Round) -> f64 {
    let g = flower_barrier(delta, stair_len).expect("valid flower");
    let stairs: Vec<usize> = flower_staircases(delta, stair_len).into_iter().flat_map(|s| s.path).collect();
    let config = SimConfig::new(g, PolicyKind::LfvV, horizon).robots([FLOWER_START]);
    let mut sim = Simulation::new(&config).expect("valid config");
    let mut best: f64 = 0.0;
    while !sim.is_finished() {
        sim.step().expect("connected graph");
        let states = sim.vertex_states();
        let mut counts: Vec<u64> = stairs.iter().map(|&v| states[v].visit_count).collect();
        let med = median(&mut counts);
        if med >= 1.0 {
            best = best.max(states[FLOWER_START].visit_count as f64 / med);
        }
    }
    best
}

pub fn flower_frequency_ratio() -> CriterionResult {
    let ratio = flower_ratio(FLOWER_DELTA, FLOWER_STAIR_LEN, FLOWER_HORIZON);
    let need = FLOWER_DELTA as f64 / 2.0;
    let detail = format!(
        "flower_barrier({FLOWER_DELTA}, {FLOWER_STAIR_LEN}) LFV_V: best start/median-staircase ratio {ratio:.2} (need ≥ {need})"
    );
    CriterionResult::new("C7", "start vertex out-visits the staircases", ratio >= need, detail)
}

pub fn ownership_bounds() -> CriterionResult {
    let mut problems = Vec::new();
    let mut max_owned = 0;
    let mut grids = 0;
    for w in 1..=OWNERSHIP_MAX_GRID {
        for h in 1..=OWNERSHIP_MAX_GRID {
            grids += 1;
            let t = grid_triangulation(w, h).expect("valid grid");
            let owners = match assign_owners(&t) {
                Ok(o) => o,
                Err(_) => {
                    problems.push(format!("{w}x{h}: no assignment"));
                    continue;
                }
            };
            if let Err(v) = verify_owner_adjacency(&t, &owners) {
                problems.push(format!("{w}x{h}: {} adjacency violations", v.len()));
            }
            let report = verify_dual_edge_owners(&t, &owners);
            if !report.is_ok() {
                problems.push(format!("{w}x{h}: {} ownership violations", report.violations.len()));
            }
            max_owned = max_owned.max(report.max_owned);
        }
    }
    let passed = problems.is_empty() && max_owned <= OWNED_DUAL_EDGE_BOUND;
    let detail = if problems.is_empty() {
        format!("{grids} grids up to {OWNERSHIP_MAX_GRID}x{OWNERSHIP_MAX_GRID}, zero violations; max dual edges per primal vertex {max_owned} (bound {OWNED_DUAL_EDGE_BOUND})")
    } else {
        problems.join("; ")
    };
    CriterionResult::new("C8", "owner assignment on grid triangulations", passed, detail)
}

/// A random connected graph on `n` vertices: a random spanning tree plus a
/// few extra edges.
pub fn random_connected_graph(rng: &mut impl Rng, n: usize) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((order[rng.gen_range(0..i)], order[i]));
    }
    let extra = rng.gen_range(0..=n);
    for _ in 0..extra {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && !edges.contains(&(u, v)) && !edges.contains(&(v, u)) {
            edges.push((u, v));
        }
    }
    Graph::new(n, edges)
        .expect("spanning tree keeps it connected")
}

pub fn random_config(rng: &mut impl Rng) -> SimConfig {
    let n = rng.gen_range(2..=20);
    let g = random_connected_graph(rng, n);
    let policy = *PolicyKind::ALL.choose(rng).expect("non-empty");
    let horizon = rng.gen_range(0..=200);
    let robots: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..n)).collect();
    let arrivals: Vec<(Round, usize)> =
        (0..rng.gen_range(0..=2)).map(|_| (rng.gen_range(0..=horizon), rng.gen_range(0..n))).collect();
    let tiebreak = match rng.gen_range(0..3) {
        0 => TieBreak::LowestId,
        1 => TieBreak::SeededRandom(rng.gen()),
        // Short scripts exercise the exhaustion error path too.
        _ => TieBreak::Scripted((0..rng.gen_range(0..=60)).map(|_| rng.gen_range(0..3)).collect()),
    };
    SimConfig::new(g, policy, horizon)
        .robots(robots)
        .arrivals(arrivals)
        .tiebreak(tiebreak)
        .seed(rng.gen())
}

#[derive(Debug, PartialEq)]
struct Outcome {
    events: Vec<Event>,
    visits: Vec<(i64, u64)>,
    traversals: Vec<(i64, u64)>,
    failure: Option<(Round, usize)>,
}

fn engine_outcome(config: &SimConfig) -> Outcome {
    let mut sim = Simulation::new(config).expect("generated configs are valid");
    let failure = match sim.run_to_end() {
        Ok(()) => None,
        Err(EngineError::Policy { round, robot, .. }) => Some((round, robot)),
        Err(e) => panic!("unexpected engine error: {e}"),
    };
    let stamp = |r: Option<Round>| r.map_or(-1, |r| r as i64);
    Outcome {
        events: sim.events().to_vec(),
        visits: sim.vertex_states().iter().map(|s| (stamp(s.last_visit), s.visit_count)).collect(),
        traversals: sim.edge_states().iter().map(|s| (stamp(s.last_traversal), s.traversal_count)).collect(),
        failure,
    }
}

fn reference_outcome(config: &SimConfig) -> Outcome {
    let collect = |sim: &ReferenceSim, failure| Outcome {
        events: sim.events.clone(),
        visits: sim.last_visit.iter().copied().zip(sim.visits.iter().copied()).collect(),
        traversals: sim.last_traversal.iter().copied().zip(sim.traversals.iter().copied()).collect(),
        failure,
    };
    let mut sim = ReferenceSim::new(config);
    while sim.round < config.horizon {
        if let Err(e) = sim.step() {
            return collect(&sim, Some((e.round, e.robot)));
        }
    }
    collect(&sim, None)
}

pub fn differential() -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(DIFFERENTIAL_SEED);
    let mut mismatches = Vec::new();
    let mut failures_agreed = 0;
    for i in 0..DIFFERENTIAL_CONFIGS {
        let config = random_config(&mut rng);
        let engine = engine_outcome(&config);
        let reference = reference_outcome(&config);
        if engine.failure.is_some() {
            failures_agreed += 1;
        }
        if engine != reference {
            mismatches.push(i);
        }
    }
    let detail = if mismatches.is_empty() {
        format!(
            "{DIFFERENTIAL_CONFIGS} random configs identical ({failures_agreed} ended in the same script error)"
        )
    } else {
        format!("{} mismatching configs, first indices {:?}", mismatches.len(), &mismatches[..mismatches.len().min(10)])
    };
    CriterionResult::new("C9", "engine matches the reference simulator", mismatches.is_empty(), detail)
}

pub fn invariants() -> Vec<CriterionResult> {
    let instances = family_instances();

    let mut bad = Vec::new();
    for g in &instances {
        let report = validate(g, g.is_triangulation_dual());
        if !report.is_ok() {
            bad.push(format!("{}: {report}", label(g)));
        }
    }
    let structure = CriterionResult::new(
        "I1",
        "generated graphs are simple, symmetric, connected",
        bad.is_empty(),
        if bad.is_empty() { format!("{} instances valid", instances.len()) } else { bad.join("; ") },
    );

    let mut broken = Vec::new();
    for g in &instances {
        let text = write_graph(g);
        match parse_graph(&text) {
            Ok(back) if back == *g => {}
            _ => broken.push(label(g)),
        }
    }
    let round_trip = CriterionResult::new(
        "I2",
        "text format round-trips",
        broken.is_empty(),
        if broken.is_empty() { format!("{} instances", instances.len()) } else { broken.join("; ") },
    );

    let mut rng = ChaCha8Rng::seed_from_u64(DIFFERENTIAL_SEED ^ 1);
    let mut unbalanced = 0;
    let mut checked = 0;
    for _ in 0..100 {
        let mut config = random_config(&mut rng);
        config.tiebreak = TieBreak::LowestId;
        let trace = run(&config).expect("lowest-id never fails");
        checked += 1;
        if !frequency_histogram(&trace).is_conserved(&trace) {
            unbalanced += 1;
        }
    }
    let conservation = CriterionResult::new(
        "I3",
        "visit and traversal counts are conserved",
        unbalanced == 0,
        format!("{checked} random runs, {unbalanced} unbalanced"),
    );

    let g = grid_triangulation(3, 3).expect("valid grid").into_dual();
    let bounds: Vec<_> = (1..=15).map(|r| baseline_from_length(g.vertex_count() as u64, r).expect("r ≥ 1")).collect();
    let monotone = bounds.windows(2).all(|w| w[1] < w[0]);
    let baseline = CriterionResult::new(
        "I4",
        "baseline decreases with robot count",
        monotone,
        format!("r = 1..15 on {} dual vertices", g.vertex_count()),
    );

    vec![structure, round_trip, conservation, baseline]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>(), Ok(s));
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3, 1, 2]), 2.0);
        assert_eq!(median(&mut [4, 1, 2, 3]), 2.5);
    }

    #[test]
    fn random_configs_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let c = random_config(&mut rng);
            c.validate().unwrap();
            assert!(c.graph.is_connected());
        }
    }

    #[test]
    fn invariants_hold() {
        for r in invariants() {
            assert!(r.passed, "{r}");
        }
    }
}
