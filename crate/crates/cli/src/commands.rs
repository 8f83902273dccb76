use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use patrol_core::generators::{Family, FamilySpec};
use patrol_core::metrics::{
    baseline_lower_bound, fit_growth, proxy_lower_bound, refresh_series, visit_rounds, windowed_peaks, SummaryRow,
};
use patrol_core::oracle::{exhaustive_tiebreak_search, parse_witness, write_witness, SearchLimits, HAMILTONIAN_CAP};
use patrol_core::verify::{run_suite, Suite};
use patrol_core::{GrowthModel, PolicyKind, Round, SimConfig, Simulation, TieBreak, VertexId};

use crate::scenario::Scenario;
use crate::{Failure, SimulateArgs, WORKERS_ENV};

type CmdResult = std::result::Result<(), Failure>;

fn parse_policy(s: &str) -> Result<PolicyKind> {
    s.trim().parse().map_err(|e| anyhow!("{e}"))
}

fn parse_tiebreak(s: &str) -> Result<TieBreak> {
    s.parse().map_err(|e| anyhow!("{e}"))
}

/// A round count given as a plain number, `<c>n` or `<c>n2` (scaled by the
/// instance's vertex count).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rounds {
    Fixed(Round),
    PerN(Round),
    PerN2(Round),
}

impl Rounds {
    pub fn resolve(self, n: usize) -> Round {
        let n = n as Round;
        match self {
            Rounds::Fixed(r) => r,
            Rounds::PerN(c) => c * n,
            Rounds::PerN2(c) => c * n * n,
        }
    }
}

impl std::str::FromStr for Rounds {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad round count `{s}` (expected e.g. 5000, 20n or 40n2)");
        let num = |t: &str| t.parse::<Round>().map_err(|_| bad());
        if let Some(c) = s.strip_suffix("n2") {
            Ok(Rounds::PerN2(num(c)?))
        } else if let Some(c) = s.strip_suffix('n') {
            Ok(Rounds::PerN(num(c)?))
        } else {
            Ok(Rounds::Fixed(num(s)?))
        }
    }
}

/// Inclusive range `a..b` or a comma list.
fn parse_list(s: &str) -> Result<Vec<i64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (i64, i64) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty range `{s}`");
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse::<i64>().map_err(|_| anyhow!("bad number `{t}` in `{s}`"))).collect()
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn generate(family: &str, params: &[String], out: Option<PathBuf>, out_dir: &Path) -> CmdResult {
    let spec = FamilySpec::parse(family, params).map_err(Failure::usage)?;
    let graph = spec.graph().map_err(Failure::usage)?;
    let out = out.unwrap_or_else(|| out_dir.join(format!("{}.graph", spec.family.name())));
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    patrol_core::generators::save(&graph, &out).with_context(|| format!("writing {}", out.display()))?;
    let diameter = graph.diameter().map(|d| d.to_string()).unwrap_or_else(|_| "inf".into());
    println!(
        "{spec}: n={} m={} max_degree={} diameter={diameter}",
        graph.vertex_count(),
        graph.edge_count(),
        graph.max_degree()
    );
    println!("dual graph: {}", out.display());
    if spec.family == Family::GridTriangulation {
        let tri_path = out.with_extension("tri");
        let t = spec.triangulation().map_err(Failure::usage)?;
        t.save(&tri_path).with_context(|| format!("writing {}", tri_path.display()))?;
        println!("triangulation: {} ({} points, {} triangles)", tri_path.display(), t.points().len(), t.triangles().len());
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulationSummary {
    #[serde(flatten)]
    row: SummaryRow,
    tiebreak: String,
    horizon: Round,
    arrivals: usize,
    final_max_refresh: Round,
    /// `n / r`, the stand-in when no Hamiltonian cycle length is known.
    baseline_proxy: String,
    /// `|H| / r` when the brute-force oracle finds a Hamiltonian cycle.
    hamiltonian_baseline: Option<String>,
}

pub fn simulate(args: &SimulateArgs) -> CmdResult {
    let scenario = Scenario::load(&args.scenario).map_err(Failure::usage)?;
    let loaded = scenario.graph.load().map_err(Failure::usage)?;
    let policy = match &args.policy {
        Some(p) => parse_policy(p).context("--policy").map_err(Failure::usage)?,
        None => scenario.policy().map_err(Failure::usage)?,
    };
    let tiebreak = if let Some(path) = &args.witness {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::usage)?;
        TieBreak::Scripted(parse_witness(&text).map_err(|e| Failure::usage(anyhow!("{}: {e}", path.display())))?)
    } else if let Some(t) = &args.tiebreak {
        parse_tiebreak(t).context("--tiebreak").map_err(Failure::usage)?
    } else {
        scenario.tiebreak().map_err(Failure::usage)?
    };
    let horizon = args.horizon.unwrap_or(scenario.horizon);
    let seed = args.seed.unwrap_or(scenario.seed);
    let out_dir = args.out_dir.clone().unwrap_or_else(|| scenario.outputs.dir.clone());

    let n = loaded.graph.vertex_count();
    let config = SimConfig::new(loaded.graph, policy, horizon)
        .robots(scenario.robots.starts.iter().copied())
        .arrivals(scenario.robots.arrivals.iter().map(|a| (a.round, a.vertex)))
        .tiebreak(tiebreak.clone())
        .seed(seed);
    config.validate().map_err(Failure::usage)?;

    let mut sim = Simulation::new(&config).map_err(Failure::usage)?;
    sim.run_to_end().map_err(|e| Failure::Run(anyhow!(e)))?;
    let trace = sim.into_trace();
    let series = refresh_series(&trace);

    create_dir(&out_dir)?;
    let mut events = Vec::new();
    trace.write_events_csv(&mut events).context("formatting events")?;
    write_file(&out_dir.join(&scenario.outputs.events), events)?;
    let mut metrics = Vec::new();
    series.write_csv(&mut metrics).context("formatting metrics")?;
    write_file(&out_dir.join(&scenario.outputs.metrics), metrics)?;

    let robots = config.robots.len() + config.arrivals.len();
    let hamiltonian = if n <= HAMILTONIAN_CAP {
        baseline_lower_bound(&config.graph, robots as u64).ok().map(|r| r.to_string())
    } else {
        None
    };
    let summary = SimulationSummary {
        row: SummaryRow {
            family: loaded.family,
            param: loaded.param,
            policy: policy.to_string(),
            robots,
            seed,
            peak_refresh: series.peak(),
            coverage_time: series.coverage_time,
        },
        tiebreak: tiebreak.to_string(),
        horizon,
        arrivals: config.arrivals.len(),
        final_max_refresh: series.max_refresh.last().copied().unwrap_or(0),
        baseline_proxy: proxy_lower_bound(&config.graph, robots as u64).map_err(|e| anyhow!(e))?.to_string(),
        hamiltonian_baseline: hamiltonian,
    };
    let json = serde_json::to_string_pretty(&summary).context("serializing summary")?;
    write_file(&out_dir.join(&scenario.outputs.summary), format!("{json}\n"))?;
    println!(
        "peak_refresh={} coverage_time={} events={} -> {}",
        summary.row.peak_refresh,
        summary.row.coverage_time.map_or("none".to_string(), |t| t.to_string()),
        trace.events.len(),
        out_dir.display()
    );
    Ok(())
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub family: String,
    /// Swept parameter name, e.g. `k`. Omit to sweep only robots/seeds.
    #[arg(long, requires = "values")]
    pub param: Option<String>,
    /// Values for the swept parameter: `4..12` (inclusive) or `1,3,9`.
    #[arg(long, requires = "param")]
    pub values: Option<String>,
    /// Fixed parameters as key=value (repeatable).
    #[arg(long = "fixed")]
    pub fixed: Vec<String>,
    /// Comma-separated policies.
    #[arg(long, default_value = "LRV_V,LRV_E,LFV_V,LFV_E")]
    pub policies: String,
    /// Robot counts (`1,3,9` or `1..15`); robots start evenly spread over vertex ids.
    #[arg(long, default_value = "1")]
    pub robots: String,
    /// Seeds (`0..9` or a comma list).
    #[arg(long, default_value = "0")]
    pub seeds: String,
    /// Rounds per run: a number, `<c>n` or `<c>n2`.
    #[arg(long, default_value = "10000")]
    pub horizon: Rounds,
    /// Peak refresh is measured from this round on (same syntax as --horizon).
    #[arg(long, default_value = "0")]
    pub warmup: Rounds,
    /// lowest-id, seeded-random (uses each run's seed), seeded-random:N or scripted:...
    #[arg(long, default_value = "lowest-id")]
    pub tiebreak: String,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

struct Job {
    spec: FamilySpec,
    value: Option<i64>,
    policy: PolicyKind,
    robots: usize,
    seed: u64,
}

#[derive(Serialize)]
struct FitRow {
    family: String,
    policy: String,
    /// What the fit is taken against: the swept parameter or `robots`.
    against: String,
    fixed: String,
    model: &'static str,
    points: usize,
    slope: String,
    intercept: String,
    /// Exponent for the power model, per-step ratio for the geometric one.
    estimate: String,
}

pub fn sweep(args: &SweepArgs) -> CmdResult {
    let policies: Vec<PolicyKind> = args
        .policies
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_policy)
        .collect::<Result<_>>()
        .map_err(Failure::usage)?;
    if policies.is_empty() {
        return Err(Failure::usage(anyhow!("--policies is empty")));
    }
    let robot_counts: Vec<usize> = parse_list(&args.robots)
        .context("--robots")
        .map_err(Failure::usage)?
        .into_iter()
        .map(|r| usize::try_from(r).ok().filter(|&r| r >= 1).ok_or_else(|| anyhow!("robot count {r} must be ≥ 1")))
        .collect::<Result<_>>()
        .map_err(Failure::usage)?;
    let seeds: Vec<u64> = parse_list(&args.seeds)
        .context("--seeds")
        .map_err(Failure::usage)?
        .into_iter()
        .map(|s| u64::try_from(s).map_err(|_| anyhow!("seed {s} must be ≥ 0")))
        .collect::<Result<_>>()
        .map_err(Failure::usage)?;
    let values: Vec<Option<i64>> = match &args.values {
        Some(v) => parse_list(v).context("--values").map_err(Failure::usage)?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let seeded_per_run = args.tiebreak == "seeded-random";
    let fixed_tiebreak = if seeded_per_run {
        None
    } else {
        Some(parse_tiebreak(&args.tiebreak).context("--tiebreak").map_err(Failure::usage)?)
    };

    let mut specs = Vec::new();
    for &value in &values {
        let mut params = args.fixed.clone();
        if let (Some(p), Some(v)) = (&args.param, value) {
            params.push(format!("{p}={v}"));
        }
        let spec = FamilySpec::parse(&args.family, &params).map_err(Failure::usage)?;
        // Build once up front so bad parameters are usage errors.
        let graph = Arc::new(spec.graph().map_err(Failure::usage)?);
        specs.push((spec, value, graph));
    }
    let mut jobs = Vec::new();
    for (i, (spec, value, _)) in specs.iter().enumerate() {
        for &policy in &policies {
            for &robots in &robot_counts {
                for &seed in &seeds {
                    jobs.push((i, Job { spec: spec.clone(), value: *value, policy, robots, seed }));
                }
            }
        }
    }

    let pool = worker_pool().map_err(Failure::usage)?;
    let rows: Vec<SummaryRow> = pool
        .install(|| {
            jobs.par_iter()
                .map(|(i, job)| {
                    let graph = specs[*i].2.clone();
                    let tiebreak = fixed_tiebreak.clone().unwrap_or(TieBreak::SeededRandom(job.seed));
                    run_job(job, graph, tiebreak, args.horizon, args.warmup)
                })
                .collect::<Result<Vec<_>>>()
        })
        .map_err(Failure::Run)?;

    create_dir(&args.out_dir)?;
    let mut out = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        out.serialize(row).context("formatting sweep row")?;
    }
    write_file(&args.out_dir.join("sweep.csv"), out.into_inner().context("flushing sweep rows")?)?;

    let fits = growth_fits(args, &jobs, &rows, &policies, &robot_counts, &values);
    let mut out = csv::Writer::from_writer(Vec::new());
    for fit in &fits {
        out.serialize(fit).context("formatting fit row")?;
    }
    write_file(&args.out_dir.join("fits.csv"), out.into_inner().context("flushing fit rows")?)?;

    println!("{} runs -> {}", rows.len(), args.out_dir.join("sweep.csv").display());
    for fit in &fits {
        println!(
            "{} {} vs {}{}: {} {} over {} points",
            fit.family,
            fit.policy,
            fit.against,
            if fit.fixed.is_empty() { String::new() } else { format!(" ({})", fit.fixed) },
            fit.model,
            fit.estimate,
            fit.points
        );
    }
    Ok(())
}

fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.parse().map_err(|_| anyhow!("{WORKERS_ENV}={v} is not a worker count"))?;
        builder = builder.num_threads(n);
    }
    builder.build().context("starting worker pool")
}

fn run_job(job: &Job, graph: Arc<patrol_core::Graph>, tiebreak: TieBreak, horizon: Rounds, warmup: Rounds) -> Result<SummaryRow> {
    let n = graph.vertex_count();
    let horizon = horizon.resolve(n);
    let warmup = warmup.resolve(n);
    let describe = || format!("{} {} robots={} seed={} horizon={horizon}", job.spec, job.policy, job.robots, job.seed);
    let config = SimConfig::new(graph, job.policy, horizon)
        .robots((0..job.robots).map(|i| i * n / job.robots))
        .tiebreak(tiebreak)
        .seed(job.seed);
    let trace = patrol_core::run(&config).with_context(describe)?;
    let series = refresh_series(&trace);
    let peak = windowed_peaks(&visit_rounds(&trace), horizon, warmup).into_iter().max().unwrap_or(0);
    Ok(SummaryRow {
        family: job.spec.family.to_string(),
        param: job.spec.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" "),
        policy: job.policy.to_string(),
        robots: job.robots,
        seed: job.seed,
        peak_refresh: peak,
        coverage_time: series.coverage_time,
    })
}

fn mean_peak(rows: &[&SummaryRow]) -> f64 {
    rows.iter().map(|r| r.peak_refresh as f64).sum::<f64>() / rows.len() as f64
}

/// Power and geometric fits of the seed-averaged peak against the swept
/// parameter, and a power fit against the robot count.
fn growth_fits(
    args: &SweepArgs,
    jobs: &[(usize, Job)],
    rows: &[SummaryRow],
    policies: &[PolicyKind],
    robot_counts: &[usize],
    values: &[Option<i64>],
) -> Vec<FitRow> {
    let mut fits = Vec::new();
    let family = jobs.first().map_or_else(|| args.family.clone(), |(_, j)| j.spec.family.to_string());
    let select = |pred: &dyn Fn(&Job) -> bool| -> Vec<&SummaryRow> {
        jobs.iter().zip(rows).filter(|((_, j), _)| pred(j)).map(|(_, r)| r).collect()
    };
    let mut push = |policy: PolicyKind, against: &str, fixed: String, points: Vec<(f64, f64)>, models: &[GrowthModel]| {
        for &model in models {
            let Ok(fit) = fit_growth(&points, model) else { continue };
            let estimate = match model {
                GrowthModel::Power => fit.exponent(),
                GrowthModel::Geometric => fit.ratio(),
            };
            fits.push(FitRow {
                family: family.clone(),
                policy: policy.to_string(),
                against: against.to_string(),
                fixed: fixed.clone(),
                model: match model {
                    GrowthModel::Power => "power",
                    GrowthModel::Geometric => "geometric",
                },
                points: points.len(),
                slope: format!("{:.6}", fit.slope),
                intercept: format!("{:.6}", fit.intercept),
                estimate: estimate.map_or("nan".into(), |e| format!("{e:.6}")),
            });
        }
    };
    if let Some(param) = &args.param {
        if values.len() >= 3 {
            for &policy in policies {
                for &r in robot_counts {
                    let points = values
                        .iter()
                        .map(|&v| (v.unwrap_or(0) as f64, mean_peak(&select(&|j| j.policy == policy && j.robots == r && j.value == v))))
                        .collect();
                    push(policy, param, format!("robots={r}"), points, &[GrowthModel::Power, GrowthModel::Geometric]);
                }
            }
        }
    }
    if robot_counts.len() >= 3 {
        for &policy in policies {
            for &v in values {
                let points = robot_counts
                    .iter()
                    .map(|&r| (r as f64, mean_peak(&select(&|j| j.policy == policy && j.robots == r && j.value == v))))
                    .collect();
                let fixed = match (&args.param, v) {
                    (Some(p), Some(v)) => format!("{p}={v}"),
                    _ => String::new(),
                };
                push(policy, "robots", fixed, points, &[GrowthModel::Power]);
            }
        }
    }
    fits
}

#[derive(Args)]
pub struct SearchArgs {
    pub family: String,
    /// Parameters as key=value.
    pub params: Vec<String>,
    #[arg(long, default_value = "LRV_V")]
    pub policy: String,
    #[arg(long, default_value_t = 0)]
    pub start: usize,
    /// Rounds to search: a number, `<c>n` or `<c>n2`.
    #[arg(long, default_value = "20n")]
    pub horizon: Rounds,
    /// Only refresh gaps ending at or after this round count.
    #[arg(long, default_value_t = 0)]
    pub measure_from: Round,
    /// Distinct branching states to explore before giving up on exactness.
    #[arg(long, default_value_t = patrol_core::oracle::DEFAULT_STATE_CAP)]
    pub state_cap: u64,
    /// Witness output file [default: <out-dir>/witness.txt].
    #[arg(long)]
    pub witness: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct SearchSummary {
    graph: String,
    policy: String,
    start: usize,
    horizon: Round,
    measure_from: Round,
    worst_peak: Round,
    lowest_id_peak: Round,
    complete: bool,
    states_explored: u64,
    witness_choices: usize,
    witness: String,
}

pub fn search(args: &SearchArgs) -> CmdResult {
    let spec = FamilySpec::parse(&args.family, &args.params).map_err(Failure::usage)?;
    let graph = spec.graph().map_err(Failure::usage)?;
    let policy = parse_policy(&args.policy).context("--policy").map_err(Failure::usage)?;
    let horizon = args.horizon.resolve(graph.vertex_count());
    let limits = SearchLimits { measure_from: args.measure_from, state_cap: args.state_cap };
    let result = exhaustive_tiebreak_search(&graph, policy, VertexId(args.start), horizon, limits)
        .map_err(Failure::usage)?;
    let lowest = {
        let trace = patrol_core::run(&SimConfig::new(graph, policy, horizon).robots([args.start]))
            .map_err(|e| Failure::Run(anyhow!(e)))?;
        windowed_peaks(&visit_rounds(&trace), horizon, args.measure_from).into_iter().max().unwrap_or(0)
    };
    create_dir(&args.out_dir)?;
    let witness = args.witness.clone().unwrap_or_else(|| args.out_dir.join("witness.txt"));
    write_file(&witness, write_witness(&result.witness))?;
    let summary = SearchSummary {
        graph: spec.to_string(),
        policy: policy.to_string(),
        start: args.start,
        horizon,
        measure_from: args.measure_from,
        worst_peak: result.peak,
        lowest_id_peak: lowest,
        complete: result.complete,
        states_explored: result.states_explored,
        witness_choices: result.witness.len(),
        witness: witness.display().to_string(),
    };
    println!("{}", serde_json::to_string_pretty(&summary).context("serializing search summary")?);
    Ok(())
}

pub fn verify(suite: &str, json: bool) -> CmdResult {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse().map_err(|e: String| Failure::usage(anyhow!("{e}, or all")))?]
    };
    let results: Vec<_> = suites.into_iter().flat_map(run_suite).collect();
    if json {
        println!("{}", serde_json::to_string_pretty(&results).context("serializing results")?);
    } else {
        for r in &results {
            println!("{r}");
        }
    }
    if results.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}
