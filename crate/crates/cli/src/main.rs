//! `patrol`: generate instances, run patrolling simulations and sweeps, and
//! run the verification suites.
//!
//! Exit codes: 0 success, 1 verification or run failure, 2 usage error.

mod commands;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Worker count for `sweep`; defaults to the number of CPUs.
pub const WORKERS_ENV: &str = "PATROL_WORKERS";

#[derive(Parser)]
#[command(name = "patrol", version, about = "Local-policy patrolling of triangulation dual graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance in the graph text format.
    ///
    /// `grid_triangulation` also writes the primal triangulation next to the
    /// dual graph, with a `.tri` extension.
    Generate {
        /// Family name: path, cycle, four_cycle_chain, diamond_gadget_chain,
        /// flower_barrier, grid_triangulation (dashes also accepted).
        family: String,
        /// Parameters as key=value, e.g. `k=3` or `w=10 h=10`.
        params: Vec<String>,
        /// Output file [default: <out-dir>/<family>.graph].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run one scenario and write events.csv, metrics.csv and summary.json.
    Simulate(SimulateArgs),
    /// Run a cartesian product of instances, policies, robot counts and seeds.
    Sweep(commands::SweepArgs),
    /// Search all tie-break choices for the worst peak refresh and write the
    /// witnessing choice sequence.
    Search(commands::SearchArgs),
    /// Run a verification suite: invariants, theorems, differential or all.
    Verify {
        suite: String,
        /// Print results as JSON instead of one line per criterion.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the scenario horizon.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Overrides the scenario policy (LRV_V, LRV_E, LFV_V, LFV_E, RANDOM).
    #[arg(long)]
    pub policy: Option<String>,
    /// Overrides the tie-break rule: lowest-id, seeded-random:N, scripted:a,b,...
    #[arg(long)]
    pub tiebreak: Option<String>,
    /// Replays a witness file (one choice per line) as a scripted tie-break.
    #[arg(long, conflicts_with = "tiebreak")]
    pub witness: Option<PathBuf>,
    /// Overrides the scenario output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Error carrying its exit code.
pub enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
    /// Already reported; just exit 1.
    Verify,
}

impl Failure {
    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure::Usage(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { family, params, out, out_dir } => commands::generate(&family, &params, out, &out_dir),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Search(args) => commands::search(&args),
        Command::Verify { suite, json } => commands::verify(&suite, json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
    }
}
