#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

pub fn patrol(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_patrol"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("patrol binary runs")
}

pub fn patrol_env(args: &[&str], cwd: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_patrol"));
    cmd.args(args).current_dir(cwd);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("patrol binary runs")
}

/// Every file under `dir`, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

pub const ARRIVAL_SCENARIO: &str = r#"
horizon = 3000
seed = 11
policy = "LFV_E"
tiebreak = "seeded-random:5"

[graph]
family = "grid_triangulation"
params = { w = 4, h = 4 }

[robots]
starts = [0]
arrivals = [{ round = 1000, vertex = 0 }, { round = 1000, vertex = 16 }, { round = 2000, vertex = 31 }]

[outputs]
dir = "out"
"#;

/// Runs every command into a fresh directory and returns the files written
/// plus each command's stdout, with the directory path scrubbed.
pub fn run_all_commands(dir: &Path, workers: &str) -> BTreeMap<String, Vec<u8>> {
    fs::write(dir.join("scenario.toml"), ARRIVAL_SCENARIO).unwrap();
    let env = [("PATROL_WORKERS", workers)];
    let commands: [&[&str]; 6] = [
        &["generate", "grid", "w=3", "h=2", "--out-dir", "gen"],
        &["generate", "flower_barrier", "delta=3", "stair_len=4", "--out-dir", "gen"],
        &["simulate", "--scenario", "scenario.toml"],
        &["sweep", "--family", "four_cycle_chain", "--param", "k", "--values", "2..5", "--robots", "1,2,3",
          "--seeds", "0..2", "--tiebreak", "seeded-random", "--horizon", "20n2", "--out-dir", "sweep"],
        &["search", "four_cycle_chain", "k=3", "--out-dir", "search"],
        &["verify", "invariants", "--json"],
    ];
    let mut out = BTreeMap::new();
    for (i, args) in commands.iter().enumerate() {
        let o = patrol_env(args, dir, &env);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let stdout = String::from_utf8_lossy(&o.stdout).replace(&dir.display().to_string(), "<dir>");
        out.insert(format!("stdout-{i}"), stdout.into_bytes());
    }
    out.extend(snapshot(dir));
    out
}
