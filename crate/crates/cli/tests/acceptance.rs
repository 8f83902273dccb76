//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p patrol-cli --test acceptance -- --nocapture`
//! (output is printed either way; the target has no libtest harness).
//!
//! Criteria listed in `KNOWN_FAILURES` are analysed in the README; they are
//! still evaluated and printed as FAIL, but do not fail the build. Any other
//! failure, or a known failure that starts passing, exits nonzero.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use patrol_core::verify::{self, CriterionResult};

type Check = (&'static str, fn() -> CriterionResult);

/// Criteria that do not hold on the instances this repo can build; see the
/// "Acceptance status" section of the README.
const KNOWN_FAILURES: &[&str] = &["C6"];

fn cli_determinism() -> CriterionResult {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = common::run_all_commands(a.path(), "1");
    let second = common::run_all_commands(b.path(), "3");
    let differing: Vec<&String> = first.iter().filter(|(k, v)| second.get(*k) != Some(v)).map(|(k, _)| k).collect();
    let passed = differing.is_empty() && first.len() == second.len();
    CriterionResult {
        id: "C10".into(),
        title: "CLI outputs are byte-identical across runs",
        passed,
        detail: if passed {
            format!("{} files and stdout streams identical (1 vs 3 sweep workers)", first.len())
        } else {
            format!("differences in {differing:?}")
        },
    }
}

fn main() -> ExitCode {
    let checks: Vec<Check> = vec![
        ("C1", verify::coverage_guarantee),
        ("C2", verify::frequency_bound),
        ("C3", verify::edge_latency_bound),
        ("C4", verify::chain_growth),
        ("C5", verify::worst_case_growth),
        ("C6", verify::multi_robot_speedup),
        ("C7", verify::flower_frequency_ratio),
        ("C8", verify::ownership_bounds),
        ("C9", verify::differential),
        ("C10", cli_determinism),
    ];
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (id, check) in &checks {
        let start = Instant::now();
        let result = check();
        let known = KNOWN_FAILURES.contains(id);
        let note = match (result.passed, known) {
            (false, true) => " (known failure, see README)",
            (true, true) => " (listed as a known failure but now passes; update KNOWN_FAILURES)",
            _ => "",
        };
        println!("{result}{note} [{:.1}s]", start.elapsed().as_secs_f64());
        if result.passed {
            passed += 1;
        }
        if result.passed == known {
            unexpected.push(*id);
        }
    }
    println!("acceptance: {passed}/{} criteria pass", checks.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for {unexpected:?}");
        ExitCode::FAILURE
    }
}
