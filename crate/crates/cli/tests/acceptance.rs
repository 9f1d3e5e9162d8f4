//! Acceptance criteria 1-11, one pass/fail line each.
//!
//! Criteria 1-10 run the suite sections in-process. Each section's bounds
//! are compared against the table below, so loosening a tolerance in the
//! suite fails here. Criterion 11 runs the binary under several thread
//! counts and compares the bytes.

use std::process::{Command, ExitCode};
use std::time::Instant;

use hyperball_cli::suite::{run_criterion, Relation, Section, Status};
use hyperball_core::exact::format_rational;
use hyperball_core::series::residue::c1_sum;

const SEED: u64 = 7;

/// Bound of every check, in suite order.
const BOUNDS: &[(u8, &[(Relation, f64)])] = &[
    (1, &[(Relation::Below, 1e-10), (Relation::Below, 1e-10)]),
    (2, &[(Relation::Below, 1e-8), (Relation::Below, 1e-9), (Relation::Below, 1e-14)]),
    (3, &[(Relation::Below, 1e-12), (Relation::Below, 1e-12)]),
    (4, &[(Relation::Below, 1e-8), (Relation::Above, 1e-2)]),
    (5, &[(Relation::Below, 1e-6)]),
    (6, &[(Relation::Below, 1e-4), (Relation::Below, 1e-3), (Relation::Below, 1e-8)]),
    (7, &[(Relation::Below, 1e-9)]),
    (
        8,
        &[
            (Relation::Equal, 0.0),
            (Relation::Below, 1e-10),
            (Relation::Below, 1e-10),
            (Relation::Equal, 0.0),
            (Relation::Report, -1.0 / 140.0),
        ],
    ),
    (9, &[(Relation::Below, 1e-3), (Relation::Below, 1e-3)]),
    (
        10,
        &[
            (Relation::Below, 1e-11),
            (Relation::Equal, 1.0),
            (Relation::Equal, 0.0),
            (Relation::Below, 1.0),
            (Relation::Below, 0.1),
        ],
    ),
];

/// Wall-clock budget for criterion 9, in seconds.
const TORUS_BUDGET: f64 = 300.0;

fn bounds_match(s: &Section, expected: &[(Relation, f64)]) -> bool {
    s.checks.len() == expected.len()
        && s.checks
            .iter()
            .zip(expected)
            .all(|(c, (rel, b))| c.relation == *rel && (c.bound == *b || (c.bound - b).abs() <= 1e-18))
}

fn summary(s: &Section) -> String {
    s.checks
        .iter()
        .map(|c| format!("{:.2e}", c.value))
        .collect::<Vec<_>>()
        .join(", ")
}

fn criterion_line(n: u8, expected: &[(Relation, f64)]) -> bool {
    let start = Instant::now();
    let Some(s) = run_criterion(SEED, n) else {
        println!("FAIL criterion {n:>2}: missing from the suite");
        return false;
    };
    let elapsed = start.elapsed().as_secs_f64();
    let mut ok = s.passed() && bounds_match(&s, expected);
    let mut note = String::new();
    if n == 8 {
        // the printed sum is reported and must stay flagged, not pass silently
        let printed = c1_sum(1, 1).map(|r| format_rational(&r)).unwrap_or_default();
        let flagged = s.checks.last().is_some_and(|c| c.status == Status::Flag);
        ok &= printed == "-1/630" && flagged;
        note = format!("; printed c1_sum(1,1) = {printed} flagged as discrepant");
    }
    if n == 9 {
        ok &= elapsed < TORUS_BUDGET;
        note = format!("; {elapsed:.1}s of {TORUS_BUDGET:.0}s");
    }
    println!(
        "{} criterion {n:>2}: {} [{}]{note}",
        if ok { "PASS" } else { "FAIL" },
        s.title,
        summary(&s)
    );
    if !ok {
        for c in &s.checks {
            println!("       {:?} {} {:e} {:?} {:e}", c.status, c.name, c.value, c.relation, c.bound);
        }
    }
    ok
}

fn suite_bytes(threads: &str) -> Option<(Vec<u8>, bool)> {
    let out = Command::new(env!("CARGO_BIN_EXE_hyperball"))
        .args(["suite", "--seed", "7"])
        .env("HYPERBALL_THREADS", threads)
        .output()
        .ok()?;
    Some((out.stdout, out.status.success()))
}

fn determinism_line() -> bool {
    let runs: Vec<_> = ["1", "4", "1"].iter().map(|t| suite_bytes(t)).collect();
    let in_process = hyperball_cli::suite::run_suite(SEED).render().into_bytes();
    let ok = runs.iter().all(|r| {
        r.as_ref()
            .is_some_and(|(bytes, success)| *success && *bytes == in_process)
    });
    println!(
        "{} criterion 11: suite --seed 7 byte-identical across runs and 1/4 threads [{} bytes]",
        if ok { "PASS" } else { "FAIL" },
        in_process.len()
    );
    ok
}

fn main() -> ExitCode {
    let mut all = true;
    for (n, expected) in BOUNDS {
        all &= criterion_line(*n, expected);
    }
    all &= determinism_line();
    if all {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
