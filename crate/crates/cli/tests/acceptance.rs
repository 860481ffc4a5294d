//! Acceptance criteria 1-12, one pass/fail line each.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Duration;

use twisted_means::selftest::run_suite;

const TIME_LIMITS: [(u8, u64); 3] = [(1, 10), (5, 60), (11, 30)];

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .expect("output directory exists")
        .map(|e| {
            let e = e.expect("directory entry");
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).expect("artifact readable"))
        })
        .collect()
}

/// Runs `twmean selftest` on criteria 1-11 at 1, 2 and 8 threads and
/// compares every artifact byte for byte.
fn determinism() -> (bool, String) {
    let mut runs = Vec::new();
    for threads in ["1", "2", "8"] {
        let dir = tempfile::tempdir().expect("temp dir");
        let out = Command::new(env!("CARGO_BIN_EXE_twmean"))
            .args(["selftest", "--criteria", "1,2,3,4,5,6,7,8,9,10,11", "--threads", threads, "--out"])
            .arg(dir.path())
            .output()
            .expect("selftest runs");
        if out.status.code() != Some(0) {
            return (false, format!("selftest at {threads} threads exited {:?}", out.status.code()));
        }
        runs.push(read_dir(dir.path()));
    }
    let same = runs.iter().all(|r| *r == runs[0]);
    let names: Vec<&String> = runs[0].keys().collect();
    (same && names.len() >= 3, format!("artifacts {names:?} identical across 1, 2, 8 threads: {same}"))
}

fn main() -> ExitCode {
    let report = run_suite(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11]);
    let mut all = true;
    for c in &report.criteria {
        let limit = TIME_LIMITS.iter().find(|(id, _)| *id == c.id).map(|(_, s)| Duration::from_secs(*s));
        let in_time = limit.map_or(true, |l| c.elapsed < l);
        let pass = c.passed && in_time;
        all &= pass;
        let budget = limit.map(|l| format!(" [limit {l:?}]")).unwrap_or_default();
        println!(
            "criterion {:>2} {:<22} {}  metric {:e} vs {:e}, {:.2?}{budget}  {}",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            c.metric,
            c.threshold,
            c.elapsed,
            c.detail
        );
    }
    let (pass, detail) = determinism();
    all &= pass;
    println!("criterion 12 {:<22} {}  {detail}", "determinism", if pass { "PASS" } else { "FAIL" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
