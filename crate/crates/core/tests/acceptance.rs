//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed whether or not
//! the criterion passes. Exits with status 1 if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use anticip_core::verify::{criterion, CRITERIA, DEFAULT_SEED};

fn main() -> ExitCode {
    // `cargo test -- --list` and similar libtest flags have nothing to list
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut failed = Vec::new();
    for (id, title, _) in CRITERIA {
        let start = Instant::now();
        match criterion(id, DEFAULT_SEED) {
            Ok(result) => {
                println!("{result} [{:.1} s]", start.elapsed().as_secs_f64());
                if !result.passed {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("FAIL [{id}] {title}: error: {e}");
                failed.push(id);
            }
        }
    }
    println!(
        "acceptance: {} passed, {} failed{}",
        CRITERIA.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" (criteria {failed:?})")
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
