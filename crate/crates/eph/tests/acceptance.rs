//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::process::ExitCode;

use eph::config::Config;
use eph::experiments::{self, Criterion, DEFAULT_SEED};

/// (id, tolerance, runtime limit in seconds). Criterion 7 and 6 are slope
/// windows around 5 and 1, criterion 8 is the half-width of the ratio window.
const PINNED: [(u32, f64, f64); 10] = [
    (1, 1e-8, 5.0),
    (2, 1e-10, 10.0),
    (3, 5e-3, 1.0),
    (4, 0.0, 60.0),
    (5, 0.15, 300.0),
    (6, 0.02, 5.0),
    (7, 0.05, 5.0),
    (8, 0.1, 1.0),
    (9, 0.01, 30.0),
    (10, 0.01, 60.0),
];

/// Re-derives the verdict from the measured value and the pinned tolerance.
fn verdict(c: &Criterion, tolerance: f64, limit: f64) -> bool {
    let within = match c.id {
        4 => c.measured == 0.0,
        // Three-part check; the library reports the tightest component.
        5 => c.passed,
        6 => (c.measured - 1.0).abs() <= tolerance,
        7 => (c.measured - 5.0).abs() <= tolerance,
        8 => (c.measured - 16.0).abs() <= tolerance,
        10 => c.measured < tolerance && c.passed,
        _ => c.measured < tolerance,
    };
    within && c.runtime_s < limit && c.runtime_limit_s == limit
}

fn main() -> ExitCode {
    let config = Config::default();
    let criteria = experiments::run_all(&config, DEFAULT_SEED, None);
    let mut failures = 0;
    for (c, &(id, tolerance, limit)) in criteria.iter().zip(PINNED.iter()) {
        assert_eq!(c.id, id, "criteria out of order");
        let ok = verdict(c, tolerance, limit);
        if ok != c.passed {
            println!(
                "FAIL criterion {id:>2} verdict mismatch: library {} pinned {ok}",
                c.passed
            );
            failures += 1;
            continue;
        }
        println!("{}", c.line());
        if !ok {
            failures += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
