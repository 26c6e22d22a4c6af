//! Runs every acceptance criterion and prints one line per criterion.
//! Exits non-zero if any criterion fails.

use dmtrace::acceptance::{run, CRITERIA};

fn main() {
    // `cargo test -- <filter>` passes the filter through; run only matching ids.
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (id, _, _) in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|f| id.eq_ignore_ascii_case(f)) {
            continue;
        }
        let report = run(id).expect("known criterion");
        println!("{report}");
        if !report.passed {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
