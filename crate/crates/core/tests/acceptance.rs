//! Acceptance gate: runs criteria 1 to 8 at their fixed thresholds, prints
//! one line per criterion, then the measured details of each, and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use biharm::verify::{
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8,
    CriterionReport,
};

fn main() -> ExitCode {
    let criteria: [fn() -> CriterionReport; 8] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
    ];
    let started = Instant::now();
    let handles: Vec<_> = criteria.into_iter().map(std::thread::spawn).collect();
    let reports: Vec<CriterionReport> = handles
        .into_iter()
        .map(|h| h.join().expect("criterion panicked"))
        .collect();

    println!();
    for r in &reports {
        println!("{}", r.summary_line());
    }
    println!();
    for r in &reports {
        print!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        reports.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
