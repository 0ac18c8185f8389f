//! Random messages times random prices: every demand set must be strongly
//! exchangeable and every flow-built correspondence must check out.
//!
//!     cargo run --release --example theorem_suite -- 1000 7

use assignment_messages::cli::{run_theorem1_suite, SuiteOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let count = args.next().map_or(Ok(200), |s| s.parse())?;
    let seed = args.next().map_or(Ok(0), |s| s.parse())?;
    let report = run_theorem1_suite(seed, &SuiteOptions::new(count))?;
    println!("{report}");
    for failure in &report.failures {
        println!("  {failure}");
    }

    let mut broken = SuiteOptions::new(3);
    broken.inject_bug = true;
    let caught = run_theorem1_suite(seed, &broken)?;
    println!("with a planted bug: {} failure(s)", caught.failures.len());
    Ok(())
}
