//! Searches for a gross substitutes valuation on `{0,1}^n` that is not
//! strongly exchangeable, and re-verifies what it finds.
//!
//!     cargo run --release --example counterexample_search -- 4 1
//!     cargo run --release --example counterexample_search -- 6 3 matroid

use assignment_messages::cli::{
    search_counterexample, serialize_table, verify_search_witness, SearchConfig, SearchFamily,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let goods = args.first().map_or(Ok(6), |s| s.parse())?;
    let cap = args.get(1).map_or(Ok(3), |s| s.parse())?;
    let family = match args.get(2).map(String::as_str) {
        Some("exhaustive") => SearchFamily::Exhaustive,
        Some("matroid") | None => SearchFamily::MatroidRank,
        Some(other) => return Err(format!("unknown family {other}").into()),
    };
    let cfg = SearchConfig::new(goods, cap, 1_000_000).with_family(family);
    let report = search_counterexample(&cfg)?;
    println!("{report}");
    if let Some(w) = report.witness() {
        let check = verify_search_witness(w)?;
        println!("re-verified: {check:?}");
        print!("{}", serialize_table(&w.table));
    }
    Ok(())
}
