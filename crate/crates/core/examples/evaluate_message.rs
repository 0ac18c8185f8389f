//! Values, indirect utility and demand of a message, next to the brute-force
//! oracle that enumerates every feasible assignment.

use assignment_messages::cli::parse_message;
use assignment_messages::engine::{demand_set, oracle, to_valuation_table, value};
use assignment_messages::model::{Bundle, PriceVector};
use assignment_messages::rational::{parse_rational, Exact};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let msg = parse_message(include_str!("data/example_one.json"))?;

    println!("valuation table:");
    for (q, v) in to_valuation_table(&msg)?.iter() {
        println!("  v{q} = {}", Exact(v));
    }
    let q = Bundle::new(vec![2, 1]);
    println!(
        "v{q}: flows {:?}, enumeration {:?}",
        value(&msg, &q)?.map(|v| Exact(&v).to_string()),
        oracle::value_oracle(&msg, &q)?.map(|v| Exact(&v).to_string())
    );

    for prices in [["0", "0"], ["2", "3"], ["5/2", "4"], ["4", "5"]] {
        let p = PriceVector::new(
            prices
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<_, _>>()?,
        );
        let d = demand_set(&msg, &p)?;
        let brute = oracle::demand_oracle(&msg, &p)?;
        assert_eq!(d, brute);
        let bundles: Vec<String> = d.demand.iter().map(Bundle::to_string).collect();
        println!(
            "p=({}): u = {}, D = {{{}}}",
            prices.join(","),
            Exact(&d.indirect_utility),
            bundles.join(", ")
        );
    }
    Ok(())
}
