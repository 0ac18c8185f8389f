//! Strong exchangeability of a message at a price, with the swap
//! correspondence read off the conformal decomposition of two optimal flows.

use assignment_messages::cli::{random_message, RandomParams};
use assignment_messages::engine::{compile, compiled_demand};
use assignment_messages::model::PriceVector;
use assignment_messages::properties::{
    check_strong_exchangeability, construct_sigma_from_flows, min_size_demand,
    verify_sigma_construction,
};
use assignment_messages::rational::int;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Find a message and price with several minimum-size demanded bundles.
    for seed in 0.. {
        let msg = random_message(seed, &RandomParams::new(3, 6))?;
        let compiled = compile(&msg)?;
        for k in -2..=4 {
            let p = PriceVector::new(vec![int(k); 3]);
            let demand = compiled_demand(&compiled, &p)?.demand;
            let mins: Vec<_> = min_size_demand(&demand).into_iter().collect();
            if mins.len() < 3 {
                continue;
            }
            println!(
                "message seed {seed}, p = ({k},{k},{k}), {} demanded bundles",
                demand.len()
            );
            println!("{}", check_strong_exchangeability(&compiled, &p)?);
            for q in &mins {
                for r in &mins {
                    if q == r {
                        continue;
                    }
                    let sc = construct_sigma_from_flows(&compiled, &p, q, r)?;
                    verify_sigma_construction(&compiled, &p, q, r, &sc)
                        .map_err(|d| format!("{q} -> {r}: {d}"))?;
                    println!(
                        "  {q} -> {r}: sigma {:?} from {} zero-cost cycles",
                        sc.correspondence.pairs,
                        sc.cycles.len()
                    );
                }
            }
            return Ok(());
        }
    }
    unreachable!()
}
