//! Substitutes checks: the exact local-exchange test on `{0,1}^n` and the
//! grid test on the unit-split representation of multi-unit tables.

use assignment_messages::cli::{random_message, RandomParams};
use assignment_messages::engine::to_valuation_table;
use assignment_messages::model::ValuationTable;
use assignment_messages::properties::{
    binary_expansion, check_gross_substitutes_exact, check_strong_substitutes,
};
use assignment_messages::rational::int;

fn cube(values: &[i64]) -> ValuationTable {
    let n = values.len().trailing_zeros() as usize;
    let values: Vec<_> = values.iter().map(|&v| int(v)).collect();
    ValuationTable::from_hypercube(n, &values).expect("hypercube table")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tables = [
        ("additive", cube(&[0, 2, 3, 5])),
        ("unit demand", cube(&[0, 1, 2, 2, 3, 3, 3, 3])),
        ("complements", cube(&[0, 0, 0, 3])),
    ];
    for (name, t) in &tables {
        println!("{name}:");
        println!("  exact: {}", check_gross_substitutes_exact(t)?);
        println!("  grid:  {}", check_strong_substitutes(t, None)?);
    }

    let msg = random_message(3, &RandomParams::new(2, 6))?;
    let table = to_valuation_table(&msg)?.restrict_nonnegative();
    let items = binary_expansion(&table)?.num_items();
    println!(
        "random message, {} bundles, {items} unit items: {}",
        table.len(),
        check_strong_substitutes(&table, None)?
    );
    Ok(())
}
