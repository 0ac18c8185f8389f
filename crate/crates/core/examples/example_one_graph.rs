//! Compiles the four-variable, two-good message in `data/example_one.json`
//! and prints its circulation network as Graphviz DOT.
//!
//!     cargo run --example example_one_graph | dot -Tsvg > example_one.svg

use assignment_messages::cli::{export_graph, parse_message};
use assignment_messages::engine::compile;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let msg = parse_message(include_str!("data/example_one.json"))?;
    let compiled = compile(&msg)?;
    eprintln!(
        "{} vertices, {} arcs",
        compiled.network.num_vertices(),
        compiled.network.num_arcs()
    );
    print!("{}", export_graph(&msg)?);
    Ok(())
}
