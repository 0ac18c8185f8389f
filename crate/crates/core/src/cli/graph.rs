use crate::engine::{compile, EngineError};
use crate::flows::FlowNetwork;
use crate::model::AssignmentMessage;
use std::fmt::Write;

fn quoted(text: &str) -> String {
    format!("\"{}\"", text.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz DOT text for any network. Vertices are `v0, v1, ...` in creation
/// order; arcs follow in id order.
pub fn network_to_dot(net: &FlowNetwork, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quoted(name)).unwrap();
    for v in 0..net.num_vertices() {
        writeln!(out, "  v{v} [label={}];", quoted(net.vertex_label(v))).unwrap();
    }
    for arc in net.arcs() {
        writeln!(
            out,
            "  v{} -> v{} [label={}];",
            arc.tail,
            arc.head,
            quoted(&arc.label)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// The compiled network of a message. Vertex labels name the equality row
/// (`(2) I={..}`, `(3) i=t, I={..}`, `(5) roots`); arc labels give the set
/// and its bounds.
pub fn export_graph(msg: &AssignmentMessage) -> Result<String, EngineError> {
    Ok(network_to_dot(&compile(msg)?.network, "assignment_message"))
}
