use std::fmt::Write as _;

use super::graph::{DataflowGraph, NodeKind, OutPort};

fn shape(kind: &NodeKind) -> &'static str {
    match kind {
        NodeKind::Source(_) => "box",
        NodeKind::Steer => "triangle",
        NodeKind::Inctag => "diamond",
        _ => "ellipse",
    }
}

fn caption(kind: &NodeKind) -> String {
    match kind {
        NodeKind::Source(Some(v)) => format!("{v}"),
        NodeKind::Source(None) => "?".to_string(),
        NodeKind::Arith { op, rhs: Some(v) } => format!("{} {v}", op.symbol()),
        NodeKind::Arith { op, rhs: None } => op.symbol().to_string(),
        NodeKind::Compare { op, rhs: Some(v) } => format!("{} {v}", op.symbol()),
        NodeKind::Compare { op, rhs: None } => op.symbol().to_string(),
        NodeKind::Copy => "copy".to_string(),
        NodeKind::Steer => "T F".to_string(),
        NodeKind::Inctag => "inctag".to_string(),
        NodeKind::Sink => "sink".to_string(),
    }
}

/// Renders `g` as a Graphviz digraph named `name`.
///
/// Sources are boxes, Steers triangles, Inctags diamonds, everything else an
/// ellipse. Edges carry their label; Steer edges also name the port.
pub fn export_dot_named(g: &DataflowGraph, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{name}\" {{");
    let _ = writeln!(out, "  rankdir=TB;");
    for n in g.nodes() {
        let _ = writeln!(
            out,
            "  \"{}\" [shape={}, label=\"{}\\n{}\"];",
            n.id,
            shape(&n.kind),
            n.id,
            caption(&n.kind)
        );
    }
    for e in g.edges() {
        let port = match e.port {
            OutPort::Out => String::new(),
            p => format!(", taillabel=\"{}\"", if p == OutPort::True { "T" } else { "F" }),
        };
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"{}];",
            e.from, e.to, e.label, port
        );
    }
    out.push_str("}\n");
    out
}

pub fn export_dot(g: &DataflowGraph) -> String {
    export_dot_named(g, "dataflow")
}
