//! Dynamic dataflow graph IR: nodes, labeled edges, validation, text format
//! and DOT export.

mod dot;
mod graph;
mod text;
mod validate;

pub use dot::{export_dot, export_dot_named};
pub use graph::{
    isomorphic, ArithOp, CmpOp, DataflowGraph, Edge, GraphError, Node, NodeKind, OutPort,
};
pub use text::{parse_graph_text, parse_graph_unchecked, serialize_graph, GraphTextError};
pub use validate::{validate_graph, Violation};
