use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::graph::{DataflowGraph, NodeKind, OutPort};
use crate::element::{Label, NodeId};

/// One broken graph invariant. Violations are data, not failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// An edge names a node that does not exist.
    DanglingEndpoint { label: Label, node: NodeId },
    /// An edge leaves a port the producer does not have, or enters a slot
    /// beyond the consumer's arity.
    InvalidPort { label: Label, node: NodeId, port: String },
    /// An input slot has the wrong number of incoming edges.
    InputArity {
        node: NodeId,
        slot: usize,
        expected: &'static str,
        found: usize,
    },
    /// A node that must produce has no outgoing edge.
    MissingOutput { node: NodeId },
    /// A cycle that does not pass through any Inctag node.
    UntaggedCycle { nodes: Vec<NodeId> },
}

impl Violation {
    /// Stable name of the violated invariant.
    pub fn class(&self) -> &'static str {
        match self {
            Violation::DanglingEndpoint { .. } => "dangling-endpoint",
            Violation::InvalidPort { .. } => "invalid-port",
            Violation::InputArity { .. } => "input-arity",
            Violation::MissingOutput { .. } => "missing-output",
            Violation::UntaggedCycle { .. } => "untagged-cycle",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingEndpoint { label, node } => {
                write!(f, "edge `{label}` refers to unknown node `{node}`")
            }
            Violation::InvalidPort { label, node, port } => {
                write!(f, "edge `{label}` uses port `{port}` which node `{node}` does not have")
            }
            Violation::InputArity {
                node,
                slot,
                expected,
                found,
            } => write!(
                f,
                "node `{node}` input {slot}: expected {expected} incoming edge(s), found {found}"
            ),
            Violation::MissingOutput { node } => {
                write!(f, "node `{node}` has no outgoing edge")
            }
            Violation::UntaggedCycle { nodes } => {
                let names: Vec<&str> = nodes.iter().map(NodeId::as_str).collect();
                write!(f, "cycle through {} has no inctag node", names.join(", "))
            }
        }
    }
}

/// Returns every invariant violation in `g`; an empty list means valid.
pub fn validate_graph(g: &DataflowGraph) -> Vec<Violation> {
    let mut out = Vec::new();

    for e in g.edges() {
        let mut ok = true;
        for id in [&e.from, &e.to] {
            if g.node(id).is_none() {
                out.push(Violation::DanglingEndpoint {
                    label: e.label.clone(),
                    node: id.clone(),
                });
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        let producer = &g.node(&e.from).expect("checked").kind;
        if !producer.output_ports().contains(&e.port) {
            out.push(Violation::InvalidPort {
                label: e.label.clone(),
                node: e.from.clone(),
                port: e.port.name().to_string(),
            });
        }
        let consumer = &g.node(&e.to).expect("checked").kind;
        if e.slot >= consumer.input_slots() {
            out.push(Violation::InvalidPort {
                label: e.label.clone(),
                node: e.to.clone(),
                port: e.slot.to_string(),
            });
        }
    }

    for node in g.nodes() {
        let inputs = g.inputs_of(&node.id);
        for (slot, labels) in inputs.iter().enumerate().take(node.kind.input_slots()) {
            let live = labels
                .iter()
                .filter(|l| g.edge(l).is_some_and(|e| g.node(&e.from).is_some()))
                .count();
            let (ok, expected) = match node.kind {
                NodeKind::Inctag => (live >= 1, "at least 1"),
                _ => (live == 1, "exactly 1"),
            };
            if !ok {
                out.push(Violation::InputArity {
                    node: node.id.clone(),
                    slot,
                    expected,
                    found: live,
                });
            }
        }
        let needs_output = !matches!(node.kind, NodeKind::Sink | NodeKind::Steer);
        if needs_output && g.outputs_of(&node.id, OutPort::Out).is_empty() {
            out.push(Violation::MissingOutput {
                node: node.id.clone(),
            });
        }
    }

    for cycle in untagged_cycles(g) {
        out.push(Violation::UntaggedCycle { nodes: cycle });
    }
    out
}

/// Strongly connected components of the graph with Inctag nodes removed
/// that contain a cycle.
fn untagged_cycles(g: &DataflowGraph) -> Vec<Vec<NodeId>> {
    let keep = |id: &NodeId| g.node(id).is_some_and(|n| n.kind != NodeKind::Inctag);
    let mut succ: BTreeMap<&NodeId, BTreeSet<&NodeId>> = BTreeMap::new();
    for n in g.nodes().filter(|n| keep(&n.id)) {
        succ.entry(&n.id).or_default();
    }
    for e in g.edges() {
        if keep(&e.from) && keep(&e.to) {
            succ.entry(&e.from).or_default().insert(&e.to);
        }
    }

    // Tarjan's algorithm; graphs here are small enough for recursion.
    struct Tarjan<'a> {
        succ: &'a BTreeMap<&'a NodeId, BTreeSet<&'a NodeId>>,
        index: BTreeMap<&'a NodeId, usize>,
        low: BTreeMap<&'a NodeId, usize>,
        stack: Vec<&'a NodeId>,
        on_stack: BTreeSet<&'a NodeId>,
        next: usize,
        sccs: Vec<Vec<NodeId>>,
    }

    impl<'a> Tarjan<'a> {
        fn visit(&mut self, v: &'a NodeId) {
            self.index.insert(v, self.next);
            self.low.insert(v, self.next);
            self.next += 1;
            self.stack.push(v);
            self.on_stack.insert(v);
            let succ = self.succ;
            for &w in &succ[v] {
                if !self.index.contains_key(w) {
                    self.visit(w);
                    let lw = self.low[w];
                    let lv = self.low.get_mut(v).expect("visited");
                    *lv = (*lv).min(lw);
                } else if self.on_stack.contains(w) {
                    let iw = self.index[w];
                    let lv = self.low.get_mut(v).expect("visited");
                    *lv = (*lv).min(iw);
                }
            }
            if self.low[v] == self.index[v] {
                let mut comp = Vec::new();
                while let Some(w) = self.stack.pop() {
                    self.on_stack.remove(w);
                    comp.push(w.clone());
                    if w == v {
                        break;
                    }
                }
                let cyclic = comp.len() > 1 || succ[v].contains(v);
                if cyclic {
                    comp.sort();
                    self.sccs.push(comp);
                }
            }
        }
    }

    let mut t = Tarjan {
        succ: &succ,
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        stack: Vec::new(),
        on_stack: BTreeSet::new(),
        next: 0,
        sccs: Vec::new(),
    };
    for v in succ.keys() {
        if !t.index.contains_key(v) {
            t.visit(v);
        }
    }
    t.sccs.sort();
    t.sccs
}
