use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::element::{Label, NodeId, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub const ALL: [ArithOp; 4] = [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div];

    pub fn name(self) -> &'static str {
        match self {
            ArithOp::Add => "add",
            ArithOp::Sub => "sub",
            ArithOp::Mul => "mul",
            ArithOp::Div => "div",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }

    /// Checked evaluation. `None` on overflow or division by zero; division
    /// truncates toward zero.
    pub fn apply(self, lhs: Value, rhs: Value) -> Option<Value> {
        match self {
            ArithOp::Add => lhs.checked_add(rhs),
            ArithOp::Sub => lhs.checked_sub(rhs),
            ArithOp::Mul => lhs.checked_mul(rhs),
            ArithOp::Div => lhs.checked_div(rhs),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Gt,
    Eq,
    Ne,
    Le,
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Lt, CmpOp::Gt, CmpOp::Eq, CmpOp::Ne, CmpOp::Le, CmpOp::Ge];

    pub fn name(self) -> &'static str {
        match self {
            CmpOp::Lt => "lt",
            CmpOp::Gt => "gt",
            CmpOp::Eq => "eq",
            CmpOp::Ne => "ne",
            CmpOp::Le => "le",
            CmpOp::Ge => "ge",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds<T: Ord>(self, lhs: T, rhs: T) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    /// The operator with its operands swapped: `a op b` iff `b op.flip() a`.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Eq => CmpOp::Eq,
            CmpOp::Ne => CmpOp::Ne,
        }
    }
}

/// Node kinds. `Arith` and `Compare` take either two inputs or one input and
/// a literal right operand (`rhs`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeKind {
    /// Root node; its value may be left open and supplied at run time.
    Source(Option<Value>),
    Arith { op: ArithOp, rhs: Option<Value> },
    Compare { op: CmpOp, rhs: Option<Value> },
    /// Unary identity, used where a value must move onto a new label.
    Copy,
    /// Input 0 is data, input 1 the boolean control.
    Steer,
    /// One logical input that accepts any of several incoming labels.
    Inctag,
    Sink,
}

impl NodeKind {
    /// Number of input slots.
    pub fn input_slots(&self) -> usize {
        match self {
            NodeKind::Source(_) => 0,
            NodeKind::Arith { rhs, .. } | NodeKind::Compare { rhs, .. } => {
                if rhs.is_some() {
                    1
                } else {
                    2
                }
            }
            NodeKind::Steer => 2,
            NodeKind::Copy | NodeKind::Inctag | NodeKind::Sink => 1,
        }
    }

    pub fn output_ports(&self) -> &'static [OutPort] {
        match self {
            NodeKind::Sink => &[],
            NodeKind::Steer => &[OutPort::True, OutPort::False],
            _ => &[OutPort::Out],
        }
    }

    pub fn is_operator(&self) -> bool {
        !matches!(self, NodeKind::Source(_) | NodeKind::Sink)
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            NodeKind::Source(_) => "source",
            NodeKind::Arith { op, .. } => op.name(),
            NodeKind::Compare { op, .. } => op.name(),
            NodeKind::Copy => "copy",
            NodeKind::Steer => "steer",
            NodeKind::Inctag => "inctag",
            NodeKind::Sink => "sink",
        }
    }
}

/// Producer-side port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutPort {
    Out,
    True,
    False,
}

impl OutPort {
    pub fn name(self) -> &'static str {
        match self {
            OutPort::Out => "out",
            OutPort::True => "true",
            OutPort::False => "false",
        }
    }
}

impl fmt::Display for OutPort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
}

/// A labeled edge from a producer port to a consumer input slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub label: Label,
    pub from: NodeId,
    pub port: OutPort,
    pub to: NodeId,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(NodeId),
    #[error("duplicate edge label `{0}`")]
    DuplicateLabel(Label),
}

/// A dynamic dataflow graph. Node ids and edge labels are unique by
/// construction; everything else is checked by [`validate_graph`].
///
/// [`validate_graph`]: super::validate_graph
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DataflowGraph {
    nodes: BTreeMap<NodeId, Node>,
    edges: BTreeMap<Label, Edge>,
}

impl DataflowGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: NodeId, kind: NodeKind) -> Result<(), GraphError> {
        if self.nodes.contains_key(&id) {
            return Err(GraphError::DuplicateNode(id));
        }
        self.nodes.insert(id.clone(), Node { id, kind });
        Ok(())
    }

    pub fn add_edge(&mut self, edge: Edge) -> Result<(), GraphError> {
        if self.edges.contains_key(&edge.label) {
            return Err(GraphError::DuplicateLabel(edge.label));
        }
        self.edges.insert(edge.label.clone(), edge);
        Ok(())
    }

    pub fn connect(
        &mut self,
        label: Label,
        from: &NodeId,
        port: OutPort,
        to: &NodeId,
        slot: usize,
    ) -> Result<(), GraphError> {
        self.add_edge(Edge {
            label,
            from: from.clone(),
            port,
            to: to.clone(),
            slot,
        })
    }

    pub fn remove_node(&mut self, id: &NodeId) -> Option<Node> {
        self.nodes.remove(id)
    }

    pub fn remove_edge(&mut self, label: &Label) -> Option<Edge> {
        self.edges.remove(label)
    }

    pub fn set_kind(&mut self, id: &NodeId, kind: NodeKind) {
        if let Some(node) = self.nodes.get_mut(id) {
            node.kind = kind;
        }
    }

    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn edge(&self, label: &Label) -> Option<&Edge> {
        self.edges.get(label)
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    /// Edges in label order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    /// Incoming labels of `id`, grouped by slot. Slots beyond the node's
    /// arity are included so validation can report them.
    pub fn inputs_of(&self, id: &NodeId) -> Vec<Vec<Label>> {
        let mut slots: Vec<Vec<Label>> = Vec::new();
        if let Some(node) = self.nodes.get(id) {
            slots.resize(node.kind.input_slots(), Vec::new());
        }
        for e in self.edges.values().filter(|e| &e.to == id) {
            if slots.len() <= e.slot {
                slots.resize(e.slot + 1, Vec::new());
            }
            slots[e.slot].push(e.label.clone());
        }
        slots
    }

    /// Destination labels of one producer port, in label order.
    pub fn outputs_of(&self, id: &NodeId, port: OutPort) -> Vec<Label> {
        self.edges
            .values()
            .filter(|e| &e.from == id && e.port == port)
            .map(|e| e.label.clone())
            .collect()
    }

    pub fn out_edges<'a>(&'a self, id: &'a NodeId) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.values().filter(move |e| &e.from == id)
    }

    pub fn in_edges<'a>(&'a self, id: &'a NodeId) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.values().filter(move |e| &e.to == id)
    }

    /// Labels that feed a Sink.
    pub fn sink_labels(&self) -> Vec<Label> {
        self.edges
            .values()
            .filter(|e| matches!(self.nodes.get(&e.to).map(|n| &n.kind), Some(NodeKind::Sink)))
            .map(|e| e.label.clone())
            .collect()
    }

    pub fn has_inctag(&self) -> bool {
        self.nodes.values().any(|n| n.kind == NodeKind::Inctag)
    }

    pub fn count_kind(&self, pred: impl Fn(&NodeKind) -> bool) -> usize {
        self.nodes.values().filter(|n| pred(&n.kind)).count()
    }
}

/// Structural equality up to node renaming, with edge labels held fixed.
///
/// Two graphs are isomorphic here when they have the same label set and the
/// bijection between node ids induced by shared labels preserves node kinds,
/// ports and slots. Isolated nodes (no edges) are matched by kind counts.
pub fn isomorphic(a: &DataflowGraph, b: &DataflowGraph) -> bool {
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let mut fwd: BTreeMap<&NodeId, &NodeId> = BTreeMap::new();
    let mut bwd: BTreeMap<&NodeId, &NodeId> = BTreeMap::new();
    for ea in a.edges() {
        let Some(eb) = b.edge(&ea.label) else {
            return false;
        };
        if ea.port != eb.port || ea.slot != eb.slot {
            return false;
        }
        for (x, y) in [(&ea.from, &eb.from), (&ea.to, &eb.to)] {
            match (fwd.get(x), bwd.get(y)) {
                (None, None) => {
                    fwd.insert(x, y);
                    bwd.insert(y, x);
                }
                (Some(&fy), Some(&bx)) if fy == y && bx == x => {}
                _ => return false,
            }
        }
    }
    for (x, y) in &fwd {
        if a.node(x).map(|n| &n.kind) != b.node(y).map(|n| &n.kind) {
            return false;
        }
    }
    // Isolated nodes.
    let mut rest_a: Vec<String> = a
        .nodes()
        .filter(|n| !fwd.contains_key(&n.id))
        .map(|n| format!("{:?}", n.kind))
        .collect();
    let mut rest_b: Vec<String> = b
        .nodes()
        .filter(|n| !bwd.contains_key(&n.id))
        .map(|n| format!("{:?}", n.kind))
        .collect();
    rest_a.sort();
    rest_b.sort();
    rest_a == rest_b
}
