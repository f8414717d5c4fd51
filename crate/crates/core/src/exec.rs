//! Tagged-token execution of a [`DataflowGraph`].
//!
//! A node is enabled at tag `t` once every input slot holds a token at `t`;
//! an Inctag needs a token on any one of its alternative labels. The
//! scheduler picks one enabled `(node, tag)` pair uniformly with a seeded
//! PRNG and fires it, until nothing is enabled or the step budget runs out.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataflow::{validate_graph, DataflowGraph, NodeKind, OutPort, Violation};
use crate::element::{Element, Label, NodeId, Tag, Value};

pub const DEFAULT_MAX_STEPS: u64 = 100_000;

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    /// Nothing left to fire.
    Terminated,
    /// The step budget ran out while work was still enabled.
    BudgetExhausted,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Terminated => "terminated",
            RunStatus::BudgetExhausted => "budget-exhausted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("invalid graph: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidGraph(Vec<Violation>),
    #[error("invalid inputs: {0}")]
    Inputs(String),
    #[error("node `{node}` is not enabled at tag {tag}")]
    NotEnabled { node: NodeId, tag: Tag },
    #[error("division by zero at node `{node}`, tag {tag}")]
    DivisionByZero { node: NodeId, tag: Tag },
    #[error("arithmetic overflow at node `{node}`, tag {tag}")]
    Overflow { node: NodeId, tag: Tag },
    #[error("steer `{node}` received control value {value} at tag {tag}; expected 0 or 1")]
    InvalidControl { node: NodeId, tag: Tag, value: Value },
    #[error("node `{node}` produced a second token on `{label}` at tag {tag}")]
    TokenCollision { node: NodeId, label: Label, tag: Tag },
    #[error("tag overflow at node `{node}`")]
    TagOverflow { node: NodeId },
    #[error("state space exceeds bound of {0} states")]
    BoundExceeded(usize),
}

/// Live tokens, at most one per `(label, tag)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenStore {
    tokens: BTreeMap<(Label, Tag), Value>,
}

impl TokenStore {
    pub fn get(&self, label: &Label, tag: Tag) -> Option<Value> {
        self.tokens.get(&(label.clone(), tag)).copied()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        self.tokens
            .iter()
            .map(|((label, tag), v)| Element::new(*v, label.clone(), *tag))
    }

    fn insert(&mut self, label: Label, tag: Tag, value: Value) -> bool {
        use std::collections::btree_map::Entry;
        match self.tokens.entry((label, tag)) {
            Entry::Occupied(_) => false,
            Entry::Vacant(v) => {
                v.insert(value);
                true
            }
        }
    }

    fn take(&mut self, label: &Label, tag: Tag) -> Option<Value> {
        self.tokens.remove(&(label.clone(), tag))
    }
}

#[derive(Debug)]
struct NodeWiring {
    kind: NodeKind,
    inputs: Vec<Vec<Label>>,
    outputs: BTreeMap<OutPort, Vec<Label>>,
}

/// Per-node port tables derived once from the graph.
#[derive(Debug)]
struct Wiring {
    nodes: BTreeMap<NodeId, NodeWiring>,
    consumer: BTreeMap<Label, NodeId>,
}

impl Wiring {
    fn new(g: &DataflowGraph) -> Self {
        let mut nodes = BTreeMap::new();
        for n in g.nodes() {
            let outputs = n
                .kind
                .output_ports()
                .iter()
                .map(|&p| (p, g.outputs_of(&n.id, p)))
                .collect();
            nodes.insert(
                n.id.clone(),
                NodeWiring {
                    kind: n.kind.clone(),
                    inputs: g.inputs_of(&n.id),
                    outputs,
                },
            );
        }
        let consumer = g.edges().map(|e| (e.label.clone(), e.to.clone())).collect();
        Wiring { nodes, consumer }
    }
}

/// One firing of the trace.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Firing {
    pub node: NodeId,
    pub tag: Tag,
}

/// Firings in the order they happened.
pub type ExecTrace = Vec<Firing>;

/// Execution state of one run.
#[derive(Debug, Clone)]
pub struct ExecState<'g> {
    graph: &'g DataflowGraph,
    wiring: Arc<Wiring>,
    store: TokenStore,
    sinks: BTreeMap<Label, Vec<Element>>,
    steps: u64,
}

impl<'g> ExecState<'g> {
    /// Builds a state with `inputs` placed on Source output edges.
    ///
    /// Every Source output edge must receive exactly one token, at tag 0.
    pub fn new(graph: &'g DataflowGraph, inputs: &[Element]) -> Result<Self, ExecError> {
        let violations = validate_graph(graph);
        if !violations.is_empty() {
            return Err(ExecError::InvalidGraph(violations));
        }
        let mut expected: BTreeSet<&Label> = BTreeSet::new();
        for n in graph.nodes().filter(|n| matches!(n.kind, NodeKind::Source(_))) {
            for e in graph.out_edges(&n.id) {
                expected.insert(&e.label);
            }
        }
        let mut store = TokenStore::default();
        for el in inputs {
            if !expected.contains(&el.label) {
                return Err(ExecError::Inputs(format!(
                    "`{}` is not an output edge of a source",
                    el.label
                )));
            }
            if el.tag != 0 {
                return Err(ExecError::Inputs(format!(
                    "initial token on `{}` has tag {}; initial tokens carry tag 0",
                    el.label, el.tag
                )));
            }
            if !store.insert(el.label.clone(), 0, el.value) {
                return Err(ExecError::Inputs(format!("two initial tokens on `{}`", el.label)));
            }
        }
        if let Some(missing) = expected.iter().find(|l| store.get(l, 0).is_none()) {
            return Err(ExecError::Inputs(format!("no initial token on `{missing}`")));
        }
        Ok(ExecState {
            graph,
            wiring: Arc::new(Wiring::new(graph)),
            store,
            sinks: BTreeMap::new(),
            steps: 0,
        })
    }

    pub fn graph(&self) -> &'g DataflowGraph {
        self.graph
    }

    pub fn store(&self) -> &TokenStore {
        &self.store
    }

    /// Tokens delivered to each Sink, keyed by the sink's input label, in
    /// arrival order.
    pub fn sinks(&self) -> &BTreeMap<Label, Vec<Element>> {
        &self.sinks
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn slot_ready(&self, labels: &[Label], tag: Tag) -> bool {
        labels.iter().any(|l| self.store.get(l, tag).is_some())
    }

    fn is_enabled(&self, node: &NodeId, tag: Tag) -> bool {
        let Some(w) = self.wiring.nodes.get(node) else {
            return false;
        };
        if matches!(w.kind, NodeKind::Source(_)) {
            return false;
        }
        w.inputs.iter().all(|slot| self.slot_ready(slot, tag))
    }

    /// Every `(node, tag)` pair whose inputs are all present at that tag.
    pub fn enabled_set(&self) -> BTreeSet<(NodeId, Tag)> {
        let mut out = BTreeSet::new();
        for (label, tag) in self.store.tokens.keys() {
            if let Some(node) = self.wiring.consumer.get(label) {
                if self.is_enabled(node, *tag) {
                    out.insert((node.clone(), *tag));
                }
            }
        }
        out
    }

    fn take_slot(&mut self, labels: &[Label], tag: Tag) -> Value {
        labels
            .iter()
            .find_map(|l| self.store.take(l, tag))
            .expect("slot checked ready")
    }

    fn emit(&mut self, node: &NodeId, labels: &[Label], tag: Tag, value: Value) -> Result<(), ExecError> {
        for l in labels {
            if !self.store.insert(l.clone(), tag, value) {
                return Err(ExecError::TokenCollision {
                    node: node.clone(),
                    label: l.clone(),
                    tag,
                });
            }
        }
        Ok(())
    }

    /// Fires `node` at `tag`, consuming its inputs and producing its outputs.
    pub fn fire(&mut self, node: &NodeId, tag: Tag) -> Result<(), ExecError> {
        if !self.is_enabled(node, tag) {
            return Err(ExecError::NotEnabled {
                node: node.clone(),
                tag,
            });
        }
        let wiring = Arc::clone(&self.wiring);
        let w = &wiring.nodes[node];
        let args: Vec<Value> = w.inputs.iter().map(|slot| self.take_slot(slot, tag)).collect();
        let out = |p: OutPort| w.outputs.get(&p).map(Vec::as_slice).unwrap_or(&[]);
        match &w.kind {
            NodeKind::Source(_) => unreachable!("sources are never enabled"),
            NodeKind::Arith { op, rhs } => {
                let rhs = rhs.unwrap_or_else(|| args[1]);
                let value = op.apply(args[0], rhs).ok_or_else(|| {
                    if rhs == 0 && *op == crate::dataflow::ArithOp::Div {
                        ExecError::DivisionByZero {
                            node: node.clone(),
                            tag,
                        }
                    } else {
                        ExecError::Overflow {
                            node: node.clone(),
                            tag,
                        }
                    }
                })?;
                self.emit(node, out(OutPort::Out), tag, value)?;
            }
            NodeKind::Compare { op, rhs } => {
                let rhs = rhs.unwrap_or_else(|| args[1]);
                let value = Value::from(op.holds(args[0], rhs));
                self.emit(node, out(OutPort::Out), tag, value)?;
            }
            NodeKind::Copy => self.emit(node, out(OutPort::Out), tag, args[0])?,
            NodeKind::Steer => {
                let port = match args[1] {
                    1 => OutPort::True,
                    0 => OutPort::False,
                    value => {
                        return Err(ExecError::InvalidControl {
                            node: node.clone(),
                            tag,
                            value,
                        })
                    }
                };
                self.emit(node, out(port), tag, args[0])?;
            }
            NodeKind::Inctag => {
                let next = tag.checked_add(1).ok_or_else(|| ExecError::TagOverflow {
                    node: node.clone(),
                })?;
                self.emit(node, out(OutPort::Out), next, args[0])?;
            }
            NodeKind::Sink => {
                let label = w.inputs[0][0].clone();
                self.sinks
                    .entry(label.clone())
                    .or_default()
                    .push(Element::new(args[0], label, tag));
            }
        }
        self.steps += 1;
        Ok(())
    }

    /// Sink contents with arrival order erased.
    fn sorted_sinks(&self) -> BTreeMap<Label, Vec<Element>> {
        self.sinks
            .iter()
            .map(|(l, v)| {
                let mut v = v.clone();
                v.sort();
                (l.clone(), v)
            })
            .collect()
    }
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutcome<'g> {
    pub state: ExecState<'g>,
    pub trace: ExecTrace,
    pub status: RunStatus,
}

/// Runs `g` from `inputs` until quiescence or `max_steps` firings.
pub fn run<'g>(
    g: &'g DataflowGraph,
    inputs: &[Element],
    seed: u64,
    max_steps: u64,
) -> Result<RunOutcome<'g>, ExecError> {
    let mut state = ExecState::new(g, inputs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Vec::new();
    let status = loop {
        let enabled = state.enabled_set();
        if enabled.is_empty() {
            break RunStatus::Terminated;
        }
        if state.steps >= max_steps {
            break RunStatus::BudgetExhausted;
        }
        let pick = rng.gen_range(0..enabled.len());
        let (node, tag) = enabled.into_iter().nth(pick).expect("index in range");
        state.fire(&node, tag)?;
        trace.push(Firing { node, tag });
    };
    Ok(RunOutcome {
        state,
        trace,
        status,
    })
}

/// Builds the initial token list for `g`.
///
/// Each Source output edge takes its value from `assignments` keyed by the
/// edge label, else keyed by the source node id, else from the source's own
/// value. Unknown keys and sources left without a value are errors.
pub fn source_inputs(
    g: &DataflowGraph,
    assignments: &[(String, Value)],
) -> Result<Vec<Element>, ExecError> {
    let lookup: BTreeMap<&str, Value> = assignments.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let mut used: BTreeSet<&str> = BTreeSet::new();
    let mut out = Vec::new();
    for n in g.nodes() {
        let NodeKind::Source(default) = n.kind else {
            continue;
        };
        for e in g.out_edges(&n.id) {
            let value = if let Some((k, v)) = lookup.get_key_value(e.label.as_str()) {
                used.insert(k);
                *v
            } else if let Some((k, v)) = lookup.get_key_value(n.id.as_str()) {
                used.insert(k);
                *v
            } else if let Some(v) = default {
                v
            } else {
                return Err(ExecError::Inputs(format!(
                    "source `{}` has no value for `{}`",
                    n.id, e.label
                )));
            };
            out.push(Element::new(value, e.label.clone(), 0));
        }
    }
    if let Some(k) = lookup.keys().find(|k| !used.contains(*k)) {
        return Err(ExecError::Inputs(format!(
            "`{k}` is neither a source node nor a source output label"
        )));
    }
    Ok(out)
}

/// Terminal sink contents (arrival order erased) of one schedule.
pub type SinkMap = BTreeMap<Label, Vec<Element>>;

/// Enumerates every firing interleaving of `g` from `inputs` and returns the
/// distinct terminal sink maps. Visits at most `bound` distinct states.
pub fn explore_terminals(
    g: &DataflowGraph,
    inputs: &[Element],
    bound: usize,
) -> Result<BTreeSet<SinkMap>, ExecError> {
    let init = ExecState::new(g, inputs)?;
    let mut seen: HashSet<(TokenStore, SinkMap)> = HashSet::new();
    let mut terminals = BTreeSet::new();
    let mut stack = vec![init];
    while let Some(state) = stack.pop() {
        let key = (state.store.clone(), state.sorted_sinks());
        if !seen.insert(key) {
            continue;
        }
        if seen.len() > bound {
            return Err(ExecError::BoundExceeded(bound));
        }
        let enabled = state.enabled_set();
        if enabled.is_empty() {
            terminals.insert(state.sorted_sinks());
            continue;
        }
        for (node, tag) in enabled {
            let mut next = state.clone();
            next.fire(&node, tag)?;
            stack.push(next);
        }
    }
    Ok(terminals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::parse_graph_text;
    use crate::element::{elem, label};

    fn nid(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    const STEER: &str = "node d source\nnode c source\nnode st steer\nnode t sink\nnode f sink\n\
                         edge D d st\nedge C c st.1\nedge T st.true t\nedge F st.false f\n";

    #[test]
    fn steer_false_silences_true_port() {
        let g = parse_graph_text(STEER).unwrap();
        let mut s = ExecState::new(&g, &[elem(9, "D", 0), elem(0, "C", 0)]).unwrap();
        s.fire(&nid("st"), 0).unwrap();
        assert_eq!(s.store().get(&label("T"), 0), None);
        assert_eq!(s.store().get(&label("F"), 0), Some(9));
        assert_eq!(s.store().get(&label("D"), 0), None);
    }

    #[test]
    fn steer_rejects_non_boolean_control() {
        let g = parse_graph_text(STEER).unwrap();
        let mut s = ExecState::new(&g, &[elem(9, "D", 0), elem(2, "C", 0)]).unwrap();
        assert!(matches!(
            s.fire(&nid("st"), 0),
            Err(ExecError::InvalidControl { value: 2, .. })
        ));
    }

    #[test]
    fn inctag_forwards_at_next_tag() {
        let g = parse_graph_text(
            "node a source\nnode i inctag\nnode s sink\nedge A1 a i\nedge A12 i s\n",
        )
        .unwrap();
        let mut s = ExecState::new(&g, &[elem(7, "A1", 0)]).unwrap();
        s.fire(&nid("i"), 0).unwrap();
        assert_eq!(s.store().elements().collect::<Vec<_>>(), vec![elem(7, "A12", 1)]);
    }

    #[test]
    fn division_by_zero_faults_with_position() {
        let g = parse_graph_text(
            "node a source 1\nnode b source 0\nnode q div\nnode s sink\n\
             edge A a q\nedge B b q.1\nedge Q q s\n",
        )
        .unwrap();
        let inputs = source_inputs(&g, &[]).unwrap();
        let err = run(&g, &inputs, 0, 10).unwrap_err();
        assert_eq!(err, ExecError::DivisionByZero { node: nid("q"), tag: 0 });
    }

    #[test]
    fn division_truncates_toward_zero() {
        let g = parse_graph_text(
            "node a source -7\nnode q div 2\nnode s sink\nedge A a q\nedge Q q s\n",
        )
        .unwrap();
        let out = run(&g, &source_inputs(&g, &[]).unwrap(), 0, 10).unwrap();
        assert_eq!(out.state.sinks()[&label("Q")], vec![elem(-3, "Q", 0)]);
    }

    #[test]
    fn input_checks() {
        let g = parse_graph_text("node a source\nnode s sink\nedge A a s\n").unwrap();
        assert!(matches!(ExecState::new(&g, &[]), Err(ExecError::Inputs(_))));
        assert!(matches!(
            ExecState::new(&g, &[elem(1, "A", 1)]),
            Err(ExecError::Inputs(_))
        ));
        assert!(matches!(
            ExecState::new(&g, &[elem(1, "A", 0), elem(2, "A", 0)]),
            Err(ExecError::Inputs(_))
        ));
        assert!(matches!(
            source_inputs(&g, &[("nope".into(), 1)]),
            Err(ExecError::Inputs(_))
        ));
        assert_eq!(source_inputs(&g, &[("a".into(), 4)]).unwrap(), vec![elem(4, "A", 0)]);
    }

    #[test]
    fn zero_budget() {
        let g = parse_graph_text("node a source 1\nnode s sink\nedge A a s\n").unwrap();
        let out = run(&g, &source_inputs(&g, &[]).unwrap(), 0, 0).unwrap();
        assert_eq!(out.status, RunStatus::BudgetExhausted);
        assert_eq!(out.state.steps(), 0);

        let empty = DataflowGraph::new();
        let out = run(&empty, &[], 0, 0).unwrap();
        assert_eq!(out.status, RunStatus::Terminated);
    }

    #[test]
    fn collision_is_a_fault() {
        // A and Y both reach the inctag at tag 0, so it fires twice onto (X, 1).
        let g = parse_graph_text(
            "node a source 1\nnode b source 2\nnode i inctag\nnode j copy\nnode s sink\n\
             edge A a i\nedge B b j\nedge X i s\nedge Y j i\n",
        )
        .unwrap();
        let mut s = ExecState::new(&g, &source_inputs(&g, &[]).unwrap()).unwrap();
        s.fire(&nid("j"), 0).unwrap();
        s.fire(&nid("i"), 0).unwrap();
        assert!(matches!(
            s.fire(&nid("i"), 0),
            Err(ExecError::TokenCollision { .. })
        ));
    }
}
