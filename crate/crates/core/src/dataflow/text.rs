//! Line-oriented graph text format.
//!
//! ```text
//! # comment
//! node <id> source [value]
//! node <id> add|sub|mul|div [literal-rhs]
//! node <id> lt|gt|eq|ne|le|ge [literal-rhs]
//! node <id> copy|steer|inctag|sink
//! edge <label> <producer>[.out|.true|.false] <consumer>[.<slot>]
//! ```
//!
//! Operators may also be written as symbols (`+`, `<=`, ...). The producer
//! port defaults to `out` and the consumer slot to `0`. Steer inputs are slot
//! 0 (data) and slot 1 (control); an Inctag accepts any number of edges on
//! slot 0. Node lines and edge lines may be interleaved, but an edge must not
//! reuse a label and a node must not reuse an id.

use std::fmt::Write as _;

use thiserror::Error;

use super::graph::{ArithOp, CmpOp, DataflowGraph, Edge, GraphError, NodeKind, OutPort};
use super::validate::{validate_graph, Violation};
use crate::element::{Label, NodeId, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphTextError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid graph: {}", render_violations(.0))]
    Invalid(Vec<Violation>),
}

fn render_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

struct Word<'a> {
    text: &'a str,
    column: usize,
}

fn words(line: &str) -> Vec<Word<'_>> {
    let line = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Word {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Word {
            text: &line[s..],
            column: line[..s].chars().count() + 1,
        });
    }
    out
}

fn arith_op(s: &str) -> Option<ArithOp> {
    ArithOp::ALL
        .into_iter()
        .find(|op| op.name() == s || op.symbol() == s)
}

fn cmp_op(s: &str) -> Option<CmpOp> {
    CmpOp::ALL
        .into_iter()
        .find(|op| op.name() == s || op.symbol() == s)
}

/// Parses graph text and validates the result.
pub fn parse_graph_text(text: &str) -> Result<DataflowGraph, GraphTextError> {
    let g = parse_graph_unchecked(text)?;
    let violations = validate_graph(&g);
    if violations.is_empty() {
        Ok(g)
    } else {
        Err(GraphTextError::Invalid(violations))
    }
}

/// Parses graph text without running [`validate_graph`].
pub fn parse_graph_unchecked(text: &str) -> Result<DataflowGraph, GraphTextError> {
    let mut g = DataflowGraph::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let ws = words(line);
        let Some(first) = ws.first() else {
            continue;
        };
        let err = |w: &Word<'_>, message: String| GraphTextError::Syntax {
            line: line_no,
            column: w.column,
            message,
        };
        let end_col = line.split('#').next().unwrap_or("").trim_end().chars().count() + 1;
        let missing = |what: &str| GraphTextError::Syntax {
            line: line_no,
            column: end_col,
            message: format!("expected {what}"),
        };
        match first.text {
            "node" => {
                let id_w = ws.get(1).ok_or_else(|| missing("node id"))?;
                let id = NodeId::new(id_w.text).map_err(|e| err(id_w, e.to_string()))?;
                let kind_w = ws.get(2).ok_or_else(|| missing("node kind"))?;
                let arg = ws.get(3);
                if let Some(extra) = ws.get(4) {
                    return Err(err(extra, format!("unexpected `{}`", extra.text)));
                }
                let literal = |w: &Word<'_>| -> Result<Value, GraphTextError> {
                    w.text
                        .parse::<Value>()
                        .map_err(|_| err(w, format!("expected integer, found `{}`", w.text)))
                };
                let opt_literal = match arg {
                    Some(w) => Some(literal(w)?),
                    None => None,
                };
                let no_arg = |kind: NodeKind| -> Result<NodeKind, GraphTextError> {
                    match arg {
                        Some(w) => Err(err(
                            w,
                            format!("`{}` nodes take no argument", kind.short_name()),
                        )),
                        None => Ok(kind),
                    }
                };
                let kind = match kind_w.text {
                    "source" => NodeKind::Source(opt_literal),
                    "copy" => no_arg(NodeKind::Copy)?,
                    "steer" => no_arg(NodeKind::Steer)?,
                    "inctag" => no_arg(NodeKind::Inctag)?,
                    "sink" => no_arg(NodeKind::Sink)?,
                    other => {
                        if let Some(op) = arith_op(other) {
                            NodeKind::Arith {
                                op,
                                rhs: opt_literal,
                            }
                        } else if let Some(op) = cmp_op(other) {
                            NodeKind::Compare {
                                op,
                                rhs: opt_literal,
                            }
                        } else {
                            return Err(err(kind_w, format!("unknown node kind `{other}`")));
                        }
                    }
                };
                g.add_node(id, kind).map_err(|e| err(id_w, e.to_string()))?;
            }
            "edge" => {
                let label_w = ws.get(1).ok_or_else(|| missing("edge label"))?;
                let label = Label::new(label_w.text).map_err(|e| err(label_w, e.to_string()))?;
                let from_w = ws.get(2).ok_or_else(|| missing("producer endpoint"))?;
                let to_w = ws.get(3).ok_or_else(|| missing("consumer endpoint"))?;
                if let Some(extra) = ws.get(4) {
                    return Err(err(extra, format!("unexpected `{}`", extra.text)));
                }
                let (from, port) = match from_w.text.split_once('.') {
                    Some((id, p)) => {
                        let port = match p {
                            "out" => OutPort::Out,
                            "true" => OutPort::True,
                            "false" => OutPort::False,
                            _ => {
                                return Err(err(from_w, format!("unknown output port `{p}`")))
                            }
                        };
                        (id, port)
                    }
                    None => (from_w.text, OutPort::Out),
                };
                let (to, slot) = match to_w.text.split_once('.') {
                    Some((id, s)) => {
                        let slot = s
                            .parse::<usize>()
                            .map_err(|_| err(to_w, format!("expected input slot number, found `{s}`")))?;
                        (id, slot)
                    }
                    None => (to_w.text, 0),
                };
                let from = NodeId::new(from).map_err(|e| err(from_w, e.to_string()))?;
                let to = NodeId::new(to).map_err(|e| err(to_w, e.to_string()))?;
                g.add_edge(Edge {
                    label,
                    from,
                    port,
                    to,
                    slot,
                })
                .map_err(|e| match e {
                    GraphError::DuplicateLabel(l) => {
                        err(label_w, format!("duplicate edge label `{l}`"))
                    }
                    other => err(label_w, other.to_string()),
                })?;
            }
            other => return Err(err(first, format!("expected `node` or `edge`, found `{other}`"))),
        }
    }
    Ok(g)
}

fn kind_text(kind: &NodeKind) -> String {
    let with_arg = |name: &str, arg: &Option<Value>| match arg {
        Some(v) => format!("{name} {v}"),
        None => name.to_string(),
    };
    match kind {
        NodeKind::Source(v) => with_arg("source", v),
        NodeKind::Arith { op, rhs } => with_arg(op.name(), rhs),
        NodeKind::Compare { op, rhs } => with_arg(op.name(), rhs),
        other => other.short_name().to_string(),
    }
}

/// Canonical text: nodes sorted by id, then edges sorted by label, with the
/// default port and slot left implicit.
pub fn serialize_graph(g: &DataflowGraph) -> String {
    let mut out = String::new();
    for n in g.nodes() {
        let _ = writeln!(out, "node {} {}", n.id, kind_text(&n.kind));
    }
    for e in g.edges() {
        let from = match e.port {
            OutPort::Out => e.from.to_string(),
            p => format!("{}.{}", e.from, p),
        };
        let to = match e.slot {
            0 => e.to.to_string(),
            s => format!("{}.{}", e.to, s),
        };
        let _ = writeln!(out, "edge {} {} {}", e.label, from, to);
    }
    out
}
