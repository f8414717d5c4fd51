use std::collections::BTreeMap;

use super::{ConversionReport, ConvertError};
use crate::dataflow::{ArithOp, CmpOp, DataflowGraph, NodeKind, OutPort};
use crate::element::{Element, Label, NodeId, Value};
use crate::exec::{source_inputs, ExecError, ExecState};
use crate::gamma::{ByClause, Expr, LabelSlot, Pattern, Program, Reaction, TagSlot, Tuple, ValueSlot};

fn input_error(e: ExecError) -> ConvertError {
    match e {
        ExecError::InvalidGraph(v) => ConvertError::InvalidGraph(v),
        other => ConvertError::Inputs(other.to_string()),
    }
}

struct Shape {
    tag_slot: TagSlot,
    tag: Expr,
}

impl Shape {
    fn pattern(&self, i: usize, label: &Label) -> Pattern {
        Pattern {
            value: ValueSlot::Var(format!("id{}", i + 1)),
            label: LabelSlot::Lit(label.clone()),
            tag: self.tag_slot.clone(),
        }
    }

    fn tuple(&self, value: Expr, label: &Label) -> Tuple {
        Tuple::new(value, label.clone(), self.tag.clone())
    }
}

fn id(i: usize) -> Expr {
    Expr::Var(format!("id{i}"))
}

fn clause(outputs: Vec<Tuple>, guard: Option<Expr>) -> ByClause {
    ByClause { outputs, guard }
}

fn node_reaction(g: &DataflowGraph, node: &NodeId, kind: &NodeKind, s: &Shape) -> Option<Reaction> {
    let inputs = g.inputs_of(node);
    let single = |slot: usize| &inputs[slot][0];
    let outs = g.outputs_of(node, OutPort::Out);
    let emit = |value: &Expr| outs.iter().map(|l| s.tuple(value.clone(), l)).collect::<Vec<_>>();
    let two = || vec![s.pattern(0, single(0)), s.pattern(1, single(1))];
    let rhs_expr = |rhs: &Option<Value>| rhs.map_or_else(|| id(2), Expr::Int);
    let (replace, clauses) = match kind {
        NodeKind::Source(_) | NodeKind::Sink => return None,
        NodeKind::Arith { op, rhs } => {
            let replace = if rhs.is_some() { vec![s.pattern(0, single(0))] } else { two() };
            (replace, vec![clause(emit(&Expr::arith(*op, id(1), rhs_expr(rhs))), None)])
        }
        NodeKind::Copy => (vec![s.pattern(0, single(0))], vec![clause(emit(&id(1)), None)]),
        NodeKind::Compare { op, rhs } => {
            let replace = if rhs.is_some() { vec![s.pattern(0, single(0))] } else { two() };
            let cond = Expr::cmp(*op, id(1), rhs_expr(rhs));
            (
                replace,
                vec![clause(emit(&Expr::Int(1)), Some(cond)), clause(emit(&Expr::Int(0)), None)],
            )
        }
        NodeKind::Steer => {
            let port = |p: OutPort| {
                g.outputs_of(node, p)
                    .iter()
                    .map(|l| s.tuple(id(1), l))
                    .collect::<Vec<_>>()
            };
            let when = |k: Value| Some(Expr::cmp(CmpOp::Eq, id(2), Expr::Int(k)));
            (
                two(),
                vec![clause(port(OutPort::True), when(1)), clause(port(OutPort::False), when(0))],
            )
        }
        NodeKind::Inctag => {
            let alts = &inputs[0];
            let next_tag = Expr::arith(ArithOp::Add, s.tag.clone(), Expr::Int(1));
            let outputs = outs
                .iter()
                .map(|l| Tuple::new(id(1), l.clone(), next_tag.clone()))
                .collect();
            if alts.len() == 1 {
                (vec![s.pattern(0, &alts[0])], vec![clause(outputs, None)])
            } else {
                let pattern = Pattern {
                    value: ValueSlot::Var("id1".into()),
                    label: LabelSlot::Var("x".into()),
                    tag: s.tag_slot.clone(),
                };
                let guard = alts
                    .iter()
                    .map(|l| Expr::cmp(CmpOp::Eq, Expr::var("x"), Expr::Label(l.clone())))
                    .reduce(Expr::or)
                    .expect("validated inctag has an input");
                (vec![pattern], vec![clause(outputs, Some(guard))])
            }
        }
    };
    Some(Reaction {
        name: node.to_string(),
        replace,
        clauses,
    })
}

/// Converts a valid graph and its initial tokens into a Gamma program.
///
/// Every operator node becomes the reaction of the same name. Graphs
/// without an Inctag use tag 0 throughout; graphs with one use the tag
/// variable `v`. Sink input labels become the report's terminal labels.
pub fn dataflow_to_gamma(
    g: &DataflowGraph,
    inputs: &[Element],
) -> Result<(Program, ConversionReport), ConvertError> {
    ExecState::new(g, inputs).map_err(input_error)?;
    let shape = if g.has_inctag() {
        Shape {
            tag_slot: TagSlot::Var("v".into()),
            tag: Expr::var("v"),
        }
    } else {
        Shape {
            tag_slot: TagSlot::Lit(0),
            tag: Expr::Int(0),
        }
    };
    let mut report = ConversionReport::default();
    let mut reactions = Vec::new();
    for n in g.nodes() {
        let produced: Vec<Label> = g.out_edges(&n.id).map(|e| e.label.clone()).collect();
        if !produced.is_empty() {
            report.label_map.insert(n.id.clone(), produced);
        }
        if n.kind == NodeKind::Sink {
            report.terminal_labels.extend(g.inputs_of(&n.id).into_iter().flatten());
        }
        reactions.extend(node_reaction(g, &n.id, &n.kind, &shape));
    }
    let mut initial = inputs.to_vec();
    initial.sort();
    let counts = kind_counts(g);
    report.source_summary = format!("dataflow graph: {} nodes, {} edges ({counts})", g.node_count(), g.edge_count());
    report.target_summary = format!(
        "gamma program: {} reactions, {} initial elements",
        reactions.len(),
        initial.len()
    );
    Ok((Program { reactions, initial }, report))
}

/// [`dataflow_to_gamma`] with Source values resolved as in
/// [`source_inputs`].
pub fn dataflow_to_gamma_with(
    g: &DataflowGraph,
    assignments: &[(String, Value)],
) -> Result<(Program, ConversionReport), ConvertError> {
    let inputs = source_inputs(g, assignments).map_err(input_error)?;
    dataflow_to_gamma(g, &inputs)
}

pub(crate) fn kind_counts(g: &DataflowGraph) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for n in g.nodes() {
        *counts.entry(n.kind.short_name()).or_insert(0) += 1;
    }
    counts
        .iter()
        .map(|(k, n)| format!("{n} {k}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::{elem, label};
    use crate::fixtures;
    use crate::gamma::{alpha_equivalent, print_program};

    #[test]
    fn example1_matches_fixture_program() {
        let g = fixtures::example1_graph();
        let (p, report) = dataflow_to_gamma_with(&g, &[]).unwrap();
        assert_eq!(print_program(&p), print_program(&fixtures::example1_program()));
        assert_eq!(report.terminal_labels.iter().collect::<Vec<_>>(), [&label("m")]);
        assert!(report.label_map_is_injective());
    }

    #[test]
    fn example2_reaction_shapes() {
        let g = fixtures::example2_graph();
        let (p, report) = dataflow_to_gamma_with(&g, &fixtures::example2_inputs(4, 3, 2)).unwrap();
        let reference = fixtures::example2_program();
        assert_eq!(p.reactions.len(), 9);
        // Inctag, compare, arithmetic reactions coincide with the fixture program.
        for name in ["R11", "R12", "R13", "R14", "R18", "R19"] {
            let (a, b) = (p.reaction(name).unwrap(), reference.reaction(name).unwrap());
            assert!(alpha_equivalent(a, b), "{name}:\n{a}\n{b}");
        }
        assert_eq!(p.initial, [elem(2, "C1", 0), elem(3, "B1", 0), elem(4, "A1", 0)]);
        assert_eq!(report.terminal_labels.len(), 1);
    }

    #[test]
    fn steer_clauses() {
        let g = fixtures::example2_graph();
        let (p, _) = dataflow_to_gamma_with(&g, &[]).unwrap();
        let r17 = p.reaction("R17").unwrap().to_string();
        assert_eq!(
            r17,
            "R17 = replace [id1, 'C12', v], [id2, 'B16', v]\n    by [id1, 'C13', v]\n    if id2 == 1\n    by [id1, 'C14', v]\n    if id2 == 0\n"
        );
        let r16 = p.reaction("R16").unwrap();
        assert!(r16.clauses[1].is_null());
    }

    #[test]
    fn source_to_sink() {
        let g = crate::dataflow::parse_graph_text("node s source 9\nnode t sink\nedge L s t").unwrap();
        let (p, report) = dataflow_to_gamma_with(&g, &[]).unwrap();
        assert!(p.reactions.is_empty());
        assert_eq!(p.initial, [elem(9, "L", 0)]);
        assert!(report.terminal_labels.contains(&label("L")));
    }

    #[test]
    fn missing_source_value() {
        let g = crate::dataflow::parse_graph_text("node s source\nnode t sink\nedge L s t").unwrap();
        assert!(matches!(dataflow_to_gamma_with(&g, &[]), Err(ConvertError::Inputs(_))));
        assert!(matches!(dataflow_to_gamma(&g, &[]), Err(ConvertError::Inputs(_))));
    }
}
