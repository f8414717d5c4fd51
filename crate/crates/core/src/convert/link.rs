use std::collections::{BTreeMap, BTreeSet};

use super::to_gamma::kind_counts;
use super::{gamma_reaction_to_dataflow, ConversionReport, ConvertError};
use crate::dataflow::{validate_graph, DataflowGraph, Edge, NodeKind, OutPort};
use crate::element::{Label, NodeId};
use crate::gamma::{LabelSlot, Program};

fn fresh_label(g: &DataflowGraph, base: &Label, suffix: &str) -> Label {
    let mut k = 0;
    loop {
        let text = if k == 0 { format!("{base}_{suffix}") } else { format!("{base}_{suffix}{k}") };
        let l = Label::new(text).expect("identifier characters");
        if g.edge(&l).is_none() {
            return l;
        }
        k += 1;
    }
}

fn fresh_node(g: &DataflowGraph, base: &str) -> NodeId {
    (0..)
        .map(|k| NodeId::new(if k == 0 { base.to_string() } else { format!("{base}{k}") }).expect("identifier characters"))
        .find(|id| g.node(id).is_none())
        .expect("unbounded range")
}

/// Builds one graph for a whole program: every reaction is converted on its
/// own, then each Sink producing label `L` is spliced onto the Source
/// consuming `L` when both are unique. Sources left over take their value
/// from the initial multiset.
pub fn link_reaction_graphs(p: &Program) -> Result<(DataflowGraph, ConversionReport), ConvertError> {
    let mut g = DataflowGraph::new();
    let mut report = ConversionReport::default();
    // Gamma label carried by every edge.
    let mut origin: BTreeMap<Label, Label> = BTreeMap::new();
    let mut producers: BTreeMap<Label, Vec<NodeId>> = BTreeMap::new();
    let mut consumers: BTreeMap<Label, Vec<NodeId>> = BTreeMap::new();
    let mut slot_label: BTreeMap<NodeId, Label> = BTreeMap::new();

    for r in &p.reactions {
        let (rg, rr) = gamma_reaction_to_dataflow(r)?;
        for n in rg.nodes() {
            g.add_node(n.id.clone(), n.kind.clone()).map_err(|e| ConvertError::Unsupported {
                reaction: r.name.clone(),
                message: e.to_string(),
            })?;
        }
        for e in rg.edges() {
            let gamma_label = rr.origin(&e.label).clone();
            let label = if g.edge(&e.label).is_some() {
                fresh_label(&g, &e.label, &r.name)
            } else {
                e.label.clone()
            };
            origin.insert(label.clone(), gamma_label.clone());
            if rr.terminal_labels.contains(&e.label) {
                producers.entry(gamma_label).or_default().push(e.to.clone());
            }
            g.add_edge(Edge { label, ..e.clone() }).expect("label made fresh");
        }
        for slot in &rr.slots {
            for (n, l) in &slot.nodes {
                if let Some(l) = l {
                    consumers.entry(l.clone()).or_default().push(n.clone());
                    slot_label.insert(n.clone(), l.clone());
                }
            }
        }
        report.warnings.extend(rr.warnings.iter().map(|w| format!("{}: {w}", r.name)));
    }

    for (l, sinks) in &producers {
        let Some(sources) = consumers.get(l) else { continue };
        if sinks.len() != 1 || sources.len() != 1 {
            report.warnings.push(format!(
                "label {l} has {} producers and {} consumers; left unlinked",
                sinks.len(),
                sources.len()
            ));
            continue;
        }
        let (sink, source) = (&sinks[0], &sources[0]);
        let feed = g.in_edges(sink).next().expect("sink has an input").clone();
        g.remove_edge(&feed.label);
        g.remove_node(sink);
        let outs: Vec<Edge> = g.out_edges(source).cloned().collect();
        for e in outs {
            g.remove_edge(&e.label);
            let label = if origin.get(&e.label) == Some(l) && g.edge(l).is_none() {
                origin.insert(l.clone(), l.clone());
                l.clone()
            } else {
                e.label.clone()
            };
            g.add_edge(Edge {
                label,
                from: feed.from.clone(),
                port: feed.port,
                ..e
            })
            .expect("label is free");
        }
        g.remove_node(source);
    }

    let open: Vec<NodeId> = g
        .nodes()
        .filter(|n| n.kind == NodeKind::Source(None))
        .map(|n| n.id.clone())
        .collect();
    for n in open {
        let Some(l) = slot_label.get(&n) else {
            report.warnings.push(format!("source {n} has no fixed label and no initial value"));
            continue;
        };
        let mut found = p.initial.iter().filter(|e| e.label == *l && e.tag == 0);
        match (found.next(), found.next()) {
            (Some(e), None) => g.set_kind(&n, NodeKind::Source(Some(e.value))),
            (Some(e), Some(_)) => {
                report.warnings.push(format!("label {l} has several initial elements; source {n} takes {}", e.value));
                g.set_kind(&n, NodeKind::Source(Some(e.value)));
            }
            (None, _) => {}
        }
    }

    // Initial elements no reaction can consume stay in the multiset; each
    // becomes a Source wired straight to a Sink.
    let any_label_var = p
        .reactions
        .iter()
        .flat_map(|r| &r.replace)
        .any(|pat| matches!(pat.label, LabelSlot::Var(_)));
    let mut passive: Vec<NodeId> = Vec::new();
    if !any_label_var {
        let consumed: BTreeSet<&Label> = p
            .reactions
            .iter()
            .flat_map(|r| &r.replace)
            .filter_map(|pat| match &pat.label {
                LabelSlot::Lit(l) => Some(l),
                LabelSlot::Var(_) => None,
            })
            .collect();
        for e in p.initial.iter().filter(|e| !consumed.contains(&e.label)) {
            let src = fresh_node(&g, &format!("{}_src", e.label));
            g.add_node(src.clone(), NodeKind::Source(Some(e.value))).expect("fresh id");
            let sink = fresh_node(&g, &format!("{}_sink", e.label));
            g.add_node(sink.clone(), NodeKind::Sink).expect("fresh id");
            let label = if g.edge(&e.label).is_none() { e.label.clone() } else { fresh_label(&g, &e.label, "init") };
            origin.insert(label.clone(), e.label.clone());
            g.connect(label, &src, OutPort::Out, &sink, 0).expect("fresh label");
            passive.push(sink);
        }
    }

    let violations = validate_graph(&g);
    if !violations.is_empty() {
        return Err(ConvertError::InvalidGraph(violations));
    }
    for e in g.edges() {
        if producers.values().flatten().chain(&passive).any(|n| *n == e.to) {
            report.terminal_labels.insert(e.label.clone());
        }
        match origin.get(&e.label) {
            Some(o) if *o != e.label => {
                report.label_origin.insert(e.label.clone(), o.clone());
            }
            _ => {}
        }
    }
    for n in g.nodes() {
        let produced: Vec<Label> = g.out_edges(&n.id).map(|e| e.label.clone()).collect();
        if !produced.is_empty() {
            report.label_map.insert(n.id.clone(), produced);
        }
    }
    report.source_summary = format!("gamma program: {} reactions", p.reactions.len());
    report.target_summary = format!("dataflow graph: {} nodes, {} edges ({})", g.node_count(), g.edge_count(), kind_counts(&g));
    Ok((g, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::isomorphic;
    use crate::element::label;
    use crate::exec::{run, source_inputs};
    use crate::fixtures;

    #[test]
    fn example1_relinks_to_fixture_graph() {
        let (g, report) = link_reaction_graphs(&fixtures::example1_program()).unwrap();
        assert!(isomorphic(&g, &fixtures::example1_graph()));
        assert_eq!(report.terminal_labels.iter().collect::<Vec<_>>(), [&label("m")]);
    }

    #[test]
    fn example2_program_relinks_to_a_loop() {
        let (g, _) = link_reaction_graphs(&fixtures::example2_program()).unwrap();
        assert_eq!(g.count_kind(|k| *k == NodeKind::Inctag), 3);
        assert_eq!(g.count_kind(|k| *k == NodeKind::Steer), 3);
        // The fixture program discards x on exit, so nothing reaches a sink.
        let out = run(&g, &source_inputs(&g, &[]).unwrap(), 5, 10_000).unwrap();
        assert!(out.state.sinks().values().all(Vec::is_empty));
        assert!(out.state.store().is_empty());
    }
}
