use std::collections::BTreeSet;

use super::{ConversionReport, SourceSlot};
use crate::dataflow::{DataflowGraph, Edge, NodeKind};
use crate::element::{Element, Label, NodeId};
use crate::multiset::Multiset;

/// Result of [`instantiate_for_multiset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instantiation {
    pub graph: DataflowGraph,
    pub instances: usize,
    /// Elements assigned to each instance, in slot order.
    pub assignments: Vec<Vec<Element>>,
    /// Elements no instance received.
    pub leftovers: Vec<Element>,
}

fn accepts(slot: &SourceSlot, e: &Element) -> bool {
    slot.value.is_none_or(|v| v == e.value) && slot.node_for(&e.label).is_some()
}

/// Fills every slot from `pool` in canonical order; all picks share a tag.
fn pick(slots: &[SourceSlot], pool: &mut Vec<Element>) -> Option<Vec<Element>> {
    let tags: BTreeSet<_> = pool.iter().map(|e| e.tag).collect();
    for tag in tags {
        let mut taken = BTreeSet::new();
        let mut chosen = Vec::new();
        for slot in slots {
            let found = pool
                .iter()
                .enumerate()
                .find(|(i, e)| e.tag == tag && !taken.contains(i) && accepts(slot, e));
            match found {
                Some((i, e)) => {
                    taken.insert(i);
                    chosen.push(e.clone());
                }
                None => break,
            }
        }
        if chosen.len() == slots.len() {
            let mut i = 0;
            pool.retain(|_| {
                i += 1;
                !taken.contains(&(i - 1))
            });
            return Some(chosen);
        }
    }
    None
}

fn renamed_node(k: usize, id: &NodeId) -> NodeId {
    NodeId::new(format!("i{k}_{id}")).expect("identifier characters")
}

fn renamed_label(k: usize, l: &Label) -> Label {
    Label::new(format!("i{k}_{l}")).expect("identifier characters")
}

/// Replicates a per-reaction graph once per group of elements of `m` that
/// fills all of its Source slots.
///
/// Elements are assigned greedily in canonical order, in a single pass; an
/// instance's Sources carry the assigned values. Node ids and labels of
/// instance `k` are prefixed with `i<k>_`. Alternative Sources that receive
/// nothing are dropped from their instance.
pub fn instantiate_for_multiset(g: &DataflowGraph, report: &ConversionReport, m: &Multiset) -> Instantiation {
    let slots = &report.slots;
    let mut pool = m.to_vec();
    let mut assignments = Vec::new();
    if !slots.is_empty() {
        while let Some(chosen) = pick(slots, &mut pool) {
            assignments.push(chosen);
        }
    }
    let mut out = DataflowGraph::new();
    for (k, chosen) in assignments.iter().enumerate() {
        let k = k + 1;
        let mut value_of = std::collections::BTreeMap::new();
        let mut unused = BTreeSet::new();
        for (slot, e) in slots.iter().zip(chosen) {
            let target = slot.node_for(&e.label).expect("accepted").clone();
            for (n, _) in &slot.nodes {
                if *n != target {
                    unused.insert(n.clone());
                }
            }
            value_of.insert(target, e.value);
        }
        for n in g.nodes().filter(|n| !unused.contains(&n.id)) {
            let kind = match (&n.kind, value_of.get(&n.id)) {
                (NodeKind::Source(_), Some(v)) => NodeKind::Source(Some(*v)),
                (kind, _) => kind.clone(),
            };
            out.add_node(renamed_node(k, &n.id), kind).expect("prefixed ids are fresh");
        }
        for e in g.edges().filter(|e| !unused.contains(&e.from)) {
            out.add_edge(Edge {
                label: renamed_label(k, &e.label),
                from: renamed_node(k, &e.from),
                port: e.port,
                to: renamed_node(k, &e.to),
                slot: e.slot,
            })
            .expect("prefixed labels are fresh");
        }
    }
    Instantiation {
        graph: out,
        instances: assignments.len(),
        assignments,
        leftovers: pool,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convert::gamma_reaction_to_dataflow;
    use crate::dataflow::validate_graph;
    use crate::element::elem;
    use crate::fixtures;
    use crate::gamma::parse_reaction;

    fn ms(vals: &[i64], label: &str) -> Multiset {
        vals.iter().map(|&v| elem(v, label, 0)).collect()
    }

    #[test]
    fn six_elements_three_instances() {
        let r = &fixtures::min_program().reactions[0];
        let (g, report) = gamma_reaction_to_dataflow(r).unwrap();
        let inst = instantiate_for_multiset(&g, &report, &ms(&[1, 2, 3, 4, 5, 6], "e"));
        assert_eq!(inst.instances, 3);
        assert!(inst.leftovers.is_empty());
        assert_eq!(inst.graph.node_count(), 3 * g.node_count());
        assert!(validate_graph(&inst.graph).is_empty());
    }

    #[test]
    fn leftovers() {
        let r = &fixtures::min_program().reactions[0];
        let (g, report) = gamma_reaction_to_dataflow(r).unwrap();
        let one = instantiate_for_multiset(&g, &report, &ms(&[4], "e"));
        assert_eq!((one.instances, one.leftovers.len()), (0, 1));
        let three = instantiate_for_multiset(&g, &report, &ms(&[2, 5, 9], "e"));
        assert_eq!(three.instances, 1);
        assert_eq!(three.assignments[0], [elem(2, "e", 0), elem(5, "e", 0)]);
        assert_eq!(three.leftovers, [elem(9, "e", 0)]);
    }

    #[test]
    fn labels_constrain_assignment() {
        let r = parse_reaction("R1 = replace [id1,'A1'],[id2,'B1'] by [id1+id2,'B2']").unwrap();
        let (g, report) = gamma_reaction_to_dataflow(&r).unwrap();
        let m: Multiset = [elem(1, "B1", 0), elem(2, "A1", 0), elem(3, "A1", 0), elem(9, "C1", 0)].into_iter().collect();
        let inst = instantiate_for_multiset(&g, &report, &m);
        assert_eq!(inst.instances, 1);
        assert_eq!(inst.assignments[0], [elem(2, "A1", 0), elem(1, "B1", 0)]);
        assert_eq!(inst.leftovers, [elem(3, "A1", 0), elem(9, "C1", 0)]);
    }

    #[test]
    fn alternatives_pick_one_source() {
        let p = fixtures::example2_program();
        let (g, report) = gamma_reaction_to_dataflow(p.reaction("R11").unwrap()).unwrap();
        let inst = instantiate_for_multiset(&g, &report, &ms(&[7], "A11"));
        assert_eq!(inst.instances, 1);
        assert_eq!(inst.graph.node_count(), g.node_count() - 1);
        assert!(validate_graph(&inst.graph).is_empty());
    }
}
