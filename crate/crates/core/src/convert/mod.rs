//! Conversions between dataflow graphs and Gamma programs.
//!
//! * [`dataflow_to_gamma`]: one reaction per operator node, one initial
//!   element per Source output edge. Edge labels are reused as element
//!   labels.
//! * [`gamma_reaction_to_dataflow`]: one graph per reaction, with a Source
//!   per pattern and a Sink per produced tuple.
//! * [`instantiate_for_multiset`]: replicates a per-reaction graph to cover
//!   the elements of a multiset.
//! * [`link_reaction_graphs`]: splices per-reaction graphs of a whole
//!   program back together along shared labels.
//! * [`fuse_chain`]: merges single-producer/single-consumer reaction chains.

mod fuse;
mod instantiate;
mod link;
mod to_dataflow;
mod to_gamma;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::dataflow::Violation;
use crate::element::{Label, NodeId, Value};

pub use fuse::{fuse_chain, fuse_step};
pub use instantiate::{instantiate_for_multiset, Instantiation};
pub use link::link_reaction_graphs;
pub use to_dataflow::{classify_reaction, gamma_reaction_to_dataflow, ReactionShape};
pub use to_gamma::{dataflow_to_gamma, dataflow_to_gamma_with};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvertError {
    #[error("invalid graph: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidGraph(Vec<Violation>),
    #[error("invalid inputs: {0}")]
    Inputs(String),
    #[error("reaction `{reaction}`: {message}")]
    Unsupported { reaction: String, message: String },
}

/// One Source slot of a per-reaction graph: the replace-list pattern it
/// stands for and the Source node(s) that receive its element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSlot {
    pub pattern: usize,
    /// One node per accepted label; a single node when the label is open.
    pub nodes: Vec<(NodeId, Option<Label>)>,
    /// Value the element must carry, for literal value patterns.
    pub value: Option<Value>,
}

impl SourceSlot {
    /// Node that should receive an element labeled `label`, if any.
    pub fn node_for(&self, label: &Label) -> Option<&NodeId> {
        self.nodes
            .iter()
            .find(|(_, l)| l.as_ref().is_none_or(|l| l == label))
            .map(|(n, _)| n)
    }
}

/// Side information produced by every conversion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConversionReport {
    pub source_summary: String,
    pub target_summary: String,
    /// Node → labels it produces. Injective: a label has one producer.
    pub label_map: BTreeMap<NodeId, Vec<Label>>,
    /// Labels whose elements are results rather than intermediate values.
    pub terminal_labels: BTreeSet<Label>,
    /// Generated label → the Gamma label it stands for.
    pub label_origin: BTreeMap<Label, Label>,
    /// Source slots, for Gamma → dataflow conversions.
    pub slots: Vec<SourceSlot>,
    pub warnings: Vec<String>,
}

impl ConversionReport {
    pub fn label_map_is_injective(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.label_map.values().flatten().all(|l| seen.insert(l))
    }

    /// The Gamma label an edge label stands for.
    pub fn origin<'a>(&'a self, l: &'a Label) -> &'a Label {
        self.label_origin.get(l).unwrap_or(l)
    }
}

impl fmt::Display for ConversionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "source: {}", self.source_summary)?;
        writeln!(f, "target: {}", self.target_summary)?;
        let terms: Vec<&str> = self.terminal_labels.iter().map(Label::as_str).collect();
        writeln!(f, "terminal labels: {}", terms.join(" "))?;
        for (node, labels) in &self.label_map {
            let ls: Vec<&str> = labels.iter().map(Label::as_str).collect();
            writeln!(f, "produces {node}: {}", ls.join(" "))?;
        }
        for (l, o) in &self.label_origin {
            writeln!(f, "label {l} from {o}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}
