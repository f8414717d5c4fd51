//! Bundled example programs.

use crate::dataflow::{parse_graph_text, DataflowGraph};
use crate::element::Value;
use crate::gamma::{parse_program, Program};

/// `m = (x + y) - (k * j)` with x=1, y=5, k=3, j=2.
pub const EXAMPLE1_DF: &str = include_str!("../fixtures/example1.df");
pub const EXAMPLE1_GAMMA: &str = include_str!("../fixtures/example1.gamma");
/// Example 1 fused into one reaction.
pub const EXAMPLE1_REDUCED_GAMMA: &str = include_str!("../fixtures/example1_reduced.gamma");
/// Counted loop accumulating `x + z*y` (y=4, z=3, x=2 by default).
pub const EXAMPLE2_DF: &str = include_str!("../fixtures/example2.df");
pub const EXAMPLE2_GAMMA: &str = include_str!("../fixtures/example2.gamma");
/// Hand-reduced six-reaction form of Example 2.
pub const EXAMPLE2_REDUCED_GAMMA: &str = include_str!("../fixtures/example2_reduced.gamma");
/// Minimum element of a multiset.
pub const MIN_GAMMA: &str = include_str!("../fixtures/min.gamma");

pub fn example1_graph() -> DataflowGraph {
    parse_graph_text(EXAMPLE1_DF).expect("example1.df is valid")
}

pub fn example2_graph() -> DataflowGraph {
    parse_graph_text(EXAMPLE2_DF).expect("example2.df is valid")
}

/// Source assignments for Example 2.
pub fn example2_inputs(y: Value, z: Value, x: Value) -> Vec<(String, Value)> {
    vec![("y".into(), y), ("z".into(), z), ("x".into(), x)]
}

fn program(text: &str, name: &str) -> Program {
    parse_program(text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn example1_program() -> Program {
    program(EXAMPLE1_GAMMA, "example1.gamma")
}

pub fn example1_reduced_program() -> Program {
    program(EXAMPLE1_REDUCED_GAMMA, "example1_reduced.gamma")
}

pub fn example2_program() -> Program {
    program(EXAMPLE2_GAMMA, "example2.gamma")
}

pub fn example2_reduced_program() -> Program {
    program(EXAMPLE2_REDUCED_GAMMA, "example2_reduced.gamma")
}

pub fn min_program() -> Program {
    program(MIN_GAMMA, "min.gamma")
}

/// Every bundled Gamma program with its file name.
pub fn all_programs() -> Vec<(&'static str, Program)> {
    vec![
        ("example1.gamma", example1_program()),
        ("example1_reduced.gamma", example1_reduced_program()),
        ("example2.gamma", example2_program()),
        ("example2_reduced.gamma", example2_reduced_program()),
        ("min.gamma", min_program()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::{NodeKind, OutPort};

    #[test]
    fn all_fixtures_load() {
        assert_eq!(example1_graph().node_count(), 8);
        assert_eq!(example1_graph().edge_count(), 7);
        let g = example2_graph();
        assert_eq!(g.count_kind(|k| *k == NodeKind::Inctag), 3);
        assert_eq!(g.count_kind(|k| *k == NodeKind::Steer), 3);
        assert_eq!(g.count_kind(NodeKind::is_operator), 9);
        let counts: Vec<usize> = all_programs().iter().map(|(_, p)| p.reactions.len()).collect();
        assert_eq!(counts, [3, 1, 9, 6, 1]);
    }

    #[test]
    fn example2_exit_edge() {
        let g = example2_graph();
        let r17 = "R17".parse().unwrap();
        assert_eq!(g.outputs_of(&r17, OutPort::False), [crate::label("C14")]);
        assert_eq!(g.sink_labels(), [crate::label("C14")]);
    }
}
