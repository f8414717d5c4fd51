//! Dynamic dataflow graphs and Gamma multiset-rewriting programs: parsing,
//! execution under each model's native semantics, conversion in both
//! directions, and equivalence checking.

pub mod dataflow;
pub mod element;
pub mod equiv;
pub mod exec;
pub mod convert;
pub mod fixtures;
pub mod gamma;
pub mod multiset;
pub mod rewrite;

pub use element::{elem, label, Element, Label, NodeId, Tag, Value};
