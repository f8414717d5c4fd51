//! Values, labels, tags and the `[value, label, tag]` element shared by
//! both execution models.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Data carried by a token or multiset element. Booleans are 0/1.
pub type Value = i64;

/// Iteration counter. Initial tokens carry tag 0.
pub type Tag = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid identifier `{0}`: expected a nonempty run of ASCII letters, digits or `_`")]
pub struct InvalidIdent(pub String);

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// Edge label, also the label field of a multiset element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

impl Label {
    pub fn new(text: impl Into<String>) -> Result<Self, InvalidIdent> {
        let text = text.into();
        if is_ident(&text) {
            Ok(Label(text))
        } else {
            Err(InvalidIdent(text))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for Label {
    type Err = InvalidIdent;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::new(s)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Label {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Identifier of a dataflow node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(text: impl Into<String>) -> Result<Self, InvalidIdent> {
        let text = text.into();
        if is_ident(&text) {
            Ok(NodeId(text))
        } else {
            Err(InvalidIdent(text))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for NodeId {
    type Err = InvalidIdent;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeId::new(s)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A `[value, label, tag]` triple: a dataflow token or a Gamma multiset element.
///
/// Ordering is by value, then label, then tag, which gives multisets a
/// canonical listing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    pub value: Value,
    pub label: Label,
    pub tag: Tag,
}

impl Element {
    pub fn new(value: Value, label: Label, tag: Tag) -> Self {
        Element { value, label, tag }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, '{}', {}]", self.value, self.label, self.tag)
    }
}

/// Shorthand used heavily by tests and fixtures. Panics on an invalid label.
pub fn elem(value: Value, label: &str, tag: Tag) -> Element {
    Element::new(value, Label::new(label).expect("valid label"), tag)
}

/// Shorthand for a label literal. Panics on an invalid label.
pub fn label(text: &str) -> Label {
    Label::new(text).expect("valid label")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_rejects_bad_text() {
        assert!(Label::new("").is_err());
        assert!(Label::new("A-1").is_err());
        assert!(Label::new("a b").is_err());
        assert!(Label::new("B_12").is_ok());
    }

    #[test]
    fn element_order_is_value_label_tag() {
        let mut v = vec![elem(2, "A", 0), elem(1, "B", 3), elem(1, "A", 5), elem(1, "A", 1)];
        v.sort();
        assert_eq!(
            v,
            vec![elem(1, "A", 1), elem(1, "A", 5), elem(1, "B", 3), elem(2, "A", 0)]
        );
    }
}
