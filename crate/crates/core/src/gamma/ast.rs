use std::collections::{BTreeMap, BTreeSet};

use crate::dataflow::{ArithOp, CmpOp};
use crate::element::{Element, Label, Tag, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueSlot {
    Var(String),
    Lit(Value),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LabelSlot {
    Lit(Label),
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TagSlot {
    Var(String),
    Lit(Tag),
}

/// One entry of a replace list: `[value, label, tag]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub value: ValueSlot,
    pub label: LabelSlot,
    pub tag: TagSlot,
}

impl Pattern {
    /// `[var, 'label', tag_var]`.
    pub fn var(value: &str, label: Label, tag_var: &str) -> Self {
        Pattern {
            value: ValueSlot::Var(value.to_string()),
            label: LabelSlot::Lit(label),
            tag: TagSlot::Var(tag_var.to_string()),
        }
    }

    /// Variables this pattern binds, in value/label/tag order.
    pub fn binders(&self) -> impl Iterator<Item = &str> {
        let v = match &self.value {
            ValueSlot::Var(n) => Some(n.as_str()),
            ValueSlot::Lit(_) => None,
        };
        let l = match &self.label {
            LabelSlot::Var(n) => Some(n.as_str()),
            LabelSlot::Lit(_) => None,
        };
        v.into_iter().chain(l)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(Value),
    Label(Label),
    Var(String),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn arith(op: ArithOp, a: Expr, b: Expr) -> Expr {
        Expr::Arith(op, Box::new(a), Box::new(b))
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Expr {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Int(_) | Expr::Label(_) => {}
            Expr::Var(v) => {
                out.insert(v);
            }
            Expr::Neg(e) | Expr::Not(e) => e.collect_vars(out),
            Expr::Arith(_, a, b) | Expr::Cmp(_, a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Replaces every variable found in `map`.
    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Int(_) | Expr::Label(_) => self.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(map))),
            Expr::Not(e) => Expr::Not(Box::new(e.substitute(map))),
            Expr::Arith(op, a, b) => Expr::arith(*op, a.substitute(map), b.substitute(map)),
            Expr::Cmp(op, a, b) => Expr::cmp(*op, a.substitute(map), b.substitute(map)),
            Expr::And(a, b) => Expr::And(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Expr::Or(a, b) => Expr::or(a.substitute(map), b.substitute(map)),
        }
    }
}

/// An output tuple of a by-clause. Label and tag are expressions so that
/// `[id1, x, v + 1]` style outputs are expressible.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tuple {
    pub value: Expr,
    pub label: Expr,
    pub tag: Expr,
}

impl Tuple {
    pub fn new(value: Expr, label: Label, tag: Expr) -> Self {
        Tuple {
            value,
            label: Expr::Label(label),
            tag,
        }
    }

    pub fn exprs(&self) -> [&Expr; 3] {
        [&self.value, &self.label, &self.tag]
    }
}

/// `by <outputs> [if <guard>]`. An empty output list is the `by 0` clause.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ByClause {
    pub outputs: Vec<Tuple>,
    pub guard: Option<Expr>,
}

impl ByClause {
    pub fn is_null(&self) -> bool {
        self.outputs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Reaction {
    pub name: String,
    pub replace: Vec<Pattern>,
    pub clauses: Vec<ByClause>,
}

impl Reaction {
    /// The reaction's tag variable, if any pattern uses one.
    pub fn tag_var(&self) -> Option<&str> {
        self.replace.iter().find_map(|p| match &p.tag {
            TagSlot::Var(v) => Some(v.as_str()),
            TagSlot::Lit(_) => None,
        })
    }

    /// Every variable bound by the replace list.
    pub fn bound_vars(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.replace.iter().flat_map(Pattern::binders).collect();
        for p in &self.replace {
            if let TagSlot::Var(v) = &p.tag {
                out.insert(v);
            }
        }
        out
    }

    /// Renames variables everywhere (binders and uses).
    pub fn rename_vars(&self, map: &BTreeMap<String, String>) -> Reaction {
        let ren = |s: &String| map.get(s).cloned().unwrap_or_else(|| s.clone());
        let exprs: BTreeMap<String, Expr> = map
            .iter()
            .map(|(k, v)| (k.clone(), Expr::Var(v.clone())))
            .collect();
        let replace = self
            .replace
            .iter()
            .map(|p| Pattern {
                value: match &p.value {
                    ValueSlot::Var(v) => ValueSlot::Var(ren(v)),
                    lit => lit.clone(),
                },
                label: match &p.label {
                    LabelSlot::Var(v) => LabelSlot::Var(ren(v)),
                    lit => lit.clone(),
                },
                tag: match &p.tag {
                    TagSlot::Var(v) => TagSlot::Var(ren(v)),
                    lit => lit.clone(),
                },
            })
            .collect();
        let clauses = self
            .clauses
            .iter()
            .map(|c| ByClause {
                outputs: c
                    .outputs
                    .iter()
                    .map(|t| Tuple {
                        value: t.value.substitute(&exprs),
                        label: t.label.substitute(&exprs),
                        tag: t.tag.substitute(&exprs),
                    })
                    .collect(),
                guard: c.guard.as_ref().map(|g| g.substitute(&exprs)),
            })
            .collect();
        Reaction {
            name: self.name.clone(),
            replace,
            clauses,
        }
    }

    /// Renames value variables to `id1..idN` in pattern order, label
    /// variables to `x`, `x2`, ... and the tag variable to `v`.
    pub fn canonical_vars(&self) -> Reaction {
        // Two passes so targets cannot capture existing names.
        let mut to_tmp = BTreeMap::new();
        let mut to_final = BTreeMap::new();
        let (mut nv, mut nl) = (0, 0);
        for p in &self.replace {
            if let ValueSlot::Var(v) = &p.value {
                nv += 1;
                let tmp = format!("#v{nv}");
                to_tmp.insert(v.clone(), tmp.clone());
                to_final.insert(tmp, format!("id{nv}"));
            }
            if let LabelSlot::Var(v) = &p.label {
                if !to_tmp.contains_key(v) {
                    nl += 1;
                    let tmp = format!("#l{nl}");
                    to_tmp.insert(v.clone(), tmp.clone());
                    to_final.insert(tmp, if nl == 1 { "x".into() } else { format!("x{nl}") });
                }
            }
        }
        if let Some(t) = self.tag_var() {
            to_tmp.insert(t.to_string(), "#t".into());
            to_final.insert("#t".into(), "v".into());
        }
        self.rename_vars(&to_tmp).rename_vars(&to_final)
    }
}

/// Structural equality up to the reaction name and a consistent renaming of
/// variables.
pub fn alpha_equivalent(a: &Reaction, b: &Reaction) -> bool {
    let (mut a, mut b) = (a.canonical_vars(), b.canonical_vars());
    a.name.clear();
    b.name.clear();
    a == b
}

/// A set of reactions composed in parallel, plus an optional initial
/// multiset (kept in canonical order).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub reactions: Vec<Reaction>,
    pub initial: Vec<Element>,
}

impl Program {
    pub fn reaction(&self, name: &str) -> Option<&Reaction> {
        self.reactions.iter().find(|r| r.name == name)
    }
}
