use std::collections::BTreeSet;
use std::fmt;

use super::ast::{Program, Reaction, TagSlot};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReactionViolation {
    EmptyReplace,
    EmptyBy,
    DuplicateBinder(String),
    MultipleTagVars(Vec<String>),
    UnboundVariable(String),
    /// An unguarded clause followed by more clauses; index of the clause.
    UnguardedNotLast(usize),
    DuplicateReaction(String),
}

impl ReactionViolation {
    pub fn class(&self) -> &'static str {
        match self {
            ReactionViolation::EmptyReplace => "empty-replace",
            ReactionViolation::EmptyBy => "empty-by",
            ReactionViolation::DuplicateBinder(_) => "duplicate-binder",
            ReactionViolation::MultipleTagVars(_) => "multiple-tag-variables",
            ReactionViolation::UnboundVariable(_) => "unbound-variable",
            ReactionViolation::UnguardedNotLast(_) => "unguarded-not-last",
            ReactionViolation::DuplicateReaction(_) => "duplicate-reaction",
        }
    }
}

impl fmt::Display for ReactionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReactionViolation::EmptyReplace => f.write_str("empty replace list"),
            ReactionViolation::EmptyBy => f.write_str("empty by list"),
            ReactionViolation::DuplicateBinder(v) => write!(f, "variable `{v}` is bound twice"),
            ReactionViolation::MultipleTagVars(vs) => {
                write!(f, "multiple tag variables: {}", vs.join(", "))
            }
            ReactionViolation::UnboundVariable(v) => write!(f, "unbound variable `{v}`"),
            ReactionViolation::UnguardedNotLast(i) => {
                write!(f, "unguarded clause {} is not the last clause", i + 1)
            }
            ReactionViolation::DuplicateReaction(n) => write!(f, "duplicate reaction name `{n}`"),
        }
    }
}

/// Reports every static problem with `r`.
pub fn validate_reaction(r: &Reaction) -> Vec<ReactionViolation> {
    let mut out = Vec::new();
    if r.replace.is_empty() {
        out.push(ReactionViolation::EmptyReplace);
    }
    if r.clauses.is_empty() {
        out.push(ReactionViolation::EmptyBy);
    }

    let mut binders = BTreeSet::new();
    let mut dups = BTreeSet::new();
    for v in r.replace.iter().flat_map(|p| p.binders()) {
        if !binders.insert(v) {
            dups.insert(v);
        }
    }
    let mut tag_vars: Vec<&str> = Vec::new();
    for p in &r.replace {
        if let TagSlot::Var(t) = &p.tag {
            if !tag_vars.contains(&t.as_str()) {
                tag_vars.push(t);
            }
        }
    }
    for t in &tag_vars {
        if binders.contains(t) {
            dups.insert(t);
        }
    }
    out.extend(dups.into_iter().map(|v| ReactionViolation::DuplicateBinder(v.to_string())));
    if tag_vars.len() > 1 {
        out.push(ReactionViolation::MultipleTagVars(
            tag_vars.iter().map(|s| s.to_string()).collect(),
        ));
    }

    let bound = r.bound_vars();
    let mut unbound = BTreeSet::new();
    for c in &r.clauses {
        let mut used = BTreeSet::new();
        if let Some(g) = &c.guard {
            g.collect_vars(&mut used);
        }
        for t in &c.outputs {
            for e in t.exprs() {
                e.collect_vars(&mut used);
            }
        }
        unbound.extend(used.into_iter().filter(|v| !bound.contains(v)));
    }
    out.extend(unbound.into_iter().map(|v| ReactionViolation::UnboundVariable(v.to_string())));

    let last = r.clauses.len().saturating_sub(1);
    for (i, c) in r.clauses.iter().enumerate() {
        if c.guard.is_none() && i != last {
            out.push(ReactionViolation::UnguardedNotLast(i));
        }
    }
    out
}

/// Per-reaction violations plus duplicate names, tagged with the reaction.
pub fn validate_program(p: &Program) -> Vec<(String, ReactionViolation)> {
    let mut out = Vec::new();
    let mut names = BTreeSet::new();
    for r in &p.reactions {
        if !names.insert(r.name.as_str()) {
            out.push((r.name.clone(), ReactionViolation::DuplicateReaction(r.name.clone())));
        }
        out.extend(validate_reaction(r).into_iter().map(|v| (r.name.clone(), v)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::parse_reaction;
    use crate::gamma::{ByClause, Expr, Pattern, Tuple, ValueSlot};
    use crate::element::label;

    fn classes(r: &Reaction) -> Vec<&'static str> {
        validate_reaction(r).iter().map(ReactionViolation::class).collect()
    }

    #[test]
    fn r14_is_clean() {
        let r = parse_reaction(
            "R14 = replace [id1, 'B12', v]
             by [1,'B14',v], [1,'B15',v], [1,'B16',v] If id1 > 0
             by [0,'B14',v], [0,'B15',v], [0,'B16',v] else",
        )
        .unwrap();
        assert!(validate_reaction(&r).is_empty());
    }

    #[test]
    fn two_tag_vars() {
        let r = Reaction {
            name: "R".into(),
            replace: vec![Pattern::var("a", label("A"), "v"), Pattern::var("b", label("B"), "w")],
            clauses: vec![ByClause {
                outputs: vec![Tuple::new(Expr::var("a"), label("C"), Expr::var("v"))],
                guard: None,
            }],
        };
        assert_eq!(classes(&r), ["multiple-tag-variables"]);
    }

    #[test]
    fn duplicate_binder() {
        let mut r = Reaction {
            name: "R".into(),
            replace: vec![Pattern::var("id1", label("A"), "v"), Pattern::var("id2", label("B"), "v")],
            clauses: vec![ByClause {
                outputs: vec![Tuple::new(Expr::var("id1"), label("C"), Expr::var("v"))],
                guard: None,
            }],
        };
        assert!(classes(&r).is_empty());
        r.replace[1].value = ValueSlot::Var("id1".into());
        assert_eq!(classes(&r), ["duplicate-binder"]);
    }

    #[test]
    fn unbound_and_order() {
        let r = Reaction {
            name: "R".into(),
            replace: vec![Pattern::var("x", label("A"), "v")],
            clauses: vec![
                ByClause { outputs: vec![], guard: None },
                ByClause {
                    outputs: vec![Tuple::new(Expr::var("y"), label("B"), Expr::var("v"))],
                    guard: Some(Expr::var("x")),
                },
            ],
        };
        assert_eq!(classes(&r), ["unbound-variable", "unguarded-not-last"]);
    }
}
