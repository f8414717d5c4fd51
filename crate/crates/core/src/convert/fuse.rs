use std::collections::BTreeMap;

use crate::element::Label;
use crate::gamma::{ByClause, Expr, LabelSlot, Program, Reaction, TagSlot, Tuple, ValueSlot};

/// The single literal label `r` produces, if `r` is a plain producer: one
/// unguarded clause emitting one tuple, and only literal-label patterns.
fn sole_output(r: &Reaction) -> Option<(&Label, &Tuple)> {
    let [ByClause { outputs, guard: None }] = &r.clauses[..] else {
        return None;
    };
    let [t] = &outputs[..] else {
        return None;
    };
    let Expr::Label(l) = &t.label else {
        return None;
    };
    r.replace
        .iter()
        .all(|p| matches!(p.label, LabelSlot::Lit(_)))
        .then_some((l, t))
}

fn mentions_label(r: &Reaction, l: &Label) -> (usize, usize) {
    let consumed = r
        .replace
        .iter()
        .filter(|p| matches!(&p.label, LabelSlot::Lit(x) if x == l))
        .count();
    let produced = r
        .clauses
        .iter()
        .flat_map(|c| &c.outputs)
        .filter(|t| match &t.label {
            Expr::Label(x) => x == l,
            _ => true,
        })
        .count();
    (consumed, produced)
}

/// Tag relation between producer and consumer: `Some(map)` renames the
/// producer's tag variable onto the consumer's.
fn tags_compatible(prod: &Reaction, out: &Tuple, cons_tag: &TagSlot) -> Option<BTreeMap<String, String>> {
    match (prod.tag_var(), cons_tag) {
        (None, TagSlot::Lit(0)) => {
            let all_zero = prod.replace.iter().all(|p| p.tag == TagSlot::Lit(0));
            (all_zero && out.tag == Expr::Int(0)).then(BTreeMap::new)
        }
        (Some(tp), TagSlot::Var(tc)) => {
            let all_var = prod.replace.iter().all(|p| p.tag == TagSlot::Var(tp.to_string()));
            (all_var && out.tag == Expr::var(tp)).then(|| BTreeMap::from([(tp.to_string(), tc.clone())]))
        }
        _ => None,
    }
}

fn try_fuse(p: &Program, pi: usize) -> Option<(usize, Reaction)> {
    let prod = &p.reactions[pi];
    let (l, out) = sole_output(prod)?;
    if p.initial.iter().any(|e| e.label == *l) {
        return None;
    }
    if p.reactions.iter().any(|r| r.replace.iter().any(|pat| matches!(pat.label, LabelSlot::Var(_)))) {
        return None;
    }
    let mut consumer = None;
    for (ri, r) in p.reactions.iter().enumerate() {
        let (consumed, produced) = mentions_label(r, l);
        if ri == pi {
            if consumed > 0 || produced != 1 {
                return None;
            }
            continue;
        }
        if produced > 0 {
            return None;
        }
        match (consumed, consumer) {
            (0, _) => {}
            (1, None) => consumer = Some(ri),
            _ => return None,
        }
    }
    let ci = consumer?;
    let cons = &p.reactions[ci];
    if cons.clauses.iter().any(|c| c.guard.is_some()) {
        return None;
    }
    let slot = cons
        .replace
        .iter()
        .position(|pat| matches!(&pat.label, LabelSlot::Lit(x) if x == l))?;
    let ValueSlot::Var(target) = &cons.replace[slot].value else {
        return None;
    };
    let mut rename = tags_compatible(prod, out, &cons.replace[slot].tag)?;

    // Fresh names for the producer's own variables.
    let taken = cons.bound_vars();
    let mut n = 0;
    for v in prod.bound_vars() {
        if rename.contains_key(v) {
            continue;
        }
        let fresh = loop {
            n += 1;
            let c = format!("f{n}");
            if !taken.contains(c.as_str()) {
                break c;
            }
        };
        rename.insert(v.to_string(), fresh);
    }
    let prod = prod.rename_vars(&rename);
    let (_, out) = sole_output(&prod).expect("renaming keeps the shape");
    let subst = BTreeMap::from([(target.clone(), out.value.clone())]);

    let mut replace = cons.replace.clone();
    replace.splice(slot..=slot, prod.replace.iter().cloned());
    let clauses = cons
        .clauses
        .iter()
        .map(|c| ByClause {
            outputs: c
                .outputs
                .iter()
                .map(|t| Tuple {
                    value: t.value.substitute(&subst),
                    label: t.label.substitute(&subst),
                    tag: t.tag.substitute(&subst),
                })
                .collect(),
            guard: None,
        })
        .collect();
    let fused = Reaction {
        name: cons.name.clone(),
        replace,
        clauses,
    };
    Some((ci, fused.canonical_vars()))
}

/// Performs one fusion, if any producer/consumer pair qualifies.
pub fn fuse_step(p: &Program) -> Option<Program> {
    (0..p.reactions.len()).find_map(|pi| {
        let (ci, fused) = try_fuse(p, pi)?;
        let mut next = p.clone();
        next.reactions[ci] = fused;
        next.reactions.remove(pi);
        Some(next)
    })
}

/// Repeatedly fuses a reaction whose only product is consumed by exactly
/// one unguarded reaction into that consumer, substituting the producing
/// expression for the consumer's pattern variable. Programs with no such
/// pair are returned unchanged.
pub fn fuse_chain(p: &Program) -> Program {
    let mut cur = p.clone();
    while let Some(next) = fuse_step(&cur) {
        cur = next;
    }
    cur
}
