//! The Γ operator: nondeterministic multiset rewriting to a steady state.
//!
//! A binding assigns one multiset element to each pattern of a reaction,
//! drawn without exceeding multiplicities, with all elements sharing one tag.
//! It is admissible when some clause guard holds; the first such clause
//! decides the products.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec::RunStatus;
use crate::gamma::{Expr, LabelSlot, Pattern, Program, Reaction, TagSlot, ValueSlot};
use crate::element::{Element, Label, Tag, Value};
use crate::multiset::Multiset;

pub const DEFAULT_CAP: usize = 64;
pub const DEFAULT_MAX_REACTIONS: u64 = 1_000_000;
pub const DEFAULT_EXPLORE_BOUND: usize = 100_000;

/// A runtime value: integer or label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Datum {
    Int(Value),
    Label(Label),
}

impl fmt::Display for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datum::Int(n) => write!(f, "{n}"),
            Datum::Label(l) => write!(f, "'{l}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("type error: {0}")]
    Type(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("invalid tag {0}")]
    BadTag(Value),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GammaError {
    #[error("reaction `{reaction}`: {error}")]
    Eval { reaction: String, error: EvalError },
    #[error("reaction `{0}`: no clause guard holds for the binding")]
    NoClause(String),
    #[error("reaction `{0}`: binding does not select a sub-multiset")]
    NotSubmultiset(String),
    #[error("unknown reaction `{0}`")]
    UnknownReaction(String),
    #[error("trace step {0} does not replay")]
    ReplayMismatch(usize),
    #[error("state space exceeds bound of {0} states")]
    BoundExceeded(usize),
}

/// Variable assignment plus the elements selected, in pattern order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub vars: BTreeMap<String, Datum>,
    pub tag: Tag,
    pub consumed: Vec<Element>,
}

fn int(d: Datum) -> Result<Value, EvalError> {
    match d {
        Datum::Int(n) => Ok(n),
        Datum::Label(l) => Err(EvalError::Type(format!("label '{l}' used as a number"))),
    }
}

fn truth(b: bool) -> Datum {
    Datum::Int(Value::from(b))
}

/// Evaluates `e`. Booleans are integers: nonzero is true, results are 0/1.
pub fn eval(e: &Expr, vars: &BTreeMap<String, Datum>) -> Result<Datum, EvalError> {
    Ok(match e {
        Expr::Int(n) => Datum::Int(*n),
        Expr::Label(l) => Datum::Label(l.clone()),
        Expr::Var(v) => vars.get(v).cloned().ok_or_else(|| EvalError::Unbound(v.clone()))?,
        Expr::Neg(a) => Datum::Int(int(eval(a, vars)?)?.checked_neg().ok_or(EvalError::Overflow)?),
        Expr::Not(a) => truth(int(eval(a, vars)?)? == 0),
        Expr::Arith(op, a, b) => {
            let (x, y) = (int(eval(a, vars)?)?, int(eval(b, vars)?)?);
            if *op == crate::dataflow::ArithOp::Div && y == 0 {
                return Err(EvalError::DivisionByZero);
            }
            Datum::Int(op.apply(x, y).ok_or(EvalError::Overflow)?)
        }
        Expr::Cmp(op, a, b) => match (eval(a, vars)?, eval(b, vars)?) {
            (Datum::Int(x), Datum::Int(y)) => truth(op.holds(x, y)),
            (Datum::Label(x), Datum::Label(y)) => truth(op.holds(x.as_str(), y.as_str())),
            (x, y) => return Err(EvalError::Type(format!("cannot compare {x} with {y}"))),
        },
        Expr::And(a, b) => truth(int(eval(a, vars)?)? != 0 && int(eval(b, vars)?)? != 0),
        Expr::Or(a, b) => truth(int(eval(a, vars)?)? != 0 || int(eval(b, vars)?)? != 0),
    })
}

fn guard_holds(g: Option<&Expr>, vars: &BTreeMap<String, Datum>) -> bool {
    match g {
        None => true,
        Some(g) => matches!(eval(g, vars), Ok(Datum::Int(n)) if n != 0),
    }
}

/// Index of the first clause whose guard holds; evaluation errors count as
/// "does not hold".
pub fn select_clause(r: &Reaction, b: &Binding) -> Option<usize> {
    r.clauses.iter().position(|c| guard_holds(c.guard.as_ref(), &b.vars))
}

fn unify(p: &Pattern, e: &Element, tag: &mut Option<Tag>, vars: &mut BTreeMap<String, Datum>) -> bool {
    if tag.is_some_and(|t| t != e.tag) {
        return false;
    }
    match &p.tag {
        TagSlot::Lit(t) if *t != e.tag => return false,
        _ => {}
    }
    match &p.value {
        ValueSlot::Lit(v) if *v != e.value => return false,
        _ => {}
    }
    match &p.label {
        LabelSlot::Lit(l) if *l != e.label => return false,
        _ => {}
    }
    if let ValueSlot::Var(v) = &p.value {
        vars.insert(v.clone(), Datum::Int(e.value));
    }
    if let LabelSlot::Var(v) = &p.label {
        vars.insert(v.clone(), Datum::Label(e.label.clone()));
    }
    if let TagSlot::Var(v) = &p.tag {
        let t = Value::try_from(e.tag).unwrap_or(Value::MAX);
        vars.insert(v.clone(), Datum::Int(t));
    }
    *tag = Some(e.tag);
    true
}

/// Builds the binding that assigns `elements` to the patterns of `r` in
/// order, if they unify.
pub fn bind_elements(r: &Reaction, elements: &[Element]) -> Option<Binding> {
    if elements.len() != r.replace.len() {
        return None;
    }
    let (mut tag, mut vars) = (None, BTreeMap::new());
    for (p, e) in r.replace.iter().zip(elements) {
        if !unify(p, e, &mut tag, &mut vars) {
            return None;
        }
    }
    Some(Binding {
        vars,
        tag: tag.unwrap_or(0),
        consumed: elements.to_vec(),
    })
}

fn search(
    r: &Reaction,
    pool: &mut Vec<(Element, usize)>,
    i: usize,
    tag: Option<Tag>,
    vars: &BTreeMap<String, Datum>,
    picked: &mut Vec<Element>,
    visit: &mut dyn FnMut(Binding) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if i == r.replace.len() {
        return visit(Binding {
            vars: vars.clone(),
            tag: tag.unwrap_or(0),
            consumed: picked.clone(),
        });
    }
    for k in 0..pool.len() {
        if pool[k].1 == 0 {
            continue;
        }
        let (mut t, mut vs) = (tag, vars.clone());
        if !unify(&r.replace[i], &pool[k].0, &mut t, &mut vs) {
            continue;
        }
        pool[k].1 -= 1;
        picked.push(pool[k].0.clone());
        let flow = search(r, pool, i + 1, t, &vs, picked, visit);
        picked.pop();
        pool[k].1 += 1;
        flow?;
    }
    ControlFlow::Continue(())
}

fn for_each_binding(r: &Reaction, m: &Multiset, visit: &mut dyn FnMut(Binding) -> ControlFlow<()>) {
    let mut pool: Vec<(Element, usize)> = m.iter().map(|(e, n)| (e.clone(), n)).collect();
    let _ = search(r, &mut pool, 0, None, &BTreeMap::new(), &mut Vec::new(), visit);
}

/// Every unification of the replace list against `m`, admissible or not.
/// Distinct elements are distinguished; copies of one element are not.
pub fn enumerate_bindings(r: &Reaction, m: &Multiset) -> Vec<Binding> {
    let mut out = Vec::new();
    for_each_binding(r, m, &mut |b| {
        out.push(b);
        ControlFlow::Continue(())
    });
    out
}

/// Up to `cap` admissible bindings of `r` in `m`, in canonical order.
pub fn find_matches(r: &Reaction, m: &Multiset, cap: usize) -> Vec<Binding> {
    let mut out = Vec::new();
    if cap == 0 {
        return out;
    }
    for_each_binding(r, m, &mut |b| {
        if select_clause(r, &b).is_some() {
            out.push(b);
            if out.len() >= cap {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    });
    out
}

fn eval_err(r: &Reaction, error: EvalError) -> GammaError {
    GammaError::Eval {
        reaction: r.name.clone(),
        error,
    }
}

/// Elements produced by firing `r` under `b`.
pub fn products(r: &Reaction, b: &Binding) -> Result<Vec<Element>, GammaError> {
    let idx = select_clause(r, b).ok_or_else(|| GammaError::NoClause(r.name.clone()))?;
    let mut out = Vec::new();
    for t in &r.clauses[idx].outputs {
        let value = int(eval(&t.value, &b.vars).map_err(|e| eval_err(r, e))?).map_err(|e| eval_err(r, e))?;
        let label = match eval(&t.label, &b.vars).map_err(|e| eval_err(r, e))? {
            Datum::Label(l) => l,
            Datum::Int(n) => {
                return Err(eval_err(r, EvalError::Type(format!("{n} used as a label"))));
            }
        };
        let tag = int(eval(&t.tag, &b.vars).map_err(|e| eval_err(r, e))?).map_err(|e| eval_err(r, e))?;
        let tag = Tag::try_from(tag).map_err(|_| eval_err(r, EvalError::BadTag(tag)))?;
        out.push(Element::new(value, label, tag));
    }
    Ok(out)
}

/// Fires `r` under `b` in place and returns the produced elements.
pub fn apply_in_place(r: &Reaction, b: &Binding, m: &mut Multiset) -> Result<Vec<Element>, GammaError> {
    if !m.contains_all(&b.consumed) {
        return Err(GammaError::NotSubmultiset(r.name.clone()));
    }
    let produced = products(r, b)?;
    m.remove_all(&b.consumed);
    m.extend(produced.iter().cloned());
    Ok(produced)
}

/// `(m - consumed) + products`.
pub fn apply(r: &Reaction, b: &Binding, m: &Multiset) -> Result<Multiset, GammaError> {
    let mut next = m.clone();
    apply_in_place(r, b, &mut next)?;
    Ok(next)
}

/// One applied reaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub reaction: String,
    pub consumed: Vec<Element>,
    pub produced: Vec<Element>,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Element]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        write!(f, "{}: {{{}}} -> {{{}}}", self.reaction, list(&self.consumed), list(&self.produced))
    }
}

pub type GammaTrace = Vec<TraceEntry>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaConfig {
    pub seed: u64,
    pub max_reactions: u64,
    /// Bindings enumerated per reaction per step.
    pub cap: usize,
}

impl Default for GammaConfig {
    fn default() -> Self {
        GammaConfig {
            seed: 0,
            max_reactions: DEFAULT_MAX_REACTIONS,
            cap: DEFAULT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaRun {
    pub multiset: Multiset,
    pub trace: GammaTrace,
    pub status: RunStatus,
}

/// Runs `p` from `m0`: at each step one (reaction, binding) pair is drawn
/// uniformly from the up-to-`cap` matches of every reaction.
pub fn run_with(p: &Program, m0: &Multiset, cfg: &GammaConfig) -> Result<GammaRun, GammaError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut m = m0.clone();
    let mut trace = Vec::new();
    let status = loop {
        let mut pending: Vec<(&Reaction, Binding)> = Vec::new();
        for r in &p.reactions {
            pending.extend(find_matches(r, &m, cfg.cap).into_iter().map(|b| (r, b)));
        }
        if pending.is_empty() {
            break RunStatus::Terminated;
        }
        if trace.len() as u64 >= cfg.max_reactions {
            break RunStatus::BudgetExhausted;
        }
        let (r, b) = pending.swap_remove(rng.gen_range(0..pending.len()));
        let produced = apply_in_place(r, &b, &mut m)?;
        trace.push(TraceEntry {
            reaction: r.name.clone(),
            consumed: b.consumed,
            produced,
        });
    };
    Ok(GammaRun {
        multiset: m,
        trace,
        status,
    })
}

pub fn run_to_fixpoint(
    p: &Program,
    m0: &Multiset,
    seed: u64,
    max_reactions: u64,
) -> Result<GammaRun, GammaError> {
    run_with(
        p,
        m0,
        &GammaConfig {
            seed,
            max_reactions,
            cap: DEFAULT_CAP,
        },
    )
}

/// True when no reaction of `p` has an admissible binding in `m`.
pub fn is_steady(p: &Program, m: &Multiset) -> bool {
    p.reactions.iter().all(|r| find_matches(r, m, 1).is_empty())
}

/// Re-applies `trace` from `m0`, checking every step, and returns the
/// final multiset.
pub fn replay(p: &Program, m0: &Multiset, trace: &[TraceEntry]) -> Result<Multiset, GammaError> {
    let mut m = m0.clone();
    for (i, step) in trace.iter().enumerate() {
        let r = p
            .reaction(&step.reaction)
            .ok_or_else(|| GammaError::UnknownReaction(step.reaction.clone()))?;
        let b = bind_elements(r, &step.consumed).ok_or(GammaError::ReplayMismatch(i))?;
        let produced = apply_in_place(r, &b, &mut m)?;
        if produced != step.produced {
            return Err(GammaError::ReplayMismatch(i));
        }
    }
    Ok(m)
}

/// Breadth-first search over every admissible (reaction, binding) choice;
/// returns the distinct steady states. Fails once more than `bound`
/// distinct states have been seen.
pub fn exhaustive_terminals(
    p: &Program,
    m0: &Multiset,
    bound: usize,
) -> Result<BTreeSet<Multiset>, GammaError> {
    let mut seen: HashSet<Multiset> = HashSet::from([m0.clone()]);
    let mut queue = VecDeque::from([m0.clone()]);
    let mut terminals = BTreeSet::new();
    while let Some(m) = queue.pop_front() {
        let mut moved = false;
        for r in &p.reactions {
            for b in find_matches(r, &m, usize::MAX) {
                moved = true;
                let next = apply(r, &b, &m)?;
                if seen.insert(next.clone()) {
                    if seen.len() > bound {
                        return Err(GammaError::BoundExceeded(bound));
                    }
                    queue.push_back(next);
                }
            }
        }
        if !moved {
            terminals.insert(m);
        }
    }
    Ok(terminals)
}
