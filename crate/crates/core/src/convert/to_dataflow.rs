use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::to_gamma::kind_counts;
use super::{ConversionReport, ConvertError, SourceSlot};
use crate::dataflow::{validate_graph, ArithOp, CmpOp, DataflowGraph, Edge, NodeKind, OutPort};
use crate::element::{Label, NodeId, Value};
use crate::gamma::{ByClause, Expr, LabelSlot, Reaction, TagSlot, ValueSlot};
use crate::rewrite::{eval, Datum};

/// Which dataflow node a reaction corresponds to, judged from its syntax.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReactionShape {
    /// One unguarded clause.
    Arith,
    /// Produces 1 on some labels when a condition holds and 0 on the same
    /// labels otherwise.
    Compare,
    /// Routes a data value by a 0/1 control value.
    Steer,
    /// Forwards one value at tag + 1.
    TagIncrement,
    General,
}

impl fmt::Display for ReactionShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReactionShape::Arith => "arith",
            ReactionShape::Compare => "compare",
            ReactionShape::Steer => "steer",
            ReactionShape::TagIncrement => "tag-increment",
            ReactionShape::General => "general",
        })
    }
}

enum TagUse {
    Same,
    Next,
}

/// Literal tag shared by every pattern, if no pattern uses a tag variable.
fn literal_tag(r: &Reaction) -> Option<u64> {
    let mut tags = r.replace.iter().map(|p| match p.tag {
        TagSlot::Lit(t) => Some(t),
        TagSlot::Var(_) => None,
    });
    let first = tags.next()??;
    tags.all(|t| t == Some(first)).then_some(first)
}

fn tag_use(r: &Reaction, e: &Expr) -> Option<TagUse> {
    let tv = r.tag_var();
    let is_tag = |e: &Expr| match (e, tv) {
        (Expr::Var(v), Some(tv)) => v == tv,
        (Expr::Int(k), None) => literal_tag(r).is_some_and(|t| Value::try_from(t) == Ok(*k)),
        _ => false,
    };
    if is_tag(e) {
        return Some(TagUse::Same);
    }
    match e {
        Expr::Arith(ArithOp::Add, a, b) if is_tag(a) && **b == Expr::Int(1) => Some(TagUse::Next),
        Expr::Int(k) if tv.is_none() => literal_tag(r)
            .and_then(|t| Value::try_from(t + 1).ok())
            .filter(|t| t == k)
            .map(|_| TagUse::Next),
        _ => None,
    }
}

fn negated(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Ge,
        CmpOp::Ge => CmpOp::Lt,
        CmpOp::Gt => CmpOp::Le,
        CmpOp::Le => CmpOp::Gt,
        CmpOp::Eq => CmpOp::Ne,
        CmpOp::Ne => CmpOp::Eq,
    }
}

/// Whether the second clause fires exactly when the first does not, for
/// boolean-valued operands.
fn complementary(a: &ByClause, b: &ByClause) -> bool {
    let (Some(g1), g2) = (&a.guard, &b.guard) else {
        return false;
    };
    let Some(g2) = g2 else {
        return true;
    };
    if *g2 == Expr::Not(Box::new(g1.clone())) || *g1 == Expr::Not(Box::new(g2.clone())) {
        return true;
    }
    match (g1, g2) {
        (Expr::Cmp(o1, a1, b1), Expr::Cmp(o2, a2, b2)) if a1 == a2 => {
            (b1 == b2 && *o2 == negated(*o1))
                || (*o1 == CmpOp::Eq
                    && *o2 == CmpOp::Eq
                    && matches!((&**b1, &**b2), (Expr::Int(1), Expr::Int(0)) | (Expr::Int(0), Expr::Int(1))))
        }
        _ => false,
    }
}

/// Labels accepted by a one-pattern reaction guarded by `x == 'L1' or ...`.
fn label_alternatives(r: &Reaction) -> Option<Vec<Label>> {
    let p = &r.replace[0];
    let guard = &r.clauses[0].guard;
    match (&p.label, guard) {
        (LabelSlot::Lit(l), None) => Some(vec![l.clone()]),
        (LabelSlot::Var(x), Some(g)) => {
            let mut out = Vec::new();
            let mut stack = vec![g];
            while let Some(e) = stack.pop() {
                match e {
                    Expr::Or(a, b) => {
                        stack.push(b);
                        stack.push(a);
                    }
                    Expr::Cmp(CmpOp::Eq, a, b) => match (&**a, &**b) {
                        (Expr::Var(v), Expr::Label(l)) | (Expr::Label(l), Expr::Var(v)) if v == x => {
                            out.push(l.clone())
                        }
                        _ => return None,
                    },
                    _ => return None,
                }
            }
            out.sort();
            out.dedup();
            Some(out)
        }
        _ => None,
    }
}

fn is_tag_increment(r: &Reaction) -> Option<Vec<Label>> {
    if r.replace.len() != 1 || r.clauses.len() != 1 {
        return None;
    }
    let ValueSlot::Var(d) = &r.replace[0].value else {
        return None;
    };
    let c = &r.clauses[0];
    let forwards = !c.outputs.is_empty()
        && c.outputs.iter().all(|t| {
            t.value == Expr::Var(d.clone())
                && matches!(t.label, Expr::Label(_))
                && matches!(tag_use(r, &t.tag), Some(TagUse::Next))
        });
    if forwards {
        label_alternatives(r)
    } else {
        None
    }
}

fn plain_tags(r: &Reaction) -> bool {
    r.clauses
        .iter()
        .flat_map(|c| &c.outputs)
        .all(|t| matches!(tag_use(r, &t.tag), Some(TagUse::Same)))
}

fn output_labels(c: &ByClause) -> Vec<&Expr> {
    c.outputs.iter().map(|t| &t.label).collect()
}

fn is_compare(r: &Reaction) -> bool {
    let [c1, c2] = &r.clauses[..] else {
        return false;
    };
    complementary(c1, c2)
        && !c1.outputs.is_empty()
        && output_labels(c1) == output_labels(c2)
        && c1.outputs.iter().all(|t| t.value == Expr::Int(1))
        && c2.outputs.iter().all(|t| t.value == Expr::Int(0))
        && plain_tags(r)
}

fn is_steer(r: &Reaction) -> bool {
    let [p1, p2] = &r.replace[..] else {
        return false;
    };
    let [c1, c2] = &r.clauses[..] else {
        return false;
    };
    let (ValueSlot::Var(d), ValueSlot::Var(c)) = (&p1.value, &p2.value) else {
        return false;
    };
    let on = |k| Some(Expr::cmp(CmpOp::Eq, Expr::Var(c.clone()), Expr::Int(k)));
    c1.guard == on(1)
        && (c2.guard.is_none() || c2.guard == on(0))
        && r.clauses
            .iter()
            .flat_map(|cl| &cl.outputs)
            .all(|t| t.value == Expr::Var(d.clone()) && matches!(t.label, Expr::Label(_)))
        && plain_tags(r)
}

/// Classifies `r` by the dataflow node it mirrors.
pub fn classify_reaction(r: &Reaction) -> ReactionShape {
    if is_tag_increment(r).is_some() {
        ReactionShape::TagIncrement
    } else if r.clauses.len() == 1 && r.clauses[0].guard.is_none() && plain_tags(r) {
        ReactionShape::Arith
    } else if is_steer(r) {
        ReactionShape::Steer
    } else if is_compare(r) {
        ReactionShape::Compare
    } else {
        ReactionShape::General
    }
}

type Wire = (NodeId, OutPort);

/// Where values of a clause come from: raw, or steered through a control.
type Ctx = Option<(Wire, OutPort)>;

struct Builder<'r> {
    r: &'r Reaction,
    g: DataflowGraph,
    report: ConversionReport,
    next_id: usize,
    next_label: usize,
    vars: BTreeMap<String, Wire>,
    sources: Vec<Wire>,
    literal_labels: BTreeMap<NodeId, Label>,
    steers: BTreeMap<(Wire, Wire), NodeId>,
    drops: BTreeSet<Label>,
}

impl<'r> Builder<'r> {
    fn new(r: &'r Reaction) -> Self {
        Builder {
            r,
            g: DataflowGraph::new(),
            report: ConversionReport::default(),
            next_id: 0,
            next_label: 0,
            vars: BTreeMap::new(),
            sources: Vec::new(),
            literal_labels: BTreeMap::new(),
            steers: BTreeMap::new(),
            drops: BTreeSet::new(),
        }
    }

    fn unsupported(&self, message: impl Into<String>) -> ConvertError {
        ConvertError::Unsupported {
            reaction: self.r.name.clone(),
            message: message.into(),
        }
    }

    fn warn(&mut self, w: String) {
        if !self.report.warnings.contains(&w) {
            self.report.warnings.push(w);
        }
    }

    fn node(&mut self, stem: &str, kind: NodeKind) -> NodeId {
        loop {
            self.next_id += 1;
            let id = NodeId::new(format!("{}_{stem}{}", self.r.name, self.next_id)).expect("identifier characters");
            if self.g.node(&id).is_none() {
                self.g.add_node(id.clone(), kind).expect("fresh id");
                return id;
            }
        }
    }

    fn fresh_label(&mut self) -> Label {
        loop {
            self.next_label += 1;
            let l = Label::new(format!("{}_e{}", self.r.name, self.next_label)).expect("identifier characters");
            if self.g.edge(&l).is_none() {
                return l;
            }
        }
    }

    /// Adds an edge, using `preferred` as its label when still free.
    fn connect(&mut self, from: &Wire, to: &NodeId, slot: usize, preferred: Option<Label>) -> Label {
        let label = match preferred {
            Some(p) if self.g.edge(&p).is_none() => p,
            Some(p) => {
                let l = self.fresh_label();
                self.report.label_origin.insert(l.clone(), p);
                l
            }
            None => self.fresh_label(),
        };
        self.g
            .add_edge(Edge {
                label: label.clone(),
                from: from.0.clone(),
                port: from.1,
                to: to.clone(),
                slot,
            })
            .expect("fresh label");
        label
    }

    /// Connects from a wire; Source wires carry their pattern label.
    fn feed(&mut self, from: &Wire, to: &NodeId, slot: usize) {
        let preferred = self.literal_labels.get(&from.0).cloned();
        self.connect(from, to, slot, preferred);
    }

    fn unary(&mut self, input: &Wire, kind: NodeKind) -> Wire {
        let stem = kind.short_name();
        let n = self.node(stem, kind);
        self.feed(input, &n, 0);
        (n, OutPort::Out)
    }

    fn binary(&mut self, a: &Wire, b: &Wire, kind: NodeKind) -> Wire {
        let stem = kind.short_name();
        let n = self.node(stem, kind);
        self.feed(a, &n, 0);
        self.feed(b, &n, 1);
        (n, OutPort::Out)
    }

    fn sink(&mut self, from: &Wire, label: Option<Label>) -> Label {
        let n = self.node("out", NodeKind::Sink);
        let l = self.connect(from, &n, 0, label);
        self.report.terminal_labels.insert(l.clone());
        l
    }

    fn add_sources(&mut self) {
        for (i, p) in self.r.replace.iter().enumerate() {
            let value = match p.value {
                ValueSlot::Lit(v) => Some(v),
                ValueSlot::Var(_) => None,
            };
            let id = self.node("in", NodeKind::Source(value));
            let label = match &p.label {
                LabelSlot::Lit(l) => Some(l.clone()),
                LabelSlot::Var(_) => None,
            };
            if let Some(l) = &label {
                self.literal_labels.insert(id.clone(), l.clone());
            }
            let wire = (id.clone(), OutPort::Out);
            if let ValueSlot::Var(v) = &p.value {
                self.vars.insert(v.clone(), wire.clone());
            }
            self.sources.push(wire);
            self.report.slots.push(SourceSlot {
                pattern: i,
                nodes: vec![(id, label)],
                value,
            });
        }
    }

    fn steered(&mut self, base: &Wire, ctx: &Ctx) -> Wire {
        let Some((ctl, port)) = ctx else {
            return base.clone();
        };
        let key = (base.clone(), ctl.clone());
        let st = match self.steers.get(&key) {
            Some(st) => st.clone(),
            None => {
                let st = self.node("steer", NodeKind::Steer);
                self.feed(base, &st, 0);
                self.feed(ctl, &st, 1);
                self.steers.insert(key, st.clone());
                st
            }
        };
        (st, *port)
    }

    fn constant_of(&self, e: &Expr) -> Result<Option<Value>, ConvertError> {
        if !e.vars().is_empty() {
            return Ok(None);
        }
        match eval(e, &BTreeMap::new()) {
            Ok(Datum::Int(k)) => Ok(Some(k)),
            Ok(Datum::Label(l)) => Err(self.unsupported(format!("label '{l}' used as a value"))),
            Err(err) => Err(self.unsupported(format!("constant expression: {err}"))),
        }
    }

    /// A wire carrying `k`, triggered by the first pattern's element.
    fn constant(&mut self, k: Value, ctx: &Ctx) -> Wire {
        let trigger = self.sources[0].clone();
        let t = self.steered(&trigger, ctx);
        let zero = self.unary(&t, NodeKind::Arith { op: ArithOp::Mul, rhs: Some(0) });
        if k == 0 {
            zero
        } else {
            self.unary(&zero, NodeKind::Arith { op: ArithOp::Add, rhs: Some(k) })
        }
    }

    fn value(&mut self, e: &Expr, ctx: &Ctx) -> Result<Wire, ConvertError> {
        if let Some(k) = self.constant_of(e)? {
            return Ok(self.constant(k, ctx));
        }
        match e {
            Expr::Var(v) => match self.vars.get(v).cloned() {
                Some(base) => Ok(self.steered(&base, ctx)),
                None => Err(self.unsupported(format!("variable `{v}` is not a value variable"))),
            },
            Expr::Neg(a) => {
                let a = self.value(a, ctx)?;
                Ok(self.unary(&a, NodeKind::Arith { op: ArithOp::Mul, rhs: Some(-1) }))
            }
            Expr::Arith(op, a, b) => {
                let (ka, kb) = (self.constant_of(a)?, self.constant_of(b)?);
                match (ka, kb) {
                    (_, Some(k)) => {
                        let a = self.value(a, ctx)?;
                        Ok(self.unary(&a, NodeKind::Arith { op: *op, rhs: Some(k) }))
                    }
                    (Some(k), None) => {
                        let b = self.value(b, ctx)?;
                        match op {
                            ArithOp::Add | ArithOp::Mul => Ok(self.unary(&b, NodeKind::Arith { op: *op, rhs: Some(k) })),
                            ArithOp::Sub => {
                                let neg = self.unary(&b, NodeKind::Arith { op: ArithOp::Mul, rhs: Some(-1) });
                                Ok(self.unary(&neg, NodeKind::Arith { op: ArithOp::Add, rhs: Some(k) }))
                            }
                            ArithOp::Div => Err(self.unsupported("division of a constant by a variable")),
                        }
                    }
                    (None, None) => {
                        let (a, b) = (self.value(a, ctx)?, self.value(b, ctx)?);
                        Ok(self.binary(&a, &b, NodeKind::Arith { op: *op, rhs: None }))
                    }
                }
            }
            Expr::Cmp(..) | Expr::And(..) | Expr::Or(..) | Expr::Not(_) => self.boolean(e, ctx),
            Expr::Int(_) | Expr::Label(_) => unreachable!("constants handled above"),
        }
    }

    fn boolean(&mut self, e: &Expr, ctx: &Ctx) -> Result<Wire, ConvertError> {
        if let Some(k) = self.constant_of(e)? {
            return Ok(self.constant(Value::from(k != 0), ctx));
        }
        match e {
            Expr::Cmp(op, a, b) => {
                let (ka, kb) = (self.constant_of(a)?, self.constant_of(b)?);
                match (ka, kb) {
                    (_, Some(k)) => {
                        let a = self.value(a, ctx)?;
                        Ok(self.unary(&a, NodeKind::Compare { op: *op, rhs: Some(k) }))
                    }
                    (Some(k), None) => {
                        let b = self.value(b, ctx)?;
                        Ok(self.unary(&b, NodeKind::Compare { op: op.flip(), rhs: Some(k) }))
                    }
                    (None, None) => {
                        let (a, b) = (self.value(a, ctx)?, self.value(b, ctx)?);
                        Ok(self.binary(&a, &b, NodeKind::Compare { op: *op, rhs: None }))
                    }
                }
            }
            Expr::And(a, b) => {
                let (a, b) = (self.boolean(a, ctx)?, self.boolean(b, ctx)?);
                Ok(self.binary(&a, &b, NodeKind::Arith { op: ArithOp::Mul, rhs: None }))
            }
            Expr::Or(a, b) => {
                let (a, b) = (self.boolean(a, ctx)?, self.boolean(b, ctx)?);
                let sum = self.binary(&a, &b, NodeKind::Arith { op: ArithOp::Add, rhs: None });
                Ok(self.unary(&sum, NodeKind::Compare { op: CmpOp::Gt, rhs: Some(0) }))
            }
            Expr::Not(a) => {
                let a = self.boolean(a, ctx)?;
                Ok(self.unary(&a, NodeKind::Compare { op: CmpOp::Eq, rhs: Some(0) }))
            }
            other => {
                let v = self.value(other, ctx)?;
                Ok(self.unary(&v, NodeKind::Compare { op: CmpOp::Ne, rhs: Some(0) }))
            }
        }
    }

    fn output_label(&mut self, e: &Expr) -> Result<Option<Label>, ConvertError> {
        match e {
            Expr::Label(l) => Ok(Some(l.clone())),
            Expr::Var(v) if self.r.replace.iter().any(|p| p.label == LabelSlot::Var(v.clone())) => {
                self.warn(format!("output label `{v}` is copied from the matched element; its edge gets a generated label"));
                Ok(None)
            }
            other => Err(self.unsupported(format!("output label `{}` is not a label literal", crate::gamma::print_expr(other)))),
        }
    }

    fn warn_inctag(&mut self) {
        self.warn(format!(
            "reaction `{}` advances the tag; it is rebuilt as an Inctag node and the enclosing loop is not recoverable",
            self.r.name
        ));
    }

    fn emit_clause(&mut self, c: &ByClause, ctx: &Ctx) -> Result<(), ConvertError> {
        for t in &c.outputs {
            let mut w = self.value(&t.value, ctx)?;
            match tag_use(self.r, &t.tag) {
                Some(TagUse::Same) => {}
                Some(TagUse::Next) => {
                    self.warn_inctag();
                    w = self.unary(&w, NodeKind::Inctag);
                }
                None => {
                    return Err(self.unsupported(format!(
                        "output tag `{}` is neither the input tag nor the input tag plus one",
                        crate::gamma::print_expr(&t.tag)
                    )))
                }
            }
            let label = self.output_label(&t.label)?;
            self.sink(&w, label);
        }
        Ok(())
    }

    fn tag_increment(&mut self, alts: Vec<Label>) {
        self.warn_inctag();
        let inc = self.node("inctag", NodeKind::Inctag);
        let mut nodes = Vec::new();
        for l in alts {
            let src = self.node("in", NodeKind::Source(None));
            self.connect(&(src.clone(), OutPort::Out), &inc, 0, Some(l.clone()));
            nodes.push((src, Some(l)));
        }
        self.report.slots.push(SourceSlot {
            pattern: 0,
            nodes,
            value: None,
        });
        let w = (inc, OutPort::Out);
        for t in &self.r.clauses[0].outputs {
            let Expr::Label(l) = &t.label else { unreachable!("checked by classification") };
            self.sink(&w, Some(l.clone()));
        }
    }

    fn general(&mut self, shape: ReactionShape) -> Result<(), ConvertError> {
        self.add_sources();
        let clauses = &self.r.clauses;
        match &clauses[..] {
            [c] if c.guard.is_none() => self.emit_clause(c, &None)?,
            [c1, c2] if shape == ReactionShape::Compare => {
                let _ = c2;
                let ctl = self.boolean(c1.guard.as_ref().expect("guarded"), &None)?;
                for t in &c1.outputs {
                    let label = self.output_label(&t.label)?;
                    self.sink(&ctl, label);
                }
            }
            [c1, c2] if complementary(c1, c2) => {
                let ctl = self.boolean(c1.guard.as_ref().expect("guarded"), &None)?;
                self.emit_clause(c1, &Some((ctl.clone(), OutPort::True)))?;
                self.emit_clause(c2, &Some((ctl, OutPort::False)))?;
            }
            _ => {
                if clauses.last().is_some_and(|c| c.guard.is_some()) {
                    self.warn(format!(
                        "reaction `{}`: when no guard holds the graph still consumes its inputs",
                        self.r.name
                    ));
                }
                let mut earlier: Vec<Expr> = Vec::new();
                for c in clauses {
                    let mut parts: Vec<Expr> = earlier.iter().map(|g| Expr::Not(Box::new(g.clone()))).collect();
                    if let Some(g) = &c.guard {
                        parts.push(g.clone());
                        earlier.push(g.clone());
                    }
                    if c.is_null() {
                        continue;
                    }
                    let cond = parts
                        .into_iter()
                        .reduce(|a, b| Expr::And(Box::new(a), Box::new(b)))
                        .expect("a later clause follows a guarded one");
                    let ctl = self.boolean(&cond, &None)?;
                    self.emit_clause(c, &Some((ctl, OutPort::True)))?;
                }
            }
        }
        // Elements the reaction consumes without using still need a consumer.
        for (i, w) in self.sources.clone().iter().enumerate() {
            if self.g.out_edges(&w.0).next().is_none() {
                let n = self.node("drop", NodeKind::Sink);
                let l = self.connect(w, &n, 0, self.literal_labels.get(&w.0).cloned());
                self.drops.insert(l);
                self.warn(format!("pattern {} is consumed without being used; it feeds a discarding sink", i + 1));
            }
        }
        Ok(())
    }
}

/// Rebuilds the dataflow graph computing one reaction.
///
/// Each pattern becomes a Source (one per accepted label for tag-increment
/// reactions) and each produced tuple a Sink. Guards are compiled to
/// Compare/Arith nodes whose result steers the clause's inputs; unguarded
/// clauses wire arithmetic directly from the Sources.
pub fn gamma_reaction_to_dataflow(r: &Reaction) -> Result<(DataflowGraph, ConversionReport), ConvertError> {
    let shape = classify_reaction(r);
    let mut b = Builder::new(r);
    match (shape, is_tag_increment(r)) {
        (ReactionShape::TagIncrement, Some(alts)) => b.tag_increment(alts),
        _ => b.general(shape)?,
    }
    let violations = validate_graph(&b.g);
    if !violations.is_empty() {
        return Err(ConvertError::InvalidGraph(violations));
    }
    let Builder { g, mut report, .. } = b;
    for n in g.nodes() {
        let produced: Vec<Label> = g.out_edges(&n.id).map(|e| e.label.clone()).collect();
        if !produced.is_empty() {
            report.label_map.insert(n.id.clone(), produced);
        }
    }
    report.source_summary = format!(
        "reaction {} ({shape}): {} patterns, {} clauses",
        r.name,
        r.replace.len(),
        r.clauses.len()
    );
    report.target_summary = format!("dataflow graph: {} nodes, {} edges ({})", g.node_count(), g.edge_count(), kind_counts(&g));
    Ok((g, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::serialize_graph;
    use crate::element::label;
    use crate::exec::{run, source_inputs};
    use crate::fixtures;
    use crate::gamma::parse_reaction;

    fn shapes(p: &crate::gamma::Program) -> Vec<ReactionShape> {
        p.reactions.iter().map(classify_reaction).collect()
    }

    #[test]
    fn fixture_program_shapes() {
        use ReactionShape::*;
        assert_eq!(shapes(&fixtures::example1_program()), [Arith, Arith, Arith]);
        assert_eq!(
            shapes(&fixtures::example2_program()),
            [TagIncrement, TagIncrement, TagIncrement, Compare, Steer, Steer, Steer, Arith, Arith]
        );
    }

    #[test]
    fn r1_is_two_sources_into_add() {
        let p = fixtures::example1_program();
        let (g, report) = gamma_reaction_to_dataflow(&p.reactions[0]).unwrap();
        assert_eq!(
            serialize_graph(&g),
            "node R1_add3 add\nnode R1_in1 source\nnode R1_in2 source\nnode R1_out4 sink\n\
             edge A1 R1_in1 R1_add3\nedge B1 R1_in2 R1_add3.1\nedge B2 R1_add3 R1_out4\n"
        );
        assert!(report.warnings.is_empty());
        assert_eq!(report.terminal_labels.iter().collect::<Vec<_>>(), [&label("B2")]);
    }

    #[test]
    fn r16_steer_under_eq_one() {
        let p = fixtures::example2_program();
        let (g, _) = gamma_reaction_to_dataflow(p.reaction("R16").unwrap()).unwrap();
        let cmp: Vec<_> = g.nodes().filter(|n| matches!(n.kind, NodeKind::Compare { .. })).collect();
        assert_eq!(cmp.len(), 1);
        assert_eq!(cmp[0].kind, NodeKind::Compare { op: CmpOp::Eq, rhs: Some(1) });
        let steer = g.nodes().find(|n| n.kind == NodeKind::Steer).unwrap();
        assert_eq!(g.inputs_of(&steer.id)[1], [g.outputs_of(&cmp[0].id, OutPort::Out)[0].clone()]);
        assert_eq!(g.outputs_of(&steer.id, OutPort::True), [label("B17")]);
        assert!(g.outputs_of(&steer.id, OutPort::False).is_empty());
    }

    #[test]
    fn passthrough_uses_copy_free_wire() {
        let r = parse_reaction("R = replace [x,'A',0] by [x,'B',0]").unwrap();
        let (g, _) = gamma_reaction_to_dataflow(&r).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn tag_increment_warns() {
        let p = fixtures::example2_program();
        let (g, report) = gamma_reaction_to_dataflow(p.reaction("R11").unwrap()).unwrap();
        assert_eq!(g.count_kind(|k| *k == NodeKind::Inctag), 1);
        assert_eq!(report.slots[0].nodes.len(), 2);
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn compare_shape_fans_out() {
        let p = fixtures::example2_program();
        let (g, _) = gamma_reaction_to_dataflow(p.reaction("R14").unwrap()).unwrap();
        assert_eq!(g.count_kind(|k| matches!(k, NodeKind::Compare { op: CmpOp::Gt, rhs: Some(0) })), 1);
        assert_eq!(g.count_kind(|k| *k == NodeKind::Sink), 3);
    }

    fn run_single(r: &Reaction, values: &[(&str, Value)]) -> Vec<(String, Value)> {
        let (g, _) = gamma_reaction_to_dataflow(r).unwrap();
        let assign: Vec<(String, Value)> = values.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let inputs = source_inputs(&g, &assign).unwrap();
        let out = run(&g, &inputs, 1, 1000).unwrap();
        let mut got: Vec<(String, Value)> = out
            .state
            .sinks()
            .iter()
            .flat_map(|(l, es)| es.iter().map(move |e| (l.to_string(), e.value)))
            .collect();
        got.sort();
        got
    }

    #[test]
    fn general_clauses_compute() {
        let r = parse_reaction(
            "R = replace [a,'A'],[b,'B'] by [a - b,'D'], [7,'E'] if a > b and not (b == 0) by [10 - a,'F'] if a == b by 0 else",
        )
        .unwrap();
        assert_eq!(run_single(&r, &[("R_in1", 5), ("R_in2", 2)]), [("D".into(), 3), ("E".into(), 7)]);
        assert_eq!(run_single(&r, &[("R_in1", 4), ("R_in2", 4)]), [("F".into(), 6)]);
        assert!(run_single(&r, &[("R_in1", 1), ("R_in2", 4)]).is_empty());
        assert!(run_single(&r, &[("R_in1", 5), ("R_in2", 0)]).is_empty());
    }

    #[test]
    fn constant_divided_by_variable_is_unsupported() {
        let r = parse_reaction("R = replace [a,'A'] by [10 / a,'B']").unwrap();
        assert!(matches!(gamma_reaction_to_dataflow(&r), Err(ConvertError::Unsupported { .. })));
    }

    #[test]
    fn label_var_output_is_generated() {
        let p = fixtures::min_program();
        let (g, report) = gamma_reaction_to_dataflow(&p.reactions[0]).unwrap();
        assert!(!report.warnings.is_empty());
        assert_eq!(g.count_kind(|k| *k == NodeKind::Steer), 1);
        assert_eq!(report.slots.len(), 2);
    }
}
