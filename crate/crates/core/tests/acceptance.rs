//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gammaflow_core::convert::{
    classify_reaction, dataflow_to_gamma, fuse_chain, gamma_reaction_to_dataflow,
    instantiate_for_multiset, link_reaction_graphs, ReactionShape,
};
use gammaflow_core::dataflow::{isomorphic, ArithOp, CmpOp, DataflowGraph, NodeKind, OutPort};
use gammaflow_core::equiv::{check_equivalence, observe_gamma, Observable};
use gammaflow_core::exec::{run, source_inputs};
use gammaflow_core::fixtures;
use gammaflow_core::gamma::{
    alpha_equivalent, parse_program, parse_reaction, print_program, print_reaction, Expr, Program,
};
use gammaflow_core::multiset::Multiset;
use gammaflow_core::rewrite::{exhaustive_terminals, run_to_fixpoint, DEFAULT_EXPLORE_BOUND};
use gammaflow_core::{elem, label, Element, Value};

const BUDGET: u64 = 100_000;
const TIME_LIMIT: Duration = Duration::from_secs(5);

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);
type Fixture = (&'static str, DataflowGraph, Vec<(String, Value)>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn obs(pairs: &[(&str, Value)]) -> Observable {
    Observable::new(pairs.iter().map(|(l, v)| (label(l), *v)).collect())
}

fn initial(p: &Program) -> Multiset {
    p.initial.iter().cloned().collect()
}

fn seeds(n: u64) -> Vec<u64> {
    (1..=n).collect()
}

/// Runs an equivalence check and requires every seed pair to agree on `expected`.
fn agree_on(g: &DataflowGraph, inputs: &[Element], n: u64, expected: &Observable) -> Check {
    let rep = check_equivalence(g, inputs, &seeds(n), BUDGET).map_err(err)?;
    let (df, gm) = rep.observables();
    ensure!(rep.all_agree(), "not all pairs agree:\n{}", rep.render());
    ensure!(
        df.len() == 1 && gm.len() == 1 && df.contains(expected) && gm.contains(expected),
        "observables {df:?} / {gm:?}, expected {expected}"
    );
    ensure!(rep.gamma.iter().all(|r| r.steady), "gamma run stopped before a steady state");
    Ok(format!("{} pairs agree on {expected}", rep.pairs.len()))
}

fn example1_fidelity() -> Check {
    let g = fixtures::example1_graph();
    let inputs = source_inputs(&g, &[]).map_err(err)?;
    let (p, report) = dataflow_to_gamma(&g, &inputs).map_err(err)?;
    ensure!(p.reactions.len() == 3, "{} reactions", p.reactions.len());
    ensure!(report.label_map_is_injective(), "label map is not injective");
    let reference = fixtures::example1_program();
    ensure!(
        print_program(&p) == print_program(&reference),
        "converted program differs from the fixture program:\n{}",
        print_program(&p)
    );
    let expected_m0: Multiset =
        [elem(1, "A1", 0), elem(5, "B1", 0), elem(3, "C1", 0), elem(2, "D1", 0)].into_iter().collect();
    ensure!(initial(&p) == expected_m0, "initial multiset {}", initial(&p));
    agree_on(&g, &inputs, 20, &obs(&[("m", 0)]))
}

fn shape_counts(p: &Program) -> [usize; 4] {
    let mut c = [0; 4];
    for r in &p.reactions {
        match classify_reaction(r) {
            ReactionShape::TagIncrement => c[0] += 1,
            ReactionShape::Compare => c[1] += 1,
            ReactionShape::Steer => c[2] += 1,
            ReactionShape::Arith => c[3] += 1,
            ReactionShape::General => {}
        }
    }
    c
}

fn example2_fidelity() -> Check {
    let g = fixtures::example2_graph();
    let inputs = source_inputs(&g, &fixtures::example2_inputs(4, 3, 2)).map_err(err)?;
    let (p, _) = dataflow_to_gamma(&g, &inputs).map_err(err)?;
    ensure!(p.reactions.len() == 9, "{} reactions", p.reactions.len());
    ensure!(shape_counts(&p) == [3, 1, 3, 2], "shape counts {:?}", shape_counts(&p));
    let reference = fixtures::example2_program();
    for r in &p.reactions {
        let l = reference.reaction(&r.name).ok_or(format!("{} not in the fixture program", r.name))?;
        ensure!(classify_reaction(r) == classify_reaction(l), "{} shape differs from the fixture program", r.name);
    }
    let cmp = p
        .reactions
        .iter()
        .find(|r| classify_reaction(r) == ReactionShape::Compare)
        .expect("counted above");
    ensure!(
        cmp.clauses.len() == 2 && cmp.clauses.iter().all(|c| c.outputs.len() == 3),
        "{} does not replicate its result three times",
        cmp.name
    );
    let guard = cmp.clauses[0].guard.as_ref().ok_or("compare clause unguarded")?;
    ensure!(
        matches!(guard, Expr::Cmp(_, a, b) if **a == Expr::Int(0) || **b == Expr::Int(0)),
        "{} does not compare against zero",
        cmp.name
    );
    for r in p.reactions.iter().filter(|r| classify_reaction(r) == ReactionShape::Steer) {
        ensure!(r.clauses.len() == 2, "{} has {} clauses", r.name, r.clauses.len());
    }
    let a = agree_on(&g, &inputs, 20, &obs(&[("C14", 14)]))?;
    let zero = source_inputs(&g, &fixtures::example2_inputs(4, 0, 2)).map_err(err)?;
    let b = agree_on(&g, &zero, 20, &obs(&[("C14", 2)]))?;
    Ok(format!("{a}; z=0: {b}"))
}

fn fusion() -> Check {
    let p = fixtures::example1_program();
    let fused = fuse_chain(&p);
    ensure!(fused.reactions.len() == 1, "{} reactions after fusion", fused.reactions.len());
    let rd1 = &fixtures::example1_reduced_program().reactions[0];
    ensure!(
        alpha_equivalent(&fused.reactions[0], rd1),
        "fused reaction differs from Rd1:\n{}",
        print_reaction(&fused.reactions[0])
    );
    let terminals = BTreeSet::from([label("m")]);
    let mut results = BTreeSet::new();
    for prog in [&p, &fused] {
        for seed in seeds(20) {
            let out = run_to_fixpoint(prog, &initial(prog), seed, BUDGET).map_err(err)?;
            results.insert(observe_gamma(&out.multiset, &terminals).0);
        }
    }
    ensure!(results == BTreeSet::from([obs(&[("m", 0)])]), "observables {results:?}");
    Ok(format!("{} reaction: {}", fused.reactions.len(), print_reaction(&fused.reactions[0]).trim()))
}

fn reconstruction() -> Check {
    let p = fixtures::example1_program();
    let ops = [ArithOp::Add, ArithOp::Mul, ArithOp::Sub];
    for (r, op) in p.reactions.iter().zip(ops) {
        let (g, _) = gamma_reaction_to_dataflow(r).map_err(err)?;
        let sources = g.count_kind(|k| matches!(k, NodeKind::Source(_)));
        let arith = g.count_kind(|k| *k == NodeKind::Arith { op, rhs: None });
        let sinks = g.count_kind(|k| *k == NodeKind::Sink);
        ensure!(
            (sources, arith, sinks, g.node_count()) == (2, 1, 1, 4),
            "{}: {sources} sources, {arith} {} nodes, {sinks} sinks",
            r.name,
            op.name()
        );
    }
    let (linked, _) = link_reaction_graphs(&p).map_err(err)?;
    ensure!(isomorphic(&linked, &fixtures::example1_graph()), "linked R1-R3 not isomorphic to the fixture graph");

    let r16 = fixtures::example2_program().reaction("R16").cloned().ok_or("R16 missing")?;
    let (g, _) = gamma_reaction_to_dataflow(&r16).map_err(err)?;
    let steers: Vec<_> = g.nodes().filter(|n| n.kind == NodeKind::Steer).collect();
    ensure!(steers.len() == 1, "{} steers for R16", steers.len());
    let control = g.inputs_of(&steers[0].id)[1].clone();
    ensure!(control.len() == 1, "steer control has {} edges", control.len());
    let from = &g.edge(&control[0]).expect("input edge").from;
    ensure!(
        g.node(from).map(|n| &n.kind) == Some(&NodeKind::Compare { op: CmpOp::Eq, rhs: Some(1) }),
        "steer control comes from {from}, not an == 1 compare"
    );
    ensure!(!g.outputs_of(&steers[0].id, OutPort::True).is_empty(), "steer true port unused");
    Ok("R1-R3 give add/mul/sub with two sources each and relink to the fixture graph; R16 gives steer <- eq 1".into())
}

fn instantiation() -> Check {
    let min = &fixtures::min_program().reactions[0];
    let (g, report) = gamma_reaction_to_dataflow(min).map_err(err)?;
    let m: Multiset = [3, 8, 1, 6, 2, 7].iter().map(|&v| elem(v, "e", 0)).collect();
    let inst = instantiate_for_multiset(&g, &report, &m);
    ensure!(inst.instances == 3, "{} instances", inst.instances);
    ensure!(inst.leftovers.is_empty(), "leftovers {:?}", inst.leftovers);

    let r1 = &fixtures::example1_program().reactions[0];
    let (g, report) = gamma_reaction_to_dataflow(r1).map_err(err)?;
    let m: Multiset = [(1, "A1"), (2, "A1"), (3, "A1"), (4, "B1"), (5, "B1"), (6, "B1")]
        .iter()
        .map(|&(v, l)| elem(v, l, 0))
        .collect();
    let inst = instantiate_for_multiset(&g, &report, &m);
    ensure!(inst.instances == 3, "R1: {} instances", inst.instances);
    ensure!(inst.graph.node_count() == 3 * g.node_count(), "R1: {} nodes", inst.graph.node_count());
    Ok("3 copies for the min reaction and for R1".into())
}

fn min_program() -> Check {
    let p = fixtures::min_program();
    let m0 = initial(&p);
    let expected: Multiset = [elem(2, "e", 0)].into_iter().collect();
    let terminals = exhaustive_terminals(&p, &m0, DEFAULT_EXPLORE_BOUND).map_err(err)?;
    ensure!(terminals == BTreeSet::from([expected.clone()]), "terminals {terminals:?}");
    for seed in 0..100 {
        let out = run_to_fixpoint(&p, &m0, seed, BUDGET).map_err(err)?;
        ensure!(out.multiset == expected, "seed {seed} ends in {}", out.multiset);
    }
    Ok(format!("exhaustive and 100 seeds give {expected}"))
}

fn single_terminal(name: &str, p: &Program) -> Check {
    let terminals = exhaustive_terminals(p, &initial(p), DEFAULT_EXPLORE_BOUND).map_err(err)?;
    ensure!(terminals.len() == 1, "{name}: {} terminals", terminals.len());
    Ok(format!("{name} -> {}", terminals.into_iter().next().expect("one")))
}

fn confluence() -> Check {
    let mut lines = Vec::new();
    let g1 = fixtures::example1_graph();
    let (p1, _) = dataflow_to_gamma(&g1, &source_inputs(&g1, &[]).map_err(err)?).map_err(err)?;
    lines.push(single_terminal("example1", &p1)?);
    let g2 = fixtures::example2_graph();
    for z in 0..=2 {
        for (y, x) in [(4, 2), (-3, 5)] {
            let inputs = source_inputs(&g2, &fixtures::example2_inputs(y, z, x)).map_err(err)?;
            let (p2, _) = dataflow_to_gamma(&g2, &inputs).map_err(err)?;
            lines.push(single_terminal(&format!("example2 y={y} z={z} x={x}"), &p2)?);
        }
    }
    Ok(lines.join("; "))
}

fn trace_text(p: &Program, seed: u64) -> Result<String, String> {
    let out = run_to_fixpoint(p, &initial(p), seed, BUDGET).map_err(err)?;
    let mut s: String = out.trace.iter().map(|t| format!("{t}\n")).collect();
    s.push_str(&format!("{} {}\n", out.status, out.multiset));
    Ok(s)
}

fn graph_trace_text(g: &DataflowGraph, inputs: &[Element], seed: u64) -> Result<String, String> {
    let out = run(g, inputs, seed, BUDGET).map_err(err)?;
    Ok(format!("{:?}\n{:?}\n{}", out.trace, out.state.sinks(), out.status))
}

fn determinism() -> Check {
    let graphs: Vec<Fixture> = vec![
        ("example1", fixtures::example1_graph(), vec![]),
        ("example2", fixtures::example2_graph(), fixtures::example2_inputs(4, 3, 2)),
    ];
    let mut checked = 0;
    for (name, g, assign) in &graphs {
        let inputs = source_inputs(g, assign).map_err(err)?;
        let (translated, _) = dataflow_to_gamma(g, &inputs).map_err(err)?;
        for seed in [0, 7, 12345] {
            ensure!(
                graph_trace_text(g, &inputs, seed)? == graph_trace_text(g, &inputs, seed)?,
                "{name}: dataflow trace differs for seed {seed}"
            );
            ensure!(
                trace_text(&translated, seed)? == trace_text(&translated, seed)?,
                "{name}: gamma trace differs for seed {seed}"
            );
            checked += 2;
        }
        let a = check_equivalence(g, &inputs, &seeds(10), BUDGET).map_err(err)?;
        let b = check_equivalence(g, &inputs, &seeds(10), BUDGET).map_err(err)?;
        ensure!(
            a.render() == b.render() && a.summary() == b.summary(),
            "{name}: equivalence report differs between identical runs"
        );
        let (df, gm) = a.observables();
        ensure!(df.len() == 1 && df == gm, "{name}: observables vary with the seed");
    }
    for (name, p) in fixtures::all_programs() {
        for seed in [0, 7, 12345] {
            ensure!(trace_text(&p, seed)? == trace_text(&p, seed)?, "{name}: trace differs for seed {seed}");
            checked += 1;
        }
    }
    Ok(format!("{checked} repeated runs identical"))
}

fn round_trip() -> Check {
    let mut names = Vec::new();
    for (file, p) in fixtures::all_programs() {
        let text = print_program(&p);
        let back = parse_program(&text).map_err(|e| format!("{file}: {e}"))?;
        ensure!(back == p, "{file}: program changed after print and parse");
        for r in &p.reactions {
            let printed = print_reaction(r);
            let again = parse_reaction(&printed).map_err(|e| format!("{}: {e}", r.name))?;
            ensure!(&again == r, "{}: AST changed after print and parse", r.name);
            ensure!(print_reaction(&again) == printed, "{}: print is not stable", r.name);
            names.push(r.name.clone());
        }
    }
    let expected = [
        "R1", "R2", "R3", "Rd1", "R11", "R12", "R13", "R14", "R15", "R16", "R17", "R18", "R19", "Rd11",
        "Rd12", "Rd13", "Rd14", "Rd15", "Rd16", "R",
    ];
    let got: BTreeSet<&str> = names.iter().map(String::as_str).collect();
    let missing: Vec<&str> = expected.iter().copied().filter(|n| !got.contains(n)).collect();
    ensure!(missing.is_empty(), "reactions not covered: {missing:?}");
    Ok(format!("{} reactions", names.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("example 1 fidelity", example1_fidelity),
        ("example 2 fidelity", example2_fidelity),
        ("fusion", fusion),
        ("reconstruction", reconstruction),
        ("instantiation count", instantiation),
        ("min-element program", min_program),
        ("confluence", confluence),
        ("determinism", determinism),
        ("parser round trip", round_trip),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > TIME_LIMIT => Err(format!("took {elapsed:.2?}, limit {TIME_LIMIT:?}")),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS {} {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} ({elapsed:.2?}): {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
