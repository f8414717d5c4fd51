use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;
use gammaflow_core::convert::{
    dataflow_to_gamma, fuse_chain, gamma_reaction_to_dataflow, instantiate_for_multiset,
    link_reaction_graphs,
};
use gammaflow_core::dataflow::{export_dot, export_dot_named, serialize_graph, ArithOp, DataflowGraph};
use gammaflow_core::equiv::{check_equivalence_with, Observable, Verdict};
use gammaflow_core::exec::{self, RunStatus, DEFAULT_MAX_STEPS};
use gammaflow_core::gamma::{print_program, Expr, Program};
use gammaflow_core::multiset::Multiset;
use gammaflow_core::rewrite::{run_with, GammaConfig, DEFAULT_MAX_REACTIONS};

use crate::input::{self, FileType, Loaded};
use crate::{CheckArgs, ConvertArgs, Direction, DotArgs, Failure, Format, RunArgs};

pub struct Ctx {
    pub format: Format,
    pub file_type: Option<FileType>,
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => Ok(fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn graph_summary(g: &DataflowGraph) -> String {
    let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
    for n in g.nodes().filter(|n| n.kind.is_operator()) {
        *kinds.entry(n.kind.short_name()).or_default() += 1;
    }
    let ops: usize = kinds.values().sum();
    let detail: Vec<String> = kinds.iter().map(|(k, n)| format!("{n} {k}")).collect();
    format!(
        "graph: {} nodes, {} operators ({}), {} edges",
        g.node_count(),
        ops,
        detail.join(", "),
        g.edge_count()
    )
}

fn program_summary(p: &Program) -> String {
    format!("program: {} reactions, {} initial elements", p.reactions.len(), p.initial.len())
}

pub fn parse(ctx: &Ctx, path: &Path) -> Result<(), Failure> {
    let text = match (input::load(path, ctx.file_type)?, ctx.format) {
        (Loaded::Graph(g), Format::Text) => format!("{}# {}\n", serialize_graph(&g), graph_summary(&g)),
        (Loaded::Graph(g), Format::Summary) => format!("{}\n", graph_summary(&g)),
        (Loaded::Program(p), Format::Text) => print_program(&p),
        (Loaded::Program(p), Format::Summary) => format!("{}\n", program_summary(&p)),
        (Loaded::Elements(es), Format::Text) => es.iter().map(|e| format!("{e}\n")).collect(),
        (Loaded::Elements(es), Format::Summary) => format!("multiset: {} elements\n", es.len()),
    };
    emit(None, &text)
}

fn reaction_graphs(p: &Program, instantiate: bool) -> Result<Vec<(String, DataflowGraph)>, Failure> {
    let m: Multiset = p.initial.iter().cloned().collect();
    let mut out = Vec::new();
    for r in &p.reactions {
        let (g, report) = gamma_reaction_to_dataflow(r).map_err(Failure::usage)?;
        for w in &report.warnings {
            eprintln!("warning: {}: {w}", r.name);
        }
        if instantiate {
            let inst = instantiate_for_multiset(&g, &report, &m);
            eprintln!("{}: {} instance(s), {} element(s) unassigned", r.name, inst.instances, inst.leftovers.len());
            out.push((r.name.clone(), inst.graph));
        } else {
            out.push((r.name.clone(), g));
        }
    }
    Ok(out)
}

pub fn convert(ctx: &Ctx, a: &ConvertArgs) -> Result<(), Failure> {
    let loaded = input::load(&a.path, ctx.file_type)?;
    let direction = a.direction.unwrap_or(match loaded {
        Loaded::Program(_) => Direction::Gamma2df,
        _ => Direction::Df2gamma,
    });
    match (direction, loaded) {
        (Direction::Df2gamma, Loaded::Graph(g)) => {
            if a.instantiate || a.link {
                return Err(Failure::usage("--instantiate and --link apply to gamma2df"));
            }
            let inputs = input::graph_inputs(&g, &a.inputs)?;
            let (mut p, report) = dataflow_to_gamma(&g, &inputs).map_err(Failure::usage)?;
            if a.fuse {
                p = fuse_chain(&p);
            }
            match ctx.format {
                Format::Text => eprint!("{report}"),
                Format::Summary => eprintln!("{}", program_summary(&p)),
            }
            emit(a.output.as_deref(), &print_program(&p))
        }
        (Direction::Gamma2df, Loaded::Program(mut p)) => {
            input::apply_program_inputs(&mut p, &a.inputs)?;
            if a.fuse {
                p = fuse_chain(&p);
            }
            if a.link {
                let (g, report) = link_reaction_graphs(&p).map_err(Failure::usage)?;
                match ctx.format {
                    Format::Text => eprint!("{report}"),
                    Format::Summary => eprintln!("{}", graph_summary(&g)),
                }
                return emit(a.output.as_deref(), &serialize_graph(&g));
            }
            let graphs = reaction_graphs(&p, a.instantiate)?;
            if let Some(dir) = &a.output {
                fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
                for (name, g) in &graphs {
                    emit(Some(&dir.join(format!("{name}.df"))), &serialize_graph(g))?;
                }
                if ctx.format == Format::Summary {
                    for (name, g) in &graphs {
                        println!("{name}: {}", graph_summary(g));
                    }
                }
                return Ok(());
            }
            let mut text = String::new();
            for (i, (name, g)) in graphs.iter().enumerate() {
                if i > 0 {
                    text.push('\n');
                }
                match ctx.format {
                    Format::Text => {
                        let _ = write!(text, "# reaction {name}\n{}", serialize_graph(g));
                    }
                    Format::Summary => {
                        let _ = writeln!(text, "{name}: {}", graph_summary(g));
                    }
                }
            }
            emit(None, &text)
        }
        (Direction::Df2gamma, _) => Err(Failure::usage("df2gamma needs a graph file")),
        (Direction::Gamma2df, _) => Err(Failure::usage("gamma2df needs a Gamma program")),
    }
}

fn budget_exit(status: RunStatus) -> Result<(), Failure> {
    match status {
        RunStatus::Terminated => Ok(()),
        RunStatus::BudgetExhausted => Err(Failure { code: Failure::BUDGET, message: String::new() }),
    }
}

pub fn run(ctx: &Ctx, a: &RunArgs) -> Result<(), Failure> {
    let mut out = String::new();
    let status = match input::load(&a.path, ctx.file_type)? {
        Loaded::Graph(g) => {
            let inputs = input::graph_inputs(&g, &a.inputs)?;
            let run = exec::run(&g, &inputs, a.seed, a.max_steps.unwrap_or(DEFAULT_MAX_STEPS))
                .map_err(Failure::fault)?;
            let sinks = run.state.sinks().iter().flat_map(|(l, es)| es.iter().map(move |e| (l.clone(), e.value)));
            let observed = Observable::new(sinks.collect());
            match ctx.format {
                Format::Text => {
                    if a.trace {
                        for (i, f) in run.trace.iter().enumerate() {
                            let _ = writeln!(out, "{}: {} @ {}", i + 1, f.node, f.tag);
                        }
                    }
                    let _ = writeln!(out, "status: {}", run.status);
                    let _ = writeln!(out, "steps: {}", run.state.steps());
                    let _ = writeln!(out, "sinks: {observed}");
                    let left: Vec<String> = run.state.store().elements().map(|e| e.to_string()).collect();
                    if !left.is_empty() {
                        let _ = writeln!(out, "unconsumed: {}", left.join(" "));
                    }
                }
                Format::Summary => {
                    let _ = writeln!(out, "{} {} {observed}", run.status, run.state.steps());
                }
            }
            run.status
        }
        Loaded::Program(mut p) => {
            input::apply_program_inputs(&mut p, &a.inputs)?;
            let m0: Multiset = p.initial.iter().cloned().collect();
            let cfg = GammaConfig {
                seed: a.seed,
                max_reactions: a.max_steps.unwrap_or(DEFAULT_MAX_REACTIONS),
                cap: a.cap,
            };
            let run = run_with(&p, &m0, &cfg).map_err(Failure::fault)?;
            match ctx.format {
                Format::Text => {
                    if a.trace {
                        for (i, t) in run.trace.iter().enumerate() {
                            let _ = writeln!(out, "{}: {t}", i + 1);
                        }
                    }
                    let _ = writeln!(out, "status: {}", run.status);
                    let _ = writeln!(out, "steps: {}", run.trace.len());
                    let _ = writeln!(out, "multiset: {}", run.multiset);
                }
                Format::Summary => {
                    let _ = writeln!(out, "{} {} {}", run.status, run.trace.len(), run.multiset);
                }
            }
            run.status
        }
        Loaded::Elements(_) => return Err(Failure::usage("an element file cannot be run")),
    };
    emit(None, &out)?;
    budget_exit(status)
}

fn corrupt(p: &mut Program) {
    let first = p
        .reactions
        .iter_mut()
        .flat_map(|r| r.clauses.iter_mut())
        .flat_map(|c| c.outputs.iter_mut())
        .next();
    if let Some(t) = first {
        t.value = Expr::arith(ArithOp::Add, t.value.clone(), Expr::Int(1));
    }
}

pub fn check_equiv(ctx: &Ctx, a: &CheckArgs) -> Result<(), Failure> {
    let (g, inputs) = match input::load(&a.path, ctx.file_type)? {
        Loaded::Graph(g) => {
            let inputs = input::graph_inputs(&g, &a.inputs)?;
            (g, inputs)
        }
        Loaded::Program(mut p) => {
            input::apply_program_inputs(&mut p, &a.inputs)?;
            let (g, _) = link_reaction_graphs(&p).map_err(Failure::usage)?;
            let inputs = exec::source_inputs(&g, &[]).map_err(Failure::usage)?;
            (g, inputs)
        }
        Loaded::Elements(_) => return Err(Failure::usage("an element file cannot be checked")),
    };
    let report = check_equivalence_with(&g, &inputs, &a.seeds.0, a.max_steps, |p| {
        if a.corrupt {
            corrupt(p);
        }
    })
    .map_err(Failure::usage)?;
    emit(
        None,
        &match ctx.format {
            Format::Text => report.render(),
            Format::Summary => report.summary(),
        },
    )?;
    if report.count(Verdict::Diverge) > 0 {
        Err(Failure { code: Failure::DIVERGENCE, message: "the two models disagree".into() })
    } else if report.has_fault() {
        Err(Failure::fault("a run faulted"))
    } else if report.has_budget_exhaustion() {
        Err(Failure { code: Failure::BUDGET, message: "a run exhausted its budget".into() })
    } else {
        Ok(())
    }
}

pub fn dot(ctx: &Ctx, a: &DotArgs) -> Result<(), Failure> {
    let text = match input::load(&a.path, ctx.file_type)? {
        Loaded::Graph(g) => export_dot(&g),
        Loaded::Program(p) if a.link => {
            let (g, _) = link_reaction_graphs(&p).map_err(Failure::usage)?;
            export_dot(&g)
        }
        Loaded::Program(p) => reaction_graphs(&p, false)?
            .iter()
            .map(|(name, g)| export_dot_named(g, name))
            .collect(),
        Loaded::Elements(_) => return Err(Failure::usage("an element file has no graph")),
    };
    emit(a.output.as_deref(), &text)
}
