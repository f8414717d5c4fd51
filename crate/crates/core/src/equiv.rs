//! Comparing dataflow runs with runs of the translated Gamma program.
//!
//! The observable of a run is the multiset of `(label, value)` pairs that
//! reached a result label, with tags erased.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::convert::{dataflow_to_gamma, ConversionReport, ConvertError};
use crate::dataflow::DataflowGraph;
use crate::element::{Element, Label, Value};
use crate::exec::{run, RunOutcome, RunStatus};
use crate::gamma::Program;
use crate::multiset::Multiset;
use crate::rewrite::{is_steady, run_to_fixpoint};

/// Sorted `(label, value)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Observable(Vec<(Label, Value)>);

impl Observable {
    pub fn new(mut pairs: Vec<(Label, Value)>) -> Self {
        pairs.sort();
        Observable(pairs)
    }

    pub fn pairs(&self) -> &[(Label, Value)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (l, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({l}, {v})")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("run did not terminate ({0})")]
pub struct NotTerminated(pub RunStatus);

/// Sink contents of a terminated dataflow run.
pub fn observe_dataflow(outcome: &RunOutcome<'_>) -> Result<Observable, NotTerminated> {
    if outcome.status != RunStatus::Terminated {
        return Err(NotTerminated(outcome.status));
    }
    Ok(Observable::new(
        outcome
            .state
            .sinks()
            .iter()
            .flat_map(|(l, es)| es.iter().map(move |e| (l.clone(), e.value)))
            .collect(),
    ))
}

/// Splits a terminal multiset into the observable at `terminal_labels` and
/// the residue of every other element.
pub fn observe_gamma(m: &Multiset, terminal_labels: &BTreeSet<Label>) -> (Observable, Vec<Element>) {
    let (hits, residue): (Vec<Element>, Vec<Element>) =
        m.to_vec().into_iter().partition(|e| terminal_labels.contains(&e.label));
    (Observable::new(hits.into_iter().map(|e| (e.label, e.value)).collect()), residue)
}

/// How one side's run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SideOutcome {
    Observed(Observable),
    Budget,
    Fault(String),
}

impl fmt::Display for SideOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SideOutcome::Observed(o) => write!(f, "{o}"),
            SideOutcome::Budget => f.write_str("budget-exhausted"),
            SideOutcome::Fault(e) => write!(f, "fault: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideRun {
    pub seed: u64,
    pub steps: u64,
    pub outcome: SideOutcome,
    /// Gamma only: non-result elements left at the steady state.
    pub residue: Vec<Element>,
    /// Gamma only: no reaction can fire on the final multiset.
    pub steady: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Agree,
    Diverge,
    /// One side faulted or ran out of budget.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Agree => "agree",
            Verdict::Diverge => "diverge",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivReport {
    pub program: Program,
    pub conversion: ConversionReport,
    pub dataflow: Vec<SideRun>,
    pub gamma: Vec<SideRun>,
    /// `(dataflow seed, gamma seed, verdict)` for every seed pair.
    pub pairs: Vec<(u64, u64, Verdict)>,
}

impl EquivReport {
    pub fn count(&self, v: Verdict) -> usize {
        self.pairs.iter().filter(|p| p.2 == v).count()
    }

    pub fn all_agree(&self) -> bool {
        !self.pairs.is_empty() && self.pairs.iter().all(|p| p.2 == Verdict::Agree)
    }

    pub fn has_fault(&self) -> bool {
        self.dataflow
            .iter()
            .chain(&self.gamma)
            .any(|r| matches!(r.outcome, SideOutcome::Fault(_)))
    }

    pub fn has_budget_exhaustion(&self) -> bool {
        self.dataflow
            .iter()
            .chain(&self.gamma)
            .any(|r| r.outcome == SideOutcome::Budget)
    }

    /// Distinct observables per side.
    pub fn observables(&self) -> (BTreeSet<&Observable>, BTreeSet<&Observable>) {
        fn obs(runs: &[SideRun]) -> BTreeSet<&Observable> {
            runs.iter()
                .filter_map(|r| match &r.outcome {
                    SideOutcome::Observed(o) => Some(o),
                    _ => None,
                })
                .collect()
        }
        (obs(&self.dataflow), obs(&self.gamma))
    }

    /// One line per seed pair: `<seed_df> <seed_gamma> <verdict>`.
    pub fn summary(&self) -> String {
        self.pairs
            .iter()
            .map(|(a, b, v)| format!("{a} {b} {v}\n"))
            .collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (side, runs) in [("dataflow", &self.dataflow), ("gamma", &self.gamma)] {
            for r in runs {
                s.push_str(&format!("{side} seed {}: {} steps, {}", r.seed, r.steps, r.outcome));
                if side == "gamma" && !r.residue.is_empty() {
                    let res: Vec<String> = r.residue.iter().map(ToString::to_string).collect();
                    s.push_str(&format!(", residue {}", res.join(" ")));
                }
                s.push('\n');
            }
        }
        s.push_str(&format!(
            "pairs: {} agree, {} diverge, {} inconclusive\n",
            self.count(Verdict::Agree),
            self.count(Verdict::Diverge),
            self.count(Verdict::Inconclusive)
        ));
        s
    }
}

fn dataflow_side(g: &DataflowGraph, inputs: &[Element], seed: u64, budget: u64) -> SideRun {
    let (steps, outcome) = match run(g, inputs, seed, budget) {
        Err(e) => (0, SideOutcome::Fault(e.to_string())),
        Ok(out) => (
            out.state.steps(),
            match observe_dataflow(&out) {
                Ok(o) => SideOutcome::Observed(o),
                Err(_) => SideOutcome::Budget,
            },
        ),
    };
    SideRun {
        seed,
        steps,
        outcome,
        residue: Vec::new(),
        steady: true,
    }
}

fn gamma_side(p: &Program, terminals: &BTreeSet<Label>, seed: u64, budget: u64) -> SideRun {
    let m0: Multiset = p.initial.iter().cloned().collect();
    match run_to_fixpoint(p, &m0, seed, budget) {
        Err(e) => SideRun {
            seed,
            steps: 0,
            outcome: SideOutcome::Fault(e.to_string()),
            residue: Vec::new(),
            steady: false,
        },
        Ok(out) => {
            let (obs, residue) = observe_gamma(&out.multiset, terminals);
            let steady = is_steady(p, &out.multiset);
            SideRun {
                seed,
                steps: out.trace.len() as u64,
                outcome: if out.status == RunStatus::Terminated {
                    SideOutcome::Observed(obs)
                } else {
                    SideOutcome::Budget
                },
                residue,
                steady,
            }
        }
    }
}

/// [`check_equivalence`] with a hook that may alter the translated program
/// before it runs.
pub fn check_equivalence_with(
    g: &DataflowGraph,
    inputs: &[Element],
    seeds: &[u64],
    budget: u64,
    tamper: impl FnOnce(&mut Program),
) -> Result<EquivReport, ConvertError> {
    let (mut program, conversion) = dataflow_to_gamma(g, inputs)?;
    tamper(&mut program);
    let dataflow: Vec<SideRun> = seeds.iter().map(|&s| dataflow_side(g, inputs, s, budget)).collect();
    let gamma: Vec<SideRun> = seeds
        .iter()
        .map(|&s| gamma_side(&program, &conversion.terminal_labels, s, budget))
        .collect();
    let mut pairs = Vec::new();
    for d in &dataflow {
        for m in &gamma {
            let verdict = match (&d.outcome, &m.outcome) {
                (SideOutcome::Observed(a), SideOutcome::Observed(b)) if a == b => Verdict::Agree,
                (SideOutcome::Observed(_), SideOutcome::Observed(_)) => Verdict::Diverge,
                _ => Verdict::Inconclusive,
            };
            pairs.push((d.seed, m.seed, verdict));
        }
    }
    Ok(EquivReport {
        program,
        conversion,
        dataflow,
        gamma,
        pairs,
    })
}

/// Runs `g` and its Gamma translation under every seed and compares the
/// observables of every (dataflow seed, gamma seed) pair.
pub fn check_equivalence(
    g: &DataflowGraph,
    inputs: &[Element],
    seeds: &[u64],
    budget: u64,
) -> Result<EquivReport, ConvertError> {
    check_equivalence_with(g, inputs, seeds, budget, |_| {})
}

/// Multiset of values per label, for display.
pub fn group_by_label(o: &Observable) -> BTreeMap<&Label, Vec<Value>> {
    let mut out: BTreeMap<&Label, Vec<Value>> = BTreeMap::new();
    for (l, v) in o.pairs() {
        out.entry(l).or_default().push(*v);
    }
    out
}
