//! `gammaflow`: parse, convert, run and compare dataflow graphs and Gamma
//! programs.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 execution fault,
//! 3 divergence between the two models, 4 step budget exhausted.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gammaflow_core::Value;

use input::FileType;

#[derive(Debug, Parser)]
#[command(name = "gammaflow", version, about = "Dynamic dataflow graphs and Gamma programs")]
struct Cli {
    /// Output style.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Input file type; detected from the extension when omitted.
    #[arg(long = "type", global = true, value_enum)]
    file_type: Option<FileType>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Summary,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a file, then print it in canonical form.
    Parse { path: PathBuf },
    /// Convert between graph text and Gamma.
    Convert(ConvertArgs),
    /// Execute a graph or a program.
    Run(RunArgs),
    /// Run a graph and its Gamma translation under several seeds and compare.
    CheckEquiv(CheckArgs),
    /// Print Graphviz DOT for a graph or for each reaction of a program.
    Dot(DotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Df2gamma,
    Gamma2df,
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Value for a source, by node id or output label (repeatable).
    #[arg(long = "set", value_name = "NAME=VALUE", value_parser = parse_assignment)]
    pub set: Vec<(String, Value)>,
    /// Element file: initial tokens for a graph, initial multiset for a program.
    #[arg(long, alias = "multiset", value_name = "FILE")]
    pub inputs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    pub path: PathBuf,
    /// Defaults to df2gamma for graphs and gamma2df for programs.
    #[arg(long, value_enum)]
    pub direction: Option<Direction>,
    /// Fuse producer/consumer chains (after df2gamma, before gamma2df).
    #[arg(long)]
    pub fuse: bool,
    /// Replicate each reaction graph once per group of matching elements.
    #[arg(long, conflicts_with = "link")]
    pub instantiate: bool,
    /// Join the per-reaction graphs into one graph.
    #[arg(long)]
    pub link: bool,
    /// Output file; for unlinked gamma2df, a directory receiving one file per reaction.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub inputs: Inputs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub path: PathBuf,
    #[arg(long, env = "GAMMAFLOW_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Firing (graph) or reaction (program) budget.
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Print every step.
    #[arg(long)]
    pub trace: bool,
    /// Bindings enumerated per reaction per step.
    #[arg(long, default_value_t = gammaflow_core::rewrite::DEFAULT_CAP)]
    pub cap: usize,
    #[command(flatten)]
    pub inputs: Inputs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub path: PathBuf,
    /// `A..B`, `A..=B` or a comma-separated list.
    #[arg(long, default_value = "1..=5", value_parser = parse_seeds)]
    pub seeds: Seeds,
    #[arg(long, default_value_t = gammaflow_core::exec::DEFAULT_MAX_STEPS)]
    pub max_steps: u64,
    /// Alter the translated program before running it.
    #[arg(long, hide = true)]
    pub corrupt: bool,
    #[command(flatten)]
    pub inputs: Inputs,
}

#[derive(Debug, Args)]
pub struct DotArgs {
    pub path: PathBuf,
    /// For programs: one graph for the whole program.
    #[arg(long)]
    pub link: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn parse_assignment(s: &str) -> Result<(String, Value), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v = v.trim().parse().map_err(|e| format!("bad value `{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Clone)]
pub struct Seeds(pub Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad seed `{t}`: {e}"));
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        s.split(',').map(num).collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(format!("`{s}` names no seeds"));
    }
    Ok(Seeds(seeds))
}

/// A failed command and its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const USAGE: u8 = 1;
    pub const FAULT: u8 = 2;
    pub const DIVERGENCE: u8 = 3;
    pub const BUDGET: u8 = 4;

    pub fn usage(e: impl std::fmt::Display) -> Self {
        Failure { code: Self::USAGE, message: e.to_string() }
    }

    pub fn fault(e: impl std::fmt::Display) -> Self {
        Failure { code: Self::FAULT, message: e.to_string() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::usage(format!("{e:#}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Failure::USAGE } else { 0 });
        }
    };
    let ctx = commands::Ctx { format: cli.format, file_type: cli.file_type };
    let result = match cli.command {
        Command::Parse { path } => commands::parse(&ctx, &path),
        Command::Convert(a) => commands::convert(&ctx, &a),
        Command::Run(a) => commands::run(&ctx, &a),
        Command::CheckEquiv(a) => commands::check_equiv(&ctx, &a),
        Command::Dot(a) => commands::dot(&ctx, &a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_specs() {
        assert_eq!(parse_seeds("1..4").unwrap().0, [1, 2, 3]);
        assert_eq!(parse_seeds("1..=3").unwrap().0, [1, 2, 3]);
        assert_eq!(parse_seeds("7, 9").unwrap().0, [7, 9]);
        assert!(parse_seeds("3..3").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn assignments() {
        assert_eq!(parse_assignment("z=-2").unwrap(), ("z".to_string(), -2));
        assert!(parse_assignment("z").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
