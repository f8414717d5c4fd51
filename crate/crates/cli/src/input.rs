use std::fs;
use std::path::Path;

use anyhow::Context;
use clap::ValueEnum;
use gammaflow_core::dataflow::{parse_graph_text, DataflowGraph};
use gammaflow_core::exec::source_inputs;
use gammaflow_core::gamma::{parse_program, Program};
use gammaflow_core::Element;

use crate::{Failure, Inputs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FileType {
    /// Graph text.
    Df,
    /// Gamma program.
    Gamma,
    /// Element list.
    Mset,
}

pub enum Loaded {
    Graph(DataflowGraph),
    Program(Program),
    Elements(Vec<Element>),
}

fn detect(path: &Path, forced: Option<FileType>) -> Result<FileType, Failure> {
    if let Some(t) = forced {
        return Ok(t);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("df") => Ok(FileType::Df),
        Some("gamma") => Ok(FileType::Gamma),
        Some("mset") => Ok(FileType::Mset),
        _ => Err(Failure::usage(format!(
            "{}: unknown file type; use --type df|gamma|mset",
            path.display()
        ))),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    Ok(fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?)
}

/// Parses an element file: `[value, 'label', tag]` entries, optionally
/// wrapped in `multiset { ... }`.
pub fn parse_elements(text: &str) -> Result<Vec<Element>, String> {
    let body = text.trim_start();
    let wrapped = if body.len() >= 8 && body[..8].eq_ignore_ascii_case("multiset") {
        text.to_string()
    } else {
        // Keeps line numbers aligned with the file.
        format!("multiset {{ {text}\n}}")
    };
    parse_program(&wrapped).map(|p| p.initial).map_err(|e| e.to_string())
}

pub fn load(path: &Path, forced: Option<FileType>) -> Result<Loaded, Failure> {
    let ty = detect(path, forced)?;
    let text = read(path)?;
    let at = |e: &dyn std::fmt::Display| Failure::usage(format!("{}:{e}", path.display()));
    Ok(match ty {
        FileType::Df => Loaded::Graph(parse_graph_text(&text).map_err(|e| at(&e))?),
        FileType::Gamma => Loaded::Program(parse_program(&text).map_err(|e| at(&e))?),
        FileType::Mset => Loaded::Elements(parse_elements(&text).map_err(|e| at(&e))?),
    })
}

fn element_file(path: &Path) -> Result<Vec<Element>, Failure> {
    parse_elements(&read(path)?).map_err(|e| Failure::usage(format!("{}:{e}", path.display())))
}

/// Initial tokens for `g`: the element file if given, else source values
/// with `--set` overrides.
pub fn graph_inputs(g: &DataflowGraph, inputs: &Inputs) -> Result<Vec<Element>, Failure> {
    match &inputs.inputs {
        Some(_) if !inputs.set.is_empty() => Err(Failure::usage("--set and --inputs cannot be combined")),
        Some(path) => element_file(path),
        None => source_inputs(g, &inputs.set).map_err(Failure::usage),
    }
}

/// Replaces the program's initial multiset when an element file is given.
pub fn apply_program_inputs(p: &mut Program, inputs: &Inputs) -> Result<(), Failure> {
    if !inputs.set.is_empty() {
        return Err(Failure::usage("--set applies to graphs; use --inputs for programs"));
    }
    if let Some(path) = &inputs.inputs {
        let mut elements = element_file(path)?;
        elements.sort();
        p.initial = elements;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use gammaflow_core::elem;

    #[test]
    fn element_files() {
        assert_eq!(
            parse_elements("[1, 'A1', 0]\n[5, 'B1']").unwrap(),
            [elem(1, "A1", 0), elem(5, "B1", 0)]
        );
        assert_eq!(parse_elements("multiset { [2, 'e'] }").unwrap(), [elem(2, "e", 0)]);
        assert!(parse_elements("[1, A1]").is_err());
    }

    #[test]
    fn type_detection() {
        assert_eq!(detect(Path::new("a.df"), None).unwrap(), FileType::Df);
        assert_eq!(detect(Path::new("a.txt"), Some(FileType::Gamma)).unwrap(), FileType::Gamma);
        assert!(detect(Path::new("a.txt"), None).is_err());
    }
}
