//! The Gamma reaction language: AST, parser, printer and static checks.
//!
//! Concrete syntax:
//!
//! ```text
//! program  := (reaction | multiset | ';')*
//! reaction := NAME '=' 'replace' patterns clause+
//! patterns := '(' pat (',' pat)* ')' | pat (',' pat)*
//! pat      := '[' (VAR | INT) ',' (LABEL | VAR) (',' (VAR | INT))? ']' | VAR
//! clause   := 'by' ('0' | out (',' out)*) (('if' | 'where') expr | 'else')? ';'?
//! out      := '[' expr ',' expr (',' expr)? ']' | VAR
//! multiset := 'multiset' '{' ('[' INT ',' LABEL (',' INT)? ']' ','?)* '}'
//! ```
//!
//! Keywords are case-insensitive. Labels are written `'A1'` (an opening
//! backtick is also accepted). A missing tag means tag `0`. A bare pattern
//! `x` stands for `[x, x_lbl]` and a bare output `x` for the same tuple.
//! `#` starts a comment.

mod ast;
mod lexer;
mod parser;
mod printer;
mod validate;

use thiserror::Error;

pub use ast::{
    alpha_equivalent, ByClause, Expr, LabelSlot, Pattern, Program, Reaction, TagSlot, Tuple,
    ValueSlot,
};
pub use parser::{parse_program, parse_reaction};
pub use printer::{print_expr, print_program, print_reaction};
pub use validate::{validate_program, validate_reaction, ReactionViolation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: {message}")]
    Semantic {
        line: usize,
        column: usize,
        message: String,
    },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. } | ParseError::Semantic { line, column, .. } => {
                (*line, *column)
            }
        }
    }
}
