use std::fmt::Write;

use super::ast::{ByClause, Expr, LabelSlot, Pattern, Program, Reaction, TagSlot, Tuple, ValueSlot};
use crate::dataflow::ArithOp;
use crate::element::Element;

const P_OR: u8 = 1;
const P_AND: u8 = 2;
const P_NOT: u8 = 3;
const P_CMP: u8 = 4;
const P_ADD: u8 = 5;
const P_MUL: u8 = 6;
const P_ATOM: u8 = 7;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Or(..) => P_OR,
        Expr::And(..) => P_AND,
        Expr::Not(_) => P_NOT,
        Expr::Cmp(..) => P_CMP,
        Expr::Arith(ArithOp::Add | ArithOp::Sub, ..) => P_ADD,
        Expr::Arith(..) => P_MUL,
        Expr::Int(_) | Expr::Label(_) | Expr::Var(_) | Expr::Neg(_) => P_ATOM,
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    let binary = |out: &mut String, op: &str, a: &Expr, b: &Expr, p: u8| {
        write_wrapped(out, a, prec(a) < p);
        write!(out, " {op} ").unwrap();
        write_wrapped(out, b, prec(b) <= p);
    };
    match e {
        Expr::Int(n) => write!(out, "{n}").unwrap(),
        Expr::Label(l) => write!(out, "'{l}'").unwrap(),
        Expr::Var(v) => out.push_str(v),
        Expr::Neg(inner) => {
            out.push('-');
            let atomic = matches!(**inner, Expr::Var(_) | Expr::Neg(_) | Expr::Label(_));
            write_wrapped(out, inner, !atomic);
        }
        Expr::Not(inner) => {
            out.push_str("not ");
            let atomic = matches!(**inner, Expr::Var(_) | Expr::Int(_) | Expr::Label(_));
            write_wrapped(out, inner, !atomic);
        }
        Expr::Arith(op, a, b) => binary(out, op.symbol(), a, b, prec(e)),
        Expr::Cmp(op, a, b) => binary(out, op.symbol(), a, b, P_CMP),
        Expr::And(a, b) => binary(out, "and", a, b, P_AND),
        Expr::Or(a, b) => binary(out, "or", a, b, P_OR),
    }
}

fn write_wrapped(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

/// Prints an expression with the fewest parentheses that re-parse to it.
pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

fn print_pattern(p: &Pattern) -> String {
    let value = match &p.value {
        ValueSlot::Var(v) => v.clone(),
        ValueSlot::Lit(n) => n.to_string(),
    };
    let label = match &p.label {
        LabelSlot::Lit(l) => format!("'{l}'"),
        LabelSlot::Var(v) => v.clone(),
    };
    match &p.tag {
        TagSlot::Lit(0) => format!("[{value}, {label}]"),
        TagSlot::Lit(t) => format!("[{value}, {label}, {t}]"),
        TagSlot::Var(v) => format!("[{value}, {label}, {v}]"),
    }
}

fn print_tuple(t: &Tuple) -> String {
    let (v, l) = (print_expr(&t.value), print_expr(&t.label));
    match t.tag {
        Expr::Int(0) => format!("[{v}, {l}]"),
        ref tag => format!("[{v}, {l}, {}]", print_expr(tag)),
    }
}

fn write_clause(out: &mut String, c: &ByClause, several: bool) {
    out.push_str("    by ");
    if c.is_null() {
        out.push('0');
    } else {
        let outs: Vec<String> = c.outputs.iter().map(print_tuple).collect();
        out.push_str(&outs.join(", "));
    }
    out.push('\n');
    match &c.guard {
        Some(g) => writeln!(out, "    if {}", print_expr(g)).unwrap(),
        None if several => out.push_str("    else\n"),
        None => {}
    }
}

/// Canonical text of one reaction, newline-terminated.
pub fn print_reaction(r: &Reaction) -> String {
    let pats: Vec<String> = r.replace.iter().map(print_pattern).collect();
    let mut out = format!("{} = replace {}\n", r.name, pats.join(", "));
    for c in &r.clauses {
        write_clause(&mut out, c, r.clauses.len() > 1);
    }
    out
}

fn print_element(e: &Element) -> String {
    if e.tag == 0 {
        format!("[{}, '{}']", e.value, e.label)
    } else {
        format!("[{}, '{}', {}]", e.value, e.label, e.tag)
    }
}

/// Canonical program text: reactions in order separated by blank lines, then
/// the multiset section if the initial multiset is nonempty.
pub fn print_program(p: &Program) -> String {
    let mut blocks: Vec<String> = p.reactions.iter().map(print_reaction).collect();
    if !p.initial.is_empty() {
        let mut initial = p.initial.clone();
        initial.sort();
        let mut s = String::from("multiset {\n");
        for e in &initial {
            writeln!(s, "    {}", print_element(e)).unwrap();
        }
        s.push_str("}\n");
        blocks.push(s);
    }
    blocks.join("\n")
}

impl std::fmt::Display for Reaction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_reaction(self))
    }
}

impl std::fmt::Display for Program {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_program(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::{parse_program, parse_reaction};

    #[test]
    fn minimal_parens() {
        let r = parse_reaction("R = replace [a,'A'],[b,'B'],[c,'C'] by [(a+b)-(a*c), 'D'] if (a=='X') or (b > 0 and not (c == 1))").unwrap();
        let text = print_reaction(&r);
        assert!(text.contains("[a + b - a * c, 'D']"), "{text}");
        assert!(text.contains("if a == 'X' or b > 0 and not (c == 1)"), "{text}");
        assert_eq!(parse_reaction(&text).unwrap(), r);
    }

    #[test]
    fn right_operand_keeps_parens() {
        for src in ["a - (b - c)", "a / (b * c)", "-(3)", "-(a + b)", "a - -3", "not not a", "(a < b) == c"] {
            let text = format!("R = replace [a,'A'],[b,'B'],[c,'C'] by [{src}, 'D']");
            let r = parse_reaction(&text).unwrap();
            assert_eq!(parse_reaction(&print_reaction(&r)).unwrap(), r, "{src}");
        }
    }

    #[test]
    fn empty_multiset_omitted() {
        let p = parse_program("R = replace x by x").unwrap();
        assert!(!print_program(&p).contains("multiset"));
    }

    #[test]
    fn else_printed_only_with_siblings() {
        let r = parse_reaction("R = replace [a,'A',v],[c,'C',v] by [a,'B',v] if c == 1 by 0 else").unwrap();
        assert_eq!(
            print_reaction(&r),
            "R = replace [a, 'A', v], [c, 'C', v]\n    by [a, 'B', v]\n    if c == 1\n    by 0\n    else\n"
        );
    }
}
