use std::collections::BTreeSet;

use super::ast::{ByClause, Expr, LabelSlot, Pattern, Program, Reaction, TagSlot, Tuple, ValueSlot};
use super::lexer::{lex, Spanned, Tok};
use super::validate::validate_reaction;
use super::ParseError;
use crate::dataflow::{ArithOp, CmpOp};
use crate::element::{Element, Label, Tag, Value};

const KEYWORDS: [&str; 9] = [
    "replace", "by", "if", "where", "else", "and", "or", "not", "multiset",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(s))
}

/// Label variable introduced for a bare pattern `x`.
pub(crate) fn bare_label_var(var: &str) -> String {
    format!("{var}_lbl")
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.column)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        let (line, column) = self.here();
        ParseError::Syntax {
            line,
            column,
            message: format!("expected {expected}, found {}", self.peek().describe()),
        }
    }

    fn semantic_here(&self, message: String) -> ParseError {
        let (line, column) = self.here();
        ParseError::Semantic {
            line,
            column,
            message,
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    fn label_lit(&mut self) -> PResult<Label> {
        let (line, column) = self.here();
        match self.bump() {
            Tok::Label(text) => Label::new(text).map_err(|e| ParseError::Syntax {
                line,
                column,
                message: e.to_string(),
            }),
            _ => {
                self.pos -= 1;
                Err(self.error("label literal"))
            }
        }
    }

    fn signed_int(&mut self) -> PResult<Value> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let (line, column) = self.here();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                let n = i128::from(n);
                Value::try_from(if neg { -n } else { n }).map_err(|_| ParseError::Syntax {
                    line,
                    column,
                    message: "integer out of range".into(),
                })
            }
            _ => Err(self.error("integer")),
        }
    }

    fn tag_lit(&mut self) -> PResult<Tag> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.error("tag variable or nonnegative integer")),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut program = Program::default();
        let mut names = BTreeSet::new();
        let mut saw_multiset = false;
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Semi => {
                    self.bump();
                }
                Tok::Ident(s) if s.eq_ignore_ascii_case("multiset") && *self.peek_at(1) == Tok::LBrace => {
                    if saw_multiset {
                        return Err(self.semantic_here("second multiset section".into()));
                    }
                    saw_multiset = true;
                    self.bump();
                    program.initial = self.multiset_body()?;
                }
                _ => {
                    let (line, column) = self.here();
                    let r = self.reaction()?;
                    if !names.insert(r.name.clone()) {
                        return Err(ParseError::Semantic {
                            line,
                            column,
                            message: format!("duplicate reaction name `{}`", r.name),
                        });
                    }
                    let violations = validate_reaction(&r);
                    if let Some(v) = violations.first() {
                        return Err(ParseError::Semantic {
                            line,
                            column,
                            message: format!("reaction `{}`: {v}", r.name),
                        });
                    }
                    program.reactions.push(r);
                }
            }
        }
        program.initial.sort();
        Ok(program)
    }

    fn multiset_body(&mut self) -> PResult<Vec<Element>> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Comma => {
                    self.bump();
                }
                Tok::LBracket => {
                    self.bump();
                    let value = self.signed_int()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let label = self.label_lit()?;
                    let tag = if *self.peek() == Tok::Comma {
                        self.bump();
                        self.tag_lit()?
                    } else {
                        0
                    };
                    self.expect(Tok::RBracket, "`]`")?;
                    out.push(Element::new(value, label, tag));
                }
                _ => return Err(self.error("element `[value, 'label', tag]` or `}`")),
            }
        }
        Ok(out)
    }

    fn reaction(&mut self) -> PResult<Reaction> {
        let name = self.ident("reaction name")?;
        self.expect(Tok::Assign, "`=`")?;
        if !self.eat_kw("replace") {
            return Err(self.error("`replace`"));
        }
        let mut bare = BTreeSet::new();
        let replace = self.patterns(&mut bare)?;
        let mut clauses = Vec::new();
        loop {
            if !self.eat_kw("by") {
                if clauses.is_empty() {
                    return Err(self.error("`by`"));
                }
                break;
            }
            clauses.push(self.clause(&bare)?);
            while *self.peek() == Tok::Semi && matches!(self.peek_at(1), Tok::Ident(s) if s.eq_ignore_ascii_case("by")) {
                self.bump();
            }
        }
        Ok(Reaction {
            name,
            replace,
            clauses,
        })
    }

    fn patterns(&mut self, bare: &mut BTreeSet<String>) -> PResult<Vec<Pattern>> {
        let parens = if *self.peek() == Tok::LParen {
            self.bump();
            true
        } else {
            false
        };
        let mut out = vec![self.pattern(bare)?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.pattern(bare)?);
        }
        if parens {
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(out)
    }

    fn pattern(&mut self, bare: &mut BTreeSet<String>) -> PResult<Pattern> {
        match self.peek() {
            Tok::LBracket => {
                self.bump();
                let value = match self.peek() {
                    Tok::Ident(_) => ValueSlot::Var(self.ident("value variable")?),
                    _ => ValueSlot::Lit(
                        self.signed_int()
                            .map_err(|_| self.error("value variable or integer"))?,
                    ),
                };
                self.expect(Tok::Comma, "`,`")?;
                let label = match self.peek() {
                    Tok::Label(_) => LabelSlot::Lit(self.label_lit()?),
                    Tok::Ident(_) => LabelSlot::Var(self.ident("label variable")?),
                    _ => return Err(self.error("label literal or label variable")),
                };
                let tag = if *self.peek() == Tok::Comma {
                    self.bump();
                    match self.peek() {
                        Tok::Ident(_) => TagSlot::Var(self.ident("tag variable")?),
                        _ => TagSlot::Lit(self.tag_lit()?),
                    }
                } else {
                    TagSlot::Lit(0)
                };
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Pattern { value, label, tag })
            }
            Tok::Ident(_) => {
                let v = self.ident("pattern")?;
                bare.insert(v.clone());
                Ok(Pattern {
                    label: LabelSlot::Var(bare_label_var(&v)),
                    value: ValueSlot::Var(v),
                    tag: TagSlot::Lit(0),
                })
            }
            _ => Err(self.error("pattern `[value, label, tag]` or variable")),
        }
    }

    fn clause(&mut self, bare: &BTreeSet<String>) -> PResult<ByClause> {
        let outputs = if *self.peek() == Tok::Int(0) {
            self.bump();
            if *self.peek() == Tok::Comma {
                return Err(self.semantic_here("outputs inside a `by 0` clause".into()));
            }
            Vec::new()
        } else {
            let mut outs = vec![self.output(bare)?];
            while *self.peek() == Tok::Comma {
                self.bump();
                outs.push(self.output(bare)?);
            }
            outs
        };
        let guard = if self.eat_kw("if") || self.eat_kw("where") {
            Some(self.expr()?)
        } else {
            self.eat_kw("else");
            None
        };
        Ok(ByClause { outputs, guard })
    }

    fn output(&mut self, bare: &BTreeSet<String>) -> PResult<Tuple> {
        match self.peek() {
            Tok::LBracket => {
                self.bump();
                let value = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let label = self.expr()?;
                let tag = if *self.peek() == Tok::Comma {
                    self.bump();
                    self.expr()?
                } else {
                    Expr::Int(0)
                };
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Tuple { value, label, tag })
            }
            Tok::Ident(s) if !is_keyword(s) => {
                let v = s.clone();
                if !bare.contains(&v) {
                    return Err(self.semantic_here(format!(
                        "bare output `{v}` must name a bare pattern variable"
                    )));
                }
                self.bump();
                Ok(Tuple {
                    label: Expr::Var(bare_label_var(&v)),
                    value: Expr::Var(v),
                    tag: Expr::Int(0),
                })
            }
            _ => Err(self.error("output tuple, variable or `0`")),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.eat_kw("or") {
            let rhs = self.and_expr()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.eat_kw("and") {
            let rhs = self.not_expr()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.eat_kw("not") {
            Ok(Expr::Not(Box::new(self.not_expr()?)))
        } else {
            self.cmp_expr()
        }
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.add_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Lt => CmpOp::Lt,
                Tok::Gt => CmpOp::Gt,
                Tok::Le => CmpOp::Le,
                Tok::Ge => CmpOp::Ge,
                Tok::EqEq => CmpOp::Eq,
                Tok::Ne => CmpOp::Ne,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.add_expr()?;
            lhs = Expr::cmp(op, lhs, rhs);
        }
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul_expr()?;
            lhs = Expr::arith(op, lhs, rhs);
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::arith(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            if matches!(self.peek_at(1), Tok::Int(_)) {
                return Ok(Expr::Int(self.signed_int()?));
            }
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(_) => Ok(Expr::Int(self.signed_int()?)),
            Tok::Label(_) => Ok(Expr::Label(self.label_lit()?)),
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Expr::Var(s))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.error("expression")),
        }
    }
}

/// Parses a `.gamma` program.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.program()
}

/// Parses a single reaction (no trailing input allowed).
pub fn parse_reaction(text: &str) -> Result<Reaction, ParseError> {
    let p = parse_program(text)?;
    match (p.reactions.len(), p.initial.is_empty()) {
        (1, true) => Ok(p.reactions.into_iter().next().expect("one reaction")),
        _ => Err(ParseError::Syntax {
            line: 1,
            column: 1,
            message: "expected exactly one reaction".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::ValueSlot;

    #[test]
    fn r1_two_patterns_one_clause() {
        let r = parse_reaction("R1 = replace [id1,'A1'],[id2,'B1'] by [id1+id2,'B2']").unwrap();
        assert_eq!(r.replace.len(), 2);
        assert_eq!(r.clauses.len(), 1);
        assert!(r.clauses[0].guard.is_none());
        assert_eq!(r.replace[0].tag, TagSlot::Lit(0));
    }

    #[test]
    fn r16_guarded_then_null() {
        let r = parse_reaction(
            "R16 = replace [id1,'B13',v], [id2,'B15',v]\n by [id1,'B17',v]\n If id2 == 1\n by 0\n else",
        )
        .unwrap();
        assert_eq!(r.clauses.len(), 2);
        assert_eq!(
            r.clauses[0].guard,
            Some(Expr::cmp(CmpOp::Eq, Expr::var("id2"), Expr::Int(1)))
        );
        assert!(r.clauses[1].is_null() && r.clauses[1].guard.is_none());
    }

    #[test]
    fn unbound_variable_is_semantic() {
        let err = parse_program("R = replace [x,'A',v] by [y,'B',v]").unwrap_err();
        assert!(matches!(err, ParseError::Semantic { .. }));
        assert!(err.to_string().contains("unbound variable `y`"), "{err}");
    }

    #[test]
    fn duplicate_name_and_null_outputs() {
        let dup = parse_program("R = replace x by x\nR = replace y by y").unwrap_err();
        assert!(dup.to_string().contains("duplicate reaction name"));
        let null = parse_program("R = replace [x,'A'] by 0, [x,'B']").unwrap_err();
        assert!(null.to_string().contains("by 0"), "{null}");
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_program("R = replace [x,'A']\n  by [x 'B']").unwrap_err();
        assert_eq!(err.position(), (2, 9));
        assert!(err.to_string().contains("expected `,`"), "{err}");
    }

    #[test]
    fn min_reaction_where_form() {
        let r = parse_reaction("R = replace (x,y)\nby x\nwhere x < y").unwrap();
        assert_eq!(r.replace[1].value, ValueSlot::Var("y".into()));
        assert_eq!(r.replace[1].label, LabelSlot::Var("y_lbl".into()));
        assert_eq!(r.clauses[0].outputs[0].label, Expr::var("x_lbl"));
    }

    #[test]
    fn multiset_section_is_sorted() {
        let p = parse_program("multiset { [5,'B1'] [1,'A1', 2], [-3, `C1'] }").unwrap();
        let shown: Vec<String> = p.initial.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["[-3, 'C1', 0]", "[1, 'A1', 2]", "[5, 'B1', 0]"]);
    }
}
