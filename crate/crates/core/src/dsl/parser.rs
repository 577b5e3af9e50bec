use num_rational::Rational64;

use super::ast::{is_reserved, Expr, Func, ProbeMode, Program, Stmt};
use super::lexer::{lex, Spanned, Tok};
use super::{ParseError, Pos};
use crate::classify::Property;
use crate::engine::FactKind;
use crate::op::Props;

/// Nesting bound for expressions.
pub const MAX_DEPTH: usize = 256;

pub fn parse(src: &str) -> Result<Program, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, i: 0, depth: 0 };
    p.program()
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, i: 0, depth: 0 };
    let e = p.expr()?;
    if matches!(p.peek(), Tok::Sep) {
        p.bump();
    }
    if !matches!(p.peek(), Tok::Eof) {
        return p.err("expected end of expression");
    }
    Ok(e)
}

struct Parser {
    toks: Vec<Spanned>,
    i: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError::syntax(self.pos(), &self.peek().describe(), msg))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == w)
    }

    fn expect_sym(&mut self, s: &str) -> Result<Pos, ParseError> {
        if self.is_sym(s) {
            Ok(self.bump().pos)
        } else {
            self.err(&format!("expected `{s}`"))
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<(), ParseError> {
        if self.is_word(w) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("expected `{w}`"))
        }
    }

    fn name(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Ident(w) if !is_reserved(&w) => {
                let pos = self.bump().pos;
                Ok((w, pos))
            }
            Tok::Ident(_) => self.err(&format!("reserved word cannot be used as {what}")),
            _ => self.err(&format!("expected {what}")),
        }
    }

    fn end_of_statement(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Sep => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => self.err("expected end of statement"),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut stmts = Vec::new();
        loop {
            while matches!(self.peek(), Tok::Sep) {
                self.bump();
            }
            if matches!(self.peek(), Tok::Eof) {
                break;
            }
            stmts.push(self.statement()?);
            self.end_of_statement()?;
        }
        Ok(Program { stmts })
    }

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.pos();
        if self.is_word("axiom") {
            self.bump();
            let (name, _) = self.name("a symbol name")?;
            self.expect_sym("{")?;
            let mut props = Vec::new();
            let mut probe = Props::default();
            while !self.is_sym("}") {
                let ppos = self.pos();
                let Tok::Ident(w) = self.peek().clone() else {
                    return self.err("expected a property name");
                };
                if !probe.set(&w) {
                    return Err(ParseError::syntax(ppos, &w, "unknown symbol property"));
                }
                self.bump();
                props.push(w);
                if !self.is_sym("}") {
                    self.expect_sym(",")?;
                }
            }
            self.expect_sym("}")?;
            return Ok(Stmt::Axiom { name, props, pos });
        }
        if self.is_word("fact") {
            self.bump();
            let (label, _) = self.name("a fact label")?;
            self.expect_sym(":")?;
            let kind = match self.peek() {
                Tok::Ident(w) if w == "trivial_composition" => FactKind::TrivialComposition,
                Tok::Ident(w) if w == "trivial_intersection" => FactKind::TrivialIntersection,
                _ => return self.err("expected `trivial_composition` or `trivial_intersection`"),
            };
            self.bump();
            self.expect_sym("(")?;
            let left = self.argument()?;
            self.expect_sym(",")?;
            let right = self.argument()?;
            self.expect_sym(")")?;
            return Ok(Stmt::Fact { label, kind, left, right, pos });
        }
        if self.is_word("check") {
            self.bump();
            let expr = self.expr()?;
            let mut props = Vec::new();
            let mut probe = None;
            loop {
                match self.peek().clone() {
                    Tok::Ident(w) => {
                        if Property::from_keyword(&w).is_none() {
                            return self.err("unknown property");
                        }
                        self.bump();
                        props.push(w);
                    }
                    Tok::Sym("--") => {
                        self.bump();
                        self.expect_word("probe")?;
                        let Tok::Ident(m) = self.peek().clone() else {
                            return self.err("expected a probe mode");
                        };
                        let Some(mode) = ProbeMode::parse(&m) else {
                            return self.err("probe mode must be none, grid, gauss or both");
                        };
                        self.bump();
                        probe = Some(mode);
                    }
                    _ => break,
                }
            }
            return Ok(Stmt::Check { expr, props, probe, pos });
        }
        let (name, _) = self.name("a binding name or statement keyword")?;
        self.expect_sym(":=")?;
        let expr = self.expr()?;
        Ok(Stmt::Bind { name, expr, pos })
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("expression nested too deeply");
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            if self.is_sym("+") {
                self.bump();
                let rhs = self.term()?;
                lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
            } else if self.is_sym("-") {
                self.bump();
                let rhs = self.term()?;
                lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.is_sym("*") {
                self.bump();
                let rhs = self.unary()?;
                lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.is_sym("/") {
                self.bump();
                let rhs = self.unary()?;
                lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
            } else {
                break;
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_sym("-") {
            self.enter()?;
            self.bump();
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.is_sym("^") {
            return Ok(base);
        }
        self.bump();
        let r = self.exponent()?;
        Ok(Expr::Pow(Box::new(base), r))
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) if n.fract() == 0.0 && n.abs() < 1e15 => {
                self.bump();
                Ok(n as i64)
            }
            _ => self.err("expected an integer"),
        }
    }

    fn exponent(&mut self) -> Result<Rational64, ParseError> {
        if self.is_sym("-") {
            self.bump();
            return Ok(Rational64::from_integer(-self.integer()?));
        }
        if !self.is_sym("(") {
            return Ok(Rational64::from_integer(self.integer()?));
        }
        self.bump();
        let neg = if self.is_sym("-") {
            self.bump();
            true
        } else {
            false
        };
        let num = self.integer()?;
        let den = if self.is_sym("/") {
            self.bump();
            let pos = self.pos();
            let d = self.integer()?;
            if d == 0 {
                return Err(ParseError::syntax(pos, "0", "zero denominator"));
            }
            d
        } else {
            1
        };
        self.expect_sym(")")?;
        let r = Rational64::new(num, den);
        Ok(if neg { -r } else { r })
    }

    /// An argument or block entry: empty slots are reported here.
    fn argument(&mut self) -> Result<Expr, ParseError> {
        if self.is_sym(",") || self.is_sym(")") || self.is_sym("]") {
            return self.err("empty argument");
        }
        self.expr()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Num(n))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.argument()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(w) => {
                self.bump();
                if let Some(func) = Func::from_name(&w) {
                    return self.call(func, pos);
                }
                Ok(match w.as_str() {
                    "x" => Expr::Var,
                    "ft" => Expr::Ft,
                    "ift" => Expr::Ift,
                    "id" => Expr::Id,
                    "full" => Expr::Full,
                    "trivial" => Expr::Trivial,
                    "block" => return self.block(pos),
                    "zero" => {
                        self.expect_word("on")?;
                        self.enter()?;
                        let d = self.atom()?;
                        self.depth -= 1;
                        Expr::ZeroOn(Box::new(d))
                    }
                    other if is_reserved(other) => {
                        return Err(ParseError::syntax(pos, other, "keyword cannot start an expression"))
                    }
                    other => Expr::Ident(other.to_string(), pos),
                })
            }
            _ => self.err("expected an expression"),
        }
    }

    fn call(&mut self, func: Func, pos: Pos) -> Result<Expr, ParseError> {
        self.expect_sym("(")?;
        let mut args = vec![self.argument()?];
        while self.is_sym(",") {
            self.bump();
            args.push(self.argument()?);
        }
        let close = self.pos();
        self.expect_sym(")")?;
        match func.arity() {
            Some(n) if n != args.len() => Err(ParseError::arity(close, func.name(), n, args.len())),
            _ => Ok(Expr::Call(func, args, pos)),
        }
    }

    fn block(&mut self, pos: Pos) -> Result<Expr, ParseError> {
        self.enter()?;
        self.expect_sym("[")?;
        let mut rows = Vec::new();
        loop {
            self.expect_sym("[")?;
            let mut row = vec![self.argument()?];
            while self.is_sym(",") {
                self.bump();
                row.push(self.argument()?);
            }
            self.expect_sym("]")?;
            rows.push(row);
            if self.is_sym(",") {
                self.bump();
                continue;
            }
            break;
        }
        let close = self.pos();
        self.expect_sym("]")?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(ParseError::syntax(close, "]", "block must be square"));
        }
        self.depth -= 1;
        Ok(Expr::Block(rows, pos))
    }
}
