//! Operator expression language.
//!
//! A program is a sequence of statements separated by newlines or `;`:
//!
//! ```text
//! axiom C {selfadjoint, positive}
//! A := mult(exp(x^2))
//! fact f1: trivial_intersection(A, fourier(A))
//! check comm(abs(A), A) bounded closed --probe grid
//! ```
//!
//! `*` between operators is composition, `fourier(T)` is `𝓕* T 𝓕`, and a
//! constant in operator position stands for that multiple of the identity.

pub mod ast;
pub mod eval;
pub mod lexer;
pub mod parser;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

pub use ast::{render, Expr, Func, ProbeMode, Program, Stmt};
pub use eval::{CheckReport, EvalError, Evidence, ExecOptions, ProgramReport, Session, Val};
pub use parser::MAX_DEPTH;

/// 1-based source position. Positions never take part in AST equality.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Syntax,
    UnboundIdentifier,
    Rebinding,
    Arity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{line}:{col}: {message} (at `{token}`)")]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub col: usize,
    pub token: String,
    pub message: String,
}

impl ParseError {
    fn new(kind: ErrorKind, pos: Pos, token: &str, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            line: pos.line,
            col: pos.col,
            token: token.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn syntax(pos: Pos, token: &str, message: &str) -> Self {
        ParseError::new(ErrorKind::Syntax, pos, token, message)
    }

    pub(crate) fn arity(pos: Pos, func: &str, want: usize, got: usize) -> Self {
        ParseError::new(
            ErrorKind::Arity,
            pos,
            func,
            format!("`{func}` takes {want} argument{}, got {got}", if want == 1 { "" } else { "s" }),
        )
    }
}

/// Parse and check that every identifier is declared before use and
/// declared only once.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let prog = parser::parse(src)?;
    resolve(&prog, &BTreeSet::new())?;
    Ok(prog)
}

/// Parse a single expression, as used in claim targets.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    parser::parse_expr(src)
}

/// Identifier checks against names already in scope.
pub fn resolve(prog: &Program, outer: &BTreeSet<String>) -> Result<(), ParseError> {
    let mut scope = outer.clone();
    for s in &prog.stmts {
        match s {
            Stmt::Bind { name, expr, pos } => {
                check_expr(expr, &scope)?;
                declare(&mut scope, name, *pos)?;
            }
            Stmt::Axiom { name, pos, .. } => declare(&mut scope, name, *pos)?,
            Stmt::Fact { left, right, .. } => {
                check_expr(left, &scope)?;
                check_expr(right, &scope)?;
            }
            Stmt::Check { expr, .. } => check_expr(expr, &scope)?,
        }
    }
    Ok(())
}

fn declare(scope: &mut BTreeSet<String>, name: &str, pos: Pos) -> Result<(), ParseError> {
    if !scope.insert(name.to_string()) {
        return Err(ParseError::new(
            ErrorKind::Rebinding,
            pos,
            name,
            format!("`{name}` is already bound"),
        ));
    }
    Ok(())
}

fn check_expr(e: &Expr, scope: &BTreeSet<String>) -> Result<(), ParseError> {
    match e {
        Expr::Ident(name, pos) if !scope.contains(name) => Err(ParseError::new(
            ErrorKind::UnboundIdentifier,
            *pos,
            name,
            format!("`{name}` is not bound"),
        )),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            check_expr(a, scope)?;
            check_expr(b, scope)
        }
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::ZeroOn(a) => check_expr(a, scope),
        Expr::Call(_, args, _) => args.iter().try_for_each(|a| check_expr(a, scope)),
        Expr::Block(rows, _) => rows.iter().flatten().try_for_each(|a| check_expr(a, scope)),
        _ => Ok(()),
    }
}
