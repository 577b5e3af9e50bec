use std::fmt;

use num_rational::Rational64;
use num_traits::Signed;

use super::Pos;
use crate::engine::FactKind;

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub stmts: Vec<Stmt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeMode {
    None,
    Grid,
    Gauss,
    Both,
}

impl ProbeMode {
    pub fn parse(s: &str) -> Option<ProbeMode> {
        Some(match s {
            "none" => ProbeMode::None,
            "grid" => ProbeMode::Grid,
            "gauss" => ProbeMode::Gauss,
            "both" => ProbeMode::Both,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ProbeMode::None => "none",
            ProbeMode::Grid => "grid",
            ProbeMode::Gauss => "gauss",
            ProbeMode::Both => "both",
        }
    }

    pub fn grid(self) -> bool {
        matches!(self, ProbeMode::Grid | ProbeMode::Both)
    }

    pub fn gauss(self) -> bool {
        matches!(self, ProbeMode::Gauss | ProbeMode::Both)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Bind { name: String, expr: Expr, pos: Pos },
    Axiom { name: String, props: Vec<String>, pos: Pos },
    Fact { label: String, kind: FactKind, left: Expr, right: Expr, pos: Pos },
    Check { expr: Expr, props: Vec<String>, probe: Option<ProbeMode>, pos: Pos },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sqrt,
    Abs,
    Mult,
    Fourier,
    Adj,
    Comm,
    SelfComm,
    Dom,
    MaxDom,
    DSum,
    Meet,
    Pre,
}

impl Func {
    pub const ALL: [Func; 13] = [
        Func::Exp,
        Func::Sqrt,
        Func::Abs,
        Func::Mult,
        Func::Fourier,
        Func::Adj,
        Func::Comm,
        Func::SelfComm,
        Func::Dom,
        Func::MaxDom,
        Func::DSum,
        Func::Meet,
        Func::Pre,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Mult => "mult",
            Func::Fourier => "fourier",
            Func::Adj => "adj",
            Func::Comm => "comm",
            Func::SelfComm => "selfcomm",
            Func::Dom => "dom",
            Func::MaxDom => "maxdom",
            Func::DSum => "dsum",
            Func::Meet => "meet",
            Func::Pre => "pre",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }

    /// Exact arity, or `None` for one-or-more.
    pub fn arity(self) -> Option<usize> {
        match self {
            Func::Comm | Func::Pre => Some(2),
            Func::DSum | Func::Meet => None,
            _ => Some(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Var,
    Num(f64),
    Ident(String, Pos),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, Rational64),
    Call(Func, Vec<Expr>, Pos),
    Ft,
    Ift,
    Id,
    Full,
    Trivial,
    Block(Vec<Vec<Expr>>, Pos),
    ZeroOn(Box<Expr>),
}

pub const KEYWORDS: &[&str] = &[
    "x", "ft", "ift", "id", "full", "trivial", "block", "zero", "on", "axiom", "fact", "check", "trivial_composition",
    "trivial_intersection",
];

pub fn is_reserved(word: &str) -> bool {
    KEYWORDS.contains(&word) || Func::from_name(word).is_some()
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(n) if *n < 0.0 => 3,
            _ => 5,
        }
    }

    fn child(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
        if e.precedence() < min {
            write!(f, "({e})")
        } else {
            write!(f, "{e}")
        }
    }
}

pub(crate) fn fmt_exponent(r: Rational64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() && !r.is_negative() {
        write!(f, "{}", r.numer())
    } else if r.is_integer() {
        write!(f, "({})", r.numer())
    } else {
        write!(f, "({}/{})", r.numer(), r.denom())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var => f.write_str("x"),
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Ident(s, _) => f.write_str(s),
            Expr::Add(a, b) => {
                self.child(f, a, 1)?;
                f.write_str(" + ")?;
                self.child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                self.child(f, a, 1)?;
                f.write_str(" - ")?;
                self.child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                self.child(f, a, 2)?;
                f.write_str("*")?;
                self.child(f, b, 3)
            }
            Expr::Div(a, b) => {
                self.child(f, a, 2)?;
                f.write_str("/")?;
                self.child(f, b, 3)
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                // `--` lexes as an option marker
                let min = if matches!(**a, Expr::Neg(_)) { 4 } else { 3 };
                self.child(f, a, min)
            }
            Expr::Pow(b, r) => {
                self.child(f, b, 5)?;
                f.write_str("^")?;
                fmt_exponent(*r, f)
            }
            Expr::Call(func, args, _) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::Ft => f.write_str("ft"),
            Expr::Ift => f.write_str("ift"),
            Expr::Id => f.write_str("id"),
            Expr::Full => f.write_str("full"),
            Expr::Trivial => f.write_str("trivial"),
            Expr::Block(rows, _) => {
                f.write_str("block[")?;
                for (i, row) in rows.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str("[")?;
                    for (j, e) in row.iter().enumerate() {
                        if j > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{e}")?;
                    }
                    f.write_str("]")?;
                }
                f.write_str("]")
            }
            Expr::ZeroOn(d) => {
                f.write_str("zero on ")?;
                self.child(f, d, 5)
            }
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Bind { name, expr, .. } => write!(f, "{name} := {expr}"),
            Stmt::Axiom { name, props, .. } => write!(f, "axiom {name} {{{}}}", props.join(", ")),
            Stmt::Fact { label, kind, left, right, .. } => {
                write!(f, "fact {label}: {}({left}, {right})", kind.keyword())
            }
            Stmt::Check { expr, props, probe, .. } => {
                write!(f, "check {expr}")?;
                for p in props {
                    write!(f, " {p}")?;
                }
                if let Some(m) = probe {
                    write!(f, " --probe {}", m.name())?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.stmts {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Canonical text of a program; reparses to an equal program.
pub fn render(p: &Program) -> String {
    p.to_string()
}
