use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::scalar::{format_rational, Rational};

use super::lexer::Pos;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn prec(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Non-negative integer literal.
    Num(BigInt),
    X,
    /// `exp` (level −1) as a monomial.
    Exp,
    /// `log[k]`, `k ≥ 1`; plain `log` is `Log(1)`.
    Log(u32),
    Name(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Rational),
    Call(String, Vec<Expr>),
    List(Vec<Expr>),
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.prec(),
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_operand(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Minimal parenthesization; `parse(e.to_string()) == e`.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::X => f.write_str("x"),
            Expr::Exp => f.write_str("exp"),
            Expr::Log(1) => f.write_str("log"),
            Expr::Log(k) => write!(f, "log[{k}]"),
            Expr::Name(s) => f.write_str(s),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.write_operand(f, 3)
            }
            Expr::Bin(op, a, b) => {
                a.write_operand(f, op.prec())?;
                write!(f, " {} ", op.symbol())?;
                b.write_operand(f, op.prec() + 1)
            }
            Expr::Pow(base, r) => {
                base.write_operand(f, 4)?;
                if r.is_integer() && !r.is_negative() {
                    write!(f, "^{}", r.numer())
                } else {
                    write!(f, "^({})", format_rational(r))
                }
            }
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                write_list(f, args)?;
                f.write_str(")")
            }
            Expr::List(items) => {
                f.write_str("[")?;
                write_list(f, items)?;
                f.write_str("]")
            }
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, items: &[Expr]) -> fmt::Result {
    for (i, e) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Let { name: String, value: Expr, pos: Pos },
    Expr(Expr),
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Let { name, value, .. } => write!(f, "let {name} = {value}"),
            Stmt::Expr(e) => write!(f, "{e}"),
        }
    }
}
