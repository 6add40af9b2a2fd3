use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::Result;
use crate::scalar::Rational;

use super::ast::{BinOp, Expr, Stmt};
use super::lexer::{lex, syntax, Pos, Tok, Token};

const MAX_DEPTH: usize = 200;

/// Names that cannot be rebound.
pub const RESERVED: [&str; 4] = ["x", "exp", "log", "let"];

struct Parser {
    toks: Vec<Token>,
    at: usize,
    depth: usize,
}

/// Parses a sequence of statements separated by `;` or line breaks.
pub fn parse_program(text: &str) -> Result<Vec<Stmt>> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    loop {
        while p.peek() == &Tok::Sep {
            p.at += 1;
        }
        if p.peek() == &Tok::Eof {
            return Ok(out);
        }
        out.push(p.stmt()?);
        match p.peek() {
            Tok::Sep | Tok::Eof => {}
            t => return Err(syntax(p.pos(), format!("expected end of statement, found {}", t.describe()))),
        }
    }
}

/// Parses exactly one expression.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    match p.peek() {
        Tok::Eof => Ok(e),
        t => Err(syntax(p.pos(), format!("expected end of input, found {}", t.describe()))),
    }
}

impl Parser {
    fn new(text: &str) -> Result<Parser> {
        Ok(Parser {
            toks: lex(text)?,
            at: 0,
            depth: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.at += 1;
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected {}, found {}", want.describe(), self.peek().describe())))
        }
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(syntax(self.pos(), "expression nested too deeply"));
        }
        Ok(())
    }

    fn stmt(&mut self) -> Result<Stmt> {
        if self.peek() == &Tok::Ident("let".into()) {
            let pos = self.pos();
            self.at += 1;
            let name = match self.next() {
                Token { tok: Tok::Ident(s), pos, .. } => {
                    if RESERVED.contains(&s.as_str()) || super::eval::FUNCTIONS.contains(&s.as_str()) {
                        return Err(syntax(pos, format!("`{s}` is reserved")));
                    }
                    s
                }
                t => return Err(syntax(t.pos, format!("expected a name after `let`, found {}", t.tok.describe()))),
            };
            self.expect(Tok::Eq)?;
            let value = self.expr()?;
            return Ok(Stmt::Let { name, value, pos });
        }
        Ok(Stmt::Expr(self.expr()?))
    }

    fn expr(&mut self) -> Result<Expr> {
        self.enter()?;
        let mut e = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.at += 1;
            e = Expr::Bin(op, Box::new(e), Box::new(self.term()?));
        }
        self.depth -= 1;
        Ok(e)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.at += 1;
            e = Expr::Bin(op, Box::new(e), Box::new(self.unary()?));
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Minus => {
                self.enter()?;
                self.at += 1;
                let e = Expr::Neg(Box::new(self.unary()?));
                self.depth -= 1;
                Ok(e)
            }
            Tok::Plus => {
                self.enter()?;
                self.at += 1;
                let e = self.unary()?;
                self.depth -= 1;
                Ok(e)
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let mut e = self.atom()?;
        while self.peek() == &Tok::Caret {
            self.at += 1;
            let r = self.exponent()?;
            e = Expr::Pow(Box::new(e), r);
        }
        Ok(e)
    }

    /// `n`, `-n`, `n/d` (no spaces around `/`) or any of these in parentheses.
    fn exponent(&mut self) -> Result<Rational> {
        if self.peek() == &Tok::LParen {
            self.at += 1;
            let r = self.signed_rational(false)?;
            self.expect(Tok::RParen)?;
            return Ok(r);
        }
        self.signed_rational(true)
    }

    fn signed_rational(&mut self, tight: bool) -> Result<Rational> {
        let negative = match self.peek() {
            Tok::Minus => {
                self.at += 1;
                true
            }
            Tok::Plus => {
                self.at += 1;
                false
            }
            _ => false,
        };
        let num = self.integer("an exponent")?;
        let mut r = Rational::from_integer(num);
        let glued = |p: &Parser, i: usize| !p.toks[i].spaced;
        if self.peek() == &Tok::Slash && (!tight || (glued(self, self.at) && glued(self, self.at + 1))) {
            if let Tok::Int(_) = self.toks[self.at + 1].tok {
                self.at += 1;
                let pos = self.pos();
                let den = self.integer("a denominator")?;
                if den.is_zero() {
                    return Err(syntax(pos, "zero denominator"));
                }
                r /= Rational::from_integer(den);
            }
        }
        Ok(if negative { -r } else { r })
    }

    fn integer(&mut self, what: &str) -> Result<BigInt> {
        match self.next() {
            Token { tok: Tok::Int(n), .. } => Ok(n),
            t => Err(syntax(t.pos, format!("expected {what}, found {}", t.tok.describe()))),
        }
    }

    fn args(&mut self, close: Tok) -> Result<Vec<Expr>> {
        let mut out = Vec::new();
        if *self.peek() == close {
            self.at += 1;
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            match self.peek() {
                Tok::Comma => self.at += 1,
                t if *t == close => {
                    self.at += 1;
                    return Ok(out);
                }
                t => {
                    return Err(syntax(
                        self.pos(),
                        format!("expected `,` or {}, found {}", close.describe(), t.describe()),
                    ))
                }
            }
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let t = self.next();
        match t.tok {
            Tok::Int(n) => Ok(Expr::Num(n)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBracket => {
                self.enter()?;
                let items = self.args(Tok::RBracket)?;
                self.depth -= 1;
                Ok(Expr::List(items))
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::X),
                "exp" | "log" if self.peek() == &Tok::LParen => Err(syntax(
                    t.pos,
                    format!("`{name}` is a monomial; apply `{name}of(...)` to a series"),
                )),
                "exp" => Ok(Expr::Exp),
                "log" if self.peek() == &Tok::LBracket => {
                    self.at += 1;
                    let pos = self.pos();
                    let k = self.integer("a level")?;
                    self.expect(Tok::RBracket)?;
                    match k.to_u32() {
                        Some(k) if (1..=64).contains(&k) => Ok(Expr::Log(k)),
                        _ => Err(syntax(pos, "log[k] needs 1 ≤ k ≤ 64")),
                    }
                }
                "log" => Ok(Expr::Log(1)),
                "let" => Err(syntax(t.pos, "`let` must start a statement")),
                _ if self.peek() == &Tok::LParen => {
                    self.enter()?;
                    self.at += 1;
                    let args = self.args(Tok::RParen)?;
                    self.depth -= 1;
                    Ok(Expr::Call(name, args))
                }
                _ => Ok(Expr::Name(name)),
            },
            other => Err(syntax(t.pos, format!("expected an expression, found {}", other.describe()))),
        }
    }
}
