//! A small arithmetic expression language.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' exponent)?
//! exponent:= '-'? INT | '(' '-'? INT ')'
//! primary := NUMBER | IDENT | '(' expr ')'
//! ```
//!
//! So `-x^2` is `-(x^2)` and `-a*b` is `(-a)*b`. A rational literal such as
//! `10/32` is simply a quotient of two constants.
//!
//! Identifiers: `x` (first coordinate), `x_1 .. x_d` (coordinates), `s` and
//! `t` (arguments of auxiliary functions), `n` (index of a witness sequence).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// `x`, an alias of the first coordinate.
    X,
    /// `x_{i+1}`, zero-based index.
    Coord(usize),
    S,
    T,
    N,
}

impl Var {
    /// Coordinate index this variable reads, if it is a coordinate.
    pub fn coord_index(self) -> Option<usize> {
        match self {
            Var::X => Some(0),
            Var::Coord(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X => write!(f, "x"),
            Var::Coord(i) => write!(f, "x_{}", i + 1),
            Var::S => write!(f, "s"),
            Var::T => write!(f, "t"),
            Var::N => write!(f, "n"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let tokens = lex(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            end: text.len(),
        };
        let e = p.expr()?;
        if let Some(tok) = p.peek() {
            return Err(Error::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", tok.kind),
            });
        }
        Ok(e)
    }

    /// Evaluate with variable values supplied by `lookup`.
    pub fn eval<F>(&self, lookup: &F) -> Result<f64>
    where
        F: Fn(Var) -> Option<f64>,
    {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => lookup(*v).ok_or_else(|| Error::Eval(format!("variable `{v}` is not bound")))?,
            Expr::Neg(a) => -a.eval(lookup)?,
            Expr::Add(a, b) => a.eval(lookup)? + b.eval(lookup)?,
            Expr::Sub(a, b) => a.eval(lookup)? - b.eval(lookup)?,
            Expr::Mul(a, b) => a.eval(lookup)? * b.eval(lookup)?,
            Expr::Div(a, b) => {
                let den = b.eval(lookup)?;
                if den == 0.0 {
                    return Err(Error::Eval(format!("division by zero in `{self}`")));
                }
                a.eval(lookup)? / den
            }
            Expr::Pow(a, k) => {
                let base = a.eval(lookup)?;
                if base == 0.0 && *k < 0 {
                    return Err(Error::Eval(format!("division by zero in `{self}`")));
                }
                base.powi(*k)
            }
        })
    }

    /// Evaluate at a coordinate vector (`x`, `x_i` bound; nothing else).
    pub fn eval_at(&self, coords: &[f64]) -> Result<f64> {
        self.eval(&|v: Var| v.coord_index().and_then(|i| coords.get(i).copied()))
    }

    /// Evaluate with `s` and `t` bound.
    pub fn eval_st(&self, s: f64, t: f64) -> Result<f64> {
        self.eval(&|v: Var| match v {
            Var::S => Some(s),
            Var::T => Some(t),
            _ => None,
        })
    }

    /// Evaluate with only `t` bound.
    pub fn eval_t(&self, t: f64) -> Result<f64> {
        self.eval(&|v: Var| (v == Var::T).then_some(t))
    }

    /// Evaluate with only `n` bound.
    pub fn eval_n(&self, n: f64) -> Result<f64> {
        self.eval(&|v: Var| (v == Var::N).then_some(n))
    }

    /// Every variable occurring in the expression, sorted and deduplicated.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => out.push(*v),
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Fail with `UnknownIdentifier` if a variable outside `allowed` occurs.
    pub fn check_scope(&self, allowed: impl Fn(Var) -> bool) -> Result<()> {
        match self.variables().into_iter().find(|v| !allowed(*v)) {
            Some(v) => Err(Error::UnknownIdentifier {
                name: v.to_string(),
                offset: 0,
            }),
            None => Ok(()),
        }
    }

    /// Coefficients `(a, b)` with `self = a·x + b` when the expression is
    /// affine in the first coordinate and reads no other variable.
    pub fn affine_1d(&self) -> Option<(f64, f64)> {
        let (a, b) = match self {
            Expr::Const(c) => (0.0, *c),
            Expr::Var(Var::X) | Expr::Var(Var::Coord(0)) => (1.0, 0.0),
            Expr::Var(_) => return None,
            Expr::Neg(e) => {
                let (a, b) = e.affine_1d()?;
                (-a, -b)
            }
            Expr::Add(l, r) => {
                let (a1, b1) = l.affine_1d()?;
                let (a2, b2) = r.affine_1d()?;
                (a1 + a2, b1 + b2)
            }
            Expr::Sub(l, r) => {
                let (a1, b1) = l.affine_1d()?;
                let (a2, b2) = r.affine_1d()?;
                (a1 - a2, b1 - b2)
            }
            Expr::Mul(l, r) => {
                let (a1, b1) = l.affine_1d()?;
                let (a2, b2) = r.affine_1d()?;
                if a1 == 0.0 {
                    (b1 * a2, b1 * b2)
                } else if a2 == 0.0 {
                    (a1 * b2, b1 * b2)
                } else {
                    return None;
                }
            }
            Expr::Div(l, r) => {
                let (a1, b1) = l.affine_1d()?;
                let (a2, b2) = r.affine_1d()?;
                if a2 != 0.0 || b2 == 0.0 {
                    return None;
                }
                (a1 / b2, b1 / b2)
            }
            Expr::Pow(e, k) => {
                let (a, b) = e.affine_1d()?;
                match k {
                    0 => (0.0, 1.0),
                    1 => (a, b),
                    _ if a == 0.0 && (b != 0.0 || *k > 0) => (0.0, b.powi(*k)),
                    _ => return None,
                }
            }
        };
        (a.is_finite() && b.is_finite()).then_some((a, b))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 || c.is_sign_negative() => 3,
            Expr::Const(_) | Expr::Var(_) => 5,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let wrap = self.precedence() < min;
        if wrap {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(c) => write!(f, "{c}")?,
            Expr::Var(v) => write!(f, "{v}")?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_prec(f, 3)?;
            }
            Expr::Add(a, b) => binary(f, a, " + ", b, 1)?,
            Expr::Sub(a, b) => binary(f, a, " - ", b, 1)?,
            Expr::Mul(a, b) => binary(f, a, " * ", b, 2)?,
            Expr::Div(a, b) => binary(f, a, " / ", b, 2)?,
            Expr::Pow(a, k) => {
                a.write_prec(f, 5)?;
                write!(f, "^{k}")?;
            }
        }
        if wrap {
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn binary(f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr, prec: u8) -> fmt::Result {
    a.write_prec(f, prec)?;
    write!(f, "{op}")?;
    b.write_prec(f, prec + 1)
}

/// Prints with the minimal parentheses needed for `parse` to rebuild the same
/// tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(Var),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Num(v) => write!(f, "number {v}"),
            TokenKind::Ident(v) => write!(f, "identifier `{v}`"),
            TokenKind::Plus => write!(f, "`+`"),
            TokenKind::Minus => write!(f, "`-`"),
            TokenKind::Star => write!(f, "`*`"),
            TokenKind::Slash => write!(f, "`/`"),
            TokenKind::Caret => write!(f, "`^`"),
            TokenKind::LParen => write!(f, "`(`"),
            TokenKind::RParen => write!(f, "`)`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
    /// Literal text, kept for integer exponents.
    text: String,
}

fn identifier(name: &str, offset: usize) -> Result<Var> {
    let unknown = || Error::UnknownIdentifier {
        name: name.to_string(),
        offset,
    };
    match name {
        "x" => Ok(Var::X),
        "s" => Ok(Var::S),
        "t" => Ok(Var::T),
        "n" => Ok(Var::N),
        _ => {
            let idx = name.strip_prefix("x_").ok_or_else(unknown)?;
            if idx.is_empty() || !idx.bytes().all(|b| b.is_ascii_digit()) || idx.starts_with('0') {
                return Err(unknown());
            }
            let i: usize = idx.parse().map_err(|_| unknown())?;
            Ok(Var::Coord(i - 1))
        }
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = |kind| Token {
            kind,
            offset: start,
            text: (c as char).to_string(),
        };
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push(single(TokenKind::Plus)),
            b'-' => out.push(single(TokenKind::Minus)),
            b'*' => out.push(single(TokenKind::Star)),
            b'/' => out.push(single(TokenKind::Slash)),
            b'^' => out.push(single(TokenKind::Caret)),
            b'(' => out.push(single(TokenKind::LParen)),
            b')' => out.push(single(TokenKind::RParen)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{lit}`"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Syntax {
                        offset: start,
                        message: format!("number `{lit}` is out of range"),
                    });
                }
                out.push(Token {
                    kind: TokenKind::Num(value),
                    offset: start,
                    text: lit.to_string(),
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let name = &text[start..i];
                out.push(Token {
                    kind: TokenKind::Ident(identifier(name, start)?),
                    offset: start,
                    text: name.to_string(),
                });
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expect(&mut self, kind: TokenKind) -> Result<()> {
        match self.peek_kind() {
            Some(k) if *k == kind => {
                self.pos += 1;
                Ok(())
            }
            Some(k) => {
                let msg = format!("expected {kind}, found {k}");
                self.error(msg)
            }
            None => self.error(format!("expected {kind}, found end of input")),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek_kind() {
                Some(TokenKind::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(TokenKind::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek_kind() {
                Some(TokenKind::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(TokenKind::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_kind() == Some(&TokenKind::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek_kind() != Some(&TokenKind::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let k = if self.peek_kind() == Some(&TokenKind::LParen) {
            self.pos += 1;
            let k = self.signed_int()?;
            self.expect(TokenKind::RParen)?;
            k
        } else {
            self.signed_int()?
        };
        let e = Expr::Pow(Box::new(base), k);
        if self.peek_kind() == Some(&TokenKind::Caret) {
            return self.error("chained powers need parentheses, e.g. (x^2)^3");
        }
        Ok(e)
    }

    fn signed_int(&mut self) -> Result<i32> {
        let negative = if self.peek_kind() == Some(&TokenKind::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let offset = self.offset();
        match self.next() {
            Some(Token {
                kind: TokenKind::Num(_),
                text,
                ..
            }) if text.bytes().all(|b| b.is_ascii_digit()) => {
                let k: i32 = text.parse().map_err(|_| Error::Syntax {
                    offset,
                    message: format!("exponent `{text}` is too large"),
                })?;
                Ok(if negative { -k } else { k })
            }
            _ => Err(Error::Syntax {
                offset,
                message: "exponent must be an integer literal".into(),
            }),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let offset = self.offset();
        match self.next() {
            Some(Token {
                kind: TokenKind::Num(v),
                ..
            }) => Ok(Expr::Const(v)),
            Some(Token {
                kind: TokenKind::Ident(v),
                ..
            }) => Ok(Expr::Var(v)),
            Some(Token {
                kind: TokenKind::LParen,
                ..
            }) => {
                let e = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            Some(t) => Err(Error::Syntax {
                offset,
                message: format!("unexpected {}", t.kind),
            }),
            None => Err(Error::Syntax {
                offset,
                message: "unexpected end of input".into(),
            }),
        }
    }
}
