//! Expression grammar for curve definitions.
//!
//! Grammar (one free variable `x`):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?        -- exponent must fold to an integer
//! atom  := number | 'x' | func '(' expr ')' | '(' expr ')'
//! func  := exp | log | sin | cos | sqrt
//! ```
//!
//! Precedence: `^` (right-assoc) binds tighter than unary `-`, which binds
//! tighter than `* /`, which bind tighter than `+ -`. Number literals are
//! decimal (`0.25`) or integer, held exactly as rationals; the parser folds
//! `Num / Num` and `-Num`, so `1/2` and `3/7` behave as rational literals
//! and survive into the exact-arithmetic paths unrounded.

use crate::rat::{poly_eval, rat_int, rat_to_f64, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unexpected character '{ch}' at column {col}")]
    UnexpectedChar { ch: char, col: usize },
    #[error("malformed number at columns {span:?}")]
    MalformedNumber { span: (usize, usize) },
    #[error("unknown identifier '{name}' at columns {span:?}")]
    UnknownIdent { name: String, span: (usize, usize) },
    #[error("expected {expected} at column {col}")]
    Expected { expected: &'static str, col: usize },
    #[error("exponent at columns {span:?} must be an integer constant")]
    NonIntegerExponent { span: (usize, usize) },
    #[error("exponent at columns {span:?} exceeds the supported magnitude of {max}")]
    ExponentTooLarge { span: (usize, usize), max: i64 },
    #[error("unexpected trailing input at column {col}")]
    TrailingInput { col: usize },
}

/// Byte range of a node in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Num(Rat),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Integer power `base^exp`.
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

/// Structural equality ignores spans: `parse(print(e)) == e` must hold even
/// though printing normalises whitespace.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Num(a), ExprKind::Num(b)) => a == b,
            (ExprKind::Var, ExprKind::Var) => true,
            (ExprKind::Neg(a), ExprKind::Neg(b)) => a == b,
            (ExprKind::Bin(o1, a1, b1), ExprKind::Bin(o2, a2, b2)) => {
                o1 == o2 && a1 == a2 && b1 == b2
            }
            (ExprKind::Pow(a, n), ExprKind::Pow(b, m)) => n == m && a == b,
            (ExprKind::Call(f, a), ExprKind::Call(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

const DUMMY: Span = Span { start: 0, end: 0 };

impl Expr {
    pub fn num(r: Rat) -> Expr {
        Expr {
            kind: ExprKind::Num(r),
            span: DUMMY,
        }
    }

    pub fn num_i(n: i64) -> Expr {
        Expr::num(rat_int(n))
    }

    pub fn var() -> Expr {
        Expr {
            kind: ExprKind::Var,
            span: DUMMY,
        }
    }

    fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr {
            kind: ExprKind::Bin(op, Box::new(l), Box::new(r)),
            span: DUMMY,
        }
    }

    fn neg(e: Expr) -> Expr {
        match e.kind {
            ExprKind::Num(r) => Expr::num(-r),
            _ => Expr {
                kind: ExprKind::Neg(Box::new(e)),
                span: DUMMY,
            },
        }
    }

    fn pow(e: Expr, n: i32) -> Expr {
        Expr {
            kind: ExprKind::Pow(Box::new(e), n),
            span: DUMMY,
        }
    }

    fn call(f: Func, e: Expr) -> Expr {
        Expr {
            kind: ExprKind::Call(f, Box::new(e)),
            span: DUMMY,
        }
    }

    fn as_num(&self) -> Option<&Rat> {
        match &self.kind {
            ExprKind::Num(r) => Some(r),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.as_num().is_some_and(Rat::is_zero)
    }

    fn is_one(&self) -> bool {
        self.as_num().is_some_and(Rat::is_one)
    }

    /// Evaluate at a double-precision point.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            ExprKind::Num(r) => rat_to_f64(r),
            ExprKind::Var => x,
            ExprKind::Neg(e) => -e.eval(x),
            ExprKind::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            ExprKind::Pow(e, n) => e.eval(x).powi(*n),
            ExprKind::Call(f, e) => {
                let v = e.eval(x);
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sqrt => v.sqrt(),
                }
            }
        }
    }

    /// Symbolic derivative d/dx, lightly simplified.
    pub fn derivative(&self) -> Expr {
        let d = match &self.kind {
            ExprKind::Num(_) => Expr::num_i(0),
            ExprKind::Var => Expr::num_i(1),
            ExprKind::Neg(e) => Expr::neg(e.derivative()),
            ExprKind::Bin(BinOp::Add, a, b) => {
                Expr::bin(BinOp::Add, a.derivative(), b.derivative())
            }
            ExprKind::Bin(BinOp::Sub, a, b) => {
                Expr::bin(BinOp::Sub, a.derivative(), b.derivative())
            }
            ExprKind::Bin(BinOp::Mul, a, b) => Expr::bin(
                BinOp::Add,
                Expr::bin(BinOp::Mul, a.derivative(), (**b).clone()),
                Expr::bin(BinOp::Mul, (**a).clone(), b.derivative()),
            ),
            ExprKind::Bin(BinOp::Div, a, b) => Expr::bin(
                BinOp::Div,
                Expr::bin(
                    BinOp::Sub,
                    Expr::bin(BinOp::Mul, a.derivative(), (**b).clone()),
                    Expr::bin(BinOp::Mul, (**a).clone(), b.derivative()),
                ),
                Expr::pow((**b).clone(), 2),
            ),
            ExprKind::Pow(e, n) => {
                // d(u^n) = n u^(n-1) u'
                Expr::bin(
                    BinOp::Mul,
                    Expr::bin(
                        BinOp::Mul,
                        Expr::num_i(*n as i64),
                        Expr::pow((**e).clone(), n - 1),
                    ),
                    e.derivative(),
                )
            }
            ExprKind::Call(f, e) => {
                let outer = match f {
                    Func::Exp => Expr::call(Func::Exp, (**e).clone()),
                    Func::Log => Expr::bin(BinOp::Div, Expr::num_i(1), (**e).clone()),
                    Func::Sin => Expr::call(Func::Cos, (**e).clone()),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, (**e).clone())),
                    Func::Sqrt => Expr::bin(
                        BinOp::Div,
                        Expr::num(Rat::new(BigInt::one(), BigInt::from(2))),
                        Expr::call(Func::Sqrt, (**e).clone()),
                    ),
                };
                Expr::bin(BinOp::Mul, outer, e.derivative())
            }
        };
        d.simplified()
    }

    /// Constant folding plus 0/1 identities. Conservative: never changes
    /// the value, including on non-finite inputs (no `0 * e -> 0` when `e`
    /// could be infinite matters little here; curve domains are compact).
    pub fn simplified(&self) -> Expr {
        match &self.kind {
            ExprKind::Num(_) | ExprKind::Var => self.clone(),
            ExprKind::Neg(e) => {
                let e = e.simplified();
                match e.kind {
                    ExprKind::Num(r) => Expr::num(-r),
                    ExprKind::Neg(inner) => *inner,
                    _ => Expr::neg(e),
                }
            }
            ExprKind::Bin(op, a, b) => {
                let a = a.simplified();
                let b = b.simplified();
                if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
                    match op {
                        BinOp::Add => return Expr::num(x + y),
                        BinOp::Sub => return Expr::num(x - y),
                        BinOp::Mul => return Expr::num(x * y),
                        BinOp::Div if !y.is_zero() => return Expr::num(x / y),
                        BinOp::Div => {}
                    }
                }
                match op {
                    BinOp::Add if a.is_zero() => b,
                    BinOp::Add if b.is_zero() => a,
                    BinOp::Sub if b.is_zero() => a,
                    BinOp::Sub if a.is_zero() => Expr::neg(b),
                    BinOp::Mul if a.is_zero() || b.is_zero() => Expr::num_i(0),
                    BinOp::Mul if a.is_one() => b,
                    BinOp::Mul if b.is_one() => a,
                    BinOp::Div if b.is_one() => a,
                    _ => Expr::bin(*op, a, b),
                }
            }
            ExprKind::Pow(e, n) => {
                let e = e.simplified();
                match *n {
                    0 => Expr::num_i(1),
                    1 => e,
                    n => {
                        if let Some(r) = e.as_num() {
                            if n > 0 {
                                let mut acc = Rat::one();
                                for _ in 0..n {
                                    acc *= r;
                                }
                                return Expr::num(acc);
                            }
                        }
                        Expr::pow(e, n)
                    }
                }
            }
            ExprKind::Call(f, e) => Expr::call(*f, e.simplified()),
        }
    }

    /// Coefficients (ascending degree) when the expression is a polynomial
    /// with rational coefficients. Division is allowed only by nonzero
    /// constants, powers only with nonnegative exponents.
    pub fn as_polynomial(&self) -> Option<Vec<Rat>> {
        const MAX_DEG: usize = 130;
        fn trim(mut v: Vec<Rat>) -> Vec<Rat> {
            while v.len() > 1 && v.last().is_some_and(Rat::is_zero) {
                v.pop();
            }
            v
        }
        fn mul(a: &[Rat], b: &[Rat]) -> Option<Vec<Rat>> {
            if a.len() + b.len() > MAX_DEG + 2 {
                return None;
            }
            let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            Some(trim(out))
        }
        fn add(a: Vec<Rat>, b: Vec<Rat>, sub: bool) -> Vec<Rat> {
            let n = a.len().max(b.len());
            let mut out = vec![Rat::zero(); n];
            for (i, x) in a.into_iter().enumerate() {
                out[i] += x;
            }
            for (i, y) in b.into_iter().enumerate() {
                if sub {
                    out[i] -= y;
                } else {
                    out[i] += y;
                }
            }
            trim(out)
        }
        match &self.kind {
            ExprKind::Num(r) => Some(vec![r.clone()]),
            ExprKind::Var => Some(vec![Rat::zero(), Rat::one()]),
            ExprKind::Neg(e) => Some(e.as_polynomial()?.into_iter().map(|c| -c).collect()),
            ExprKind::Bin(BinOp::Add, a, b) => {
                Some(add(a.as_polynomial()?, b.as_polynomial()?, false))
            }
            ExprKind::Bin(BinOp::Sub, a, b) => {
                Some(add(a.as_polynomial()?, b.as_polynomial()?, true))
            }
            ExprKind::Bin(BinOp::Mul, a, b) => mul(&a.as_polynomial()?, &b.as_polynomial()?),
            ExprKind::Bin(BinOp::Div, a, b) => {
                let num = a.as_polynomial()?;
                let den = b.as_polynomial()?;
                if den.len() == 1 && !den[0].is_zero() {
                    Some(num.into_iter().map(|c| c / &den[0]).collect())
                } else {
                    None
                }
            }
            ExprKind::Pow(e, n) => {
                if *n < 0 {
                    return None;
                }
                let base = e.as_polynomial()?;
                let mut acc = vec![Rat::one()];
                for _ in 0..*n {
                    acc = mul(&acc, &base)?;
                }
                Some(acc)
            }
            ExprKind::Call(..) => None,
        }
    }
}

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        // a non-integer literal prints as `a/b` and re-parses at division
        // precedence; a negative integer prints with a leading minus
        ExprKind::Num(r) if !r.denom().is_one() => 2,
        ExprKind::Num(r) if r.is_negative() => 3,
        ExprKind::Num(_) | ExprKind::Var | ExprKind::Call(..) => 5,
        ExprKind::Pow(..) => 4,
        ExprKind::Neg(_) => 3,
        ExprKind::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        ExprKind::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if prec(e) < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            ExprKind::Var => write!(f, "x"),
            ExprKind::Neg(e) => {
                write!(f, "-")?;
                write_child(f, e, 3)
            }
            ExprKind::Bin(op, a, b) => {
                let (sym, p) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                };
                write_child(f, a, p)?;
                write!(f, "{sym}")?;
                // right operand of - and / must bind strictly tighter
                write_child(f, b, p + 1)
            }
            ExprKind::Pow(e, n) => {
                write_child(f, e, 5)?;
                write!(f, "^{n}")
            }
            ExprKind::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer + parser
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct SpannedTok {
    tok: Tok,
    span: Span,
}

fn lex(src: &str) -> Result<Vec<SpannedTok>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    _ => Tok::RParen,
                };
                i += 1;
                toks.push(SpannedTok {
                    tok,
                    span: Span { start, end: i },
                });
            }
            '0'..='9' | '.' => {
                let mut seen_dot = false;
                while i < bytes.len() {
                    match bytes[i] as char {
                        '0'..='9' => i += 1,
                        '.' if !seen_dot => {
                            seen_dot = true;
                            i += 1;
                        }
                        _ => break,
                    }
                }
                let text = &src[start..i];
                let r = parse_decimal(text).ok_or(ParseError::MalformedNumber {
                    span: (start, i),
                })?;
                toks.push(SpannedTok {
                    tok: Tok::Num(r),
                    span: Span { start, end: i },
                });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push(SpannedTok {
                    tok: Tok::Ident(src[start..i].to_string()),
                    span: Span { start, end: i },
                });
            }
            _ => return Err(ParseError::UnexpectedChar { ch: c, col: i }),
        }
    }
    Ok(toks)
}

fn parse_decimal(text: &str) -> Option<Rat> {
    if text == "." {
        return None;
    }
    match text.split_once('.') {
        None => text.parse::<BigInt>().ok().map(Rat::from_integer),
        Some((int, frac)) => {
            let int: BigInt = if int.is_empty() {
                BigInt::zero()
            } else {
                int.parse().ok()?
            };
            if frac.is_empty() {
                return Some(Rat::from_integer(int));
            }
            let num: BigInt = frac.parse().ok()?;
            let den = BigInt::from(10u32).pow(frac.len() as u32);
            Some(Rat::from_integer(int) + Rat::new(num, den))
        }
    }
}

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
    src_len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|t| t.span.start)
            .unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<SpannedTok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok, expected: &'static str) -> Result<Span, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) if &t.tok == tok => {
                let s = t.span;
                self.pos += 1;
                Ok(s)
            }
            _ => Err(ParseError::Expected {
                expected,
                col: self.col(),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = fold_bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = fold_bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            let start = self.col();
            self.bump();
            let inner = self.unary()?;
            let end = inner.span.end;
            let mut e = Expr::neg(inner);
            e.span = Span { start, end };
            return Ok(e);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            // right-associative; exponent must fold to an integer constant
            let exp = self.unary()?;
            let span = Span {
                start: base.span.start,
                end: exp.span.end,
            };
            let n = fold_integer_exponent(&exp).ok_or(ParseError::NonIntegerExponent {
                span: (exp.span.start, exp.span.end),
            })?;
            if n.abs() > 64 {
                return Err(ParseError::ExponentTooLarge {
                    span: (exp.span.start, exp.span.end),
                    max: 64,
                });
            }
            let mut e = Expr::pow(base, n as i32);
            e.span = span;
            return Ok(e);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump().ok_or(ParseError::Expected {
            expected: "expression",
            col: self.src_len,
        })?;
        match t.tok {
            Tok::Num(r) => Ok(Expr {
                kind: ExprKind::Num(r),
                span: t.span,
            }),
            Tok::Ident(name) if name == "x" => Ok(Expr {
                kind: ExprKind::Var,
                span: t.span,
            }),
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "exp" => Func::Exp,
                    "log" => Func::Log,
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "sqrt" => Func::Sqrt,
                    _ => {
                        return Err(ParseError::UnknownIdent {
                            name,
                            span: (t.span.start, t.span.end),
                        })
                    }
                };
                self.eat(&Tok::LParen, "'(' after function name")?;
                let arg = self.expr()?;
                let close = self.eat(&Tok::RParen, "')'")?;
                Ok(Expr {
                    kind: ExprKind::Call(func, Box::new(arg)),
                    span: Span {
                        start: t.span.start,
                        end: close.end,
                    },
                })
            }
            Tok::LParen => {
                let inner = self.expr()?;
                let close = self.eat(&Tok::RParen, "')'")?;
                Ok(Expr {
                    span: Span {
                        start: t.span.start,
                        end: close.end,
                    },
                    ..inner
                })
            }
            _ => Err(ParseError::Expected {
                expected: "expression",
                col: t.span.start,
            }),
        }
    }
}

/// Fold `Num op Num` for `/` so rational literals like `3/7` come out as a
/// single exact constant.
fn fold_bin(op: BinOp, l: Expr, r: Expr) -> Expr {
    let span = Span {
        start: l.span.start,
        end: r.span.end,
    };
    if op == BinOp::Div {
        if let (ExprKind::Num(a), ExprKind::Num(b)) = (&l.kind, &r.kind) {
            if !b.is_zero() {
                return Expr {
                    kind: ExprKind::Num(a / b),
                    span,
                };
            }
        }
    }
    let mut e = Expr::bin(op, l, r);
    e.span = span;
    e
}

fn fold_integer_exponent(e: &Expr) -> Option<i64> {
    let folded = e.simplified();
    match folded.kind {
        ExprKind::Num(r) if r.denom().is_one() => r.numer().to_i64(),
        _ => None,
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        src_len: src.len(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ParseError::TrailingInput { col: p.col() });
    }
    Ok(e)
}

/// A parsed expression packaged with its first two symbolic derivatives,
/// ready to back a curve.
#[derive(Clone)]
pub struct CompiledExpr {
    pub expr: Arc<Expr>,
    pub d1: Arc<Expr>,
    pub d2: Arc<Expr>,
    pub poly: Option<Arc<Vec<Rat>>>,
}

impl CompiledExpr {
    pub fn compile(expr: Expr) -> CompiledExpr {
        let d1 = expr.derivative();
        let d2 = d1.derivative();
        let poly = expr.as_polynomial().map(Arc::new);
        CompiledExpr {
            expr: Arc::new(expr),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            poly,
        }
    }

    pub fn parse(src: &str) -> Result<CompiledExpr, ParseError> {
        Ok(Self::compile(parse(src)?))
    }

    pub fn eval_rational(&self, x: &Rat) -> Option<Rat> {
        self.poly.as_ref().map(|p| poly_eval(p, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use proptest::prelude::*;

    fn p(src: &str) -> Expr {
        parse(src).unwrap()
    }

    #[test]
    fn precedence_and_unary_minus() {
        // unary minus binds looser than ^
        assert_eq!(p("-x^2"), Expr::neg(Expr::pow(Expr::var(), 2)));
        assert_eq!(p("(-x)^2"), Expr::pow(Expr::neg(Expr::var()), 2));
        // ^ is right-associative through constant exponents
        assert_eq!(p("x^2^3"), Expr::pow(Expr::var(), 8));
        assert_eq!(
            p("1+2*x"),
            Expr::bin(
                BinOp::Add,
                Expr::num_i(1),
                Expr::bin(BinOp::Mul, Expr::num_i(2), Expr::var())
            )
        );
    }

    #[test]
    fn rational_literals_fold() {
        assert_eq!(p("3/7"), Expr::num(rat(3, 7)));
        assert_eq!(p("1/2*x^2 + 3/7").as_polynomial().unwrap(), vec![
            rat(3, 7),
            rat(0, 1),
            rat(1, 2)
        ]);
        // division by an expression is not a literal
        assert!(matches!(p("x/2").kind, ExprKind::Bin(BinOp::Div, ..)));
        // but x/2 is still a polynomial
        assert_eq!(p("x/2").as_polynomial().unwrap(), vec![rat(0, 1), rat(1, 2)]);
        assert_eq!(p("x^3/3+x").as_polynomial().unwrap(), vec![
            rat(0, 1),
            rat(1, 1),
            rat(0, 1),
            rat(1, 3)
        ]);
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(p("0.25"), Expr::num(rat(1, 4)));
        assert_eq!(p("2.5"), Expr::num(rat(5, 2)));
    }

    #[test]
    fn polynomial_detection_rejects_transcendentals() {
        assert!(p("exp(x)").as_polynomial().is_none());
        assert!(p("1/x").as_polynomial().is_none());
        assert!(p("x^-1").as_polynomial().is_none());
    }

    #[test]
    fn parse_errors_carry_position() {
        assert_eq!(
            parse("x + y"),
            Err(ParseError::UnknownIdent {
                name: "y".into(),
                span: (4, 5)
            })
        );
        assert!(matches!(parse("x^x"), Err(ParseError::NonIntegerExponent { .. })));
        assert!(matches!(parse("sin x"), Err(ParseError::Expected { .. })));
        assert!(matches!(parse("x 2"), Err(ParseError::TrailingInput { col: 2 })));
    }

    #[test]
    fn derivative_of_x_exp_x() {
        // d2 of x*exp(x) is (x+2)exp(x)
        let c = CompiledExpr::parse("x*exp(x)").unwrap();
        for &x in &[0.0f64, 0.5, 1.0, 1.7, 2.0] {
            let want = (x + 2.0) * x.exp();
            let got = c.d2.eval(x);
            assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "x={x}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let exprs = ["x^2", "x^3/3+x", "sin(x)*cos(x)", "exp(x)/(1+x^2)", "sqrt(x+2)", "log(x+3)"];
        for src in exprs {
            let c = CompiledExpr::parse(src).unwrap();
            for i in 0..50 {
                let x = -0.9 + 1.8 * (i as f64) / 49.0;
                let h = 1e-5 * (x.abs() + 1.0);
                let fd1 = (c.expr.eval(x + h) - c.expr.eval(x - h)) / (2.0 * h);
                let d1 = c.d1.eval(x);
                assert!(
                    (fd1 - d1).abs() <= 1e-6 * (1.0 + d1.abs()),
                    "{src} d1 at {x}: fd {fd1} vs sym {d1}"
                );
                let fd2 = (c.expr.eval(x + h) - 2.0 * c.expr.eval(x) + c.expr.eval(x - h)) / (h * h);
                let d2 = c.d2.eval(x);
                assert!(
                    (fd2 - d2).abs() <= 1e-4 * (1.0 + d2.abs()),
                    "{src} d2 at {x}: fd {fd2} vs sym {d2}"
                );
            }
        }
    }

    // Random AST generator for the round-trip property.
    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (any::<i32>(), 1u32..40).prop_map(|(n, d)| Expr::num(rat(n as i64, d as i64))),
            Just(Expr::var()),
        ];
        leaf.prop_recursive(5, 64, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), any::<u8>()).prop_map(|(a, b, op)| {
                    let op = match op % 4 {
                        0 => BinOp::Add,
                        1 => BinOp::Sub,
                        2 => BinOp::Mul,
                        _ => BinOp::Div,
                    };
                    // avoid Num/Num which the parser folds
                    if op == BinOp::Div
                        && matches!(a.kind, ExprKind::Num(_))
                        && matches!(b.kind, ExprKind::Num(_))
                    {
                        Expr::bin(BinOp::Add, a, b)
                    } else {
                        Expr::bin(op, a, b)
                    }
                }),
                inner.clone().prop_map(|e| {
                    // parser folds -Num into the literal
                    if matches!(e.kind, ExprKind::Num(_)) {
                        Expr::neg(e)
                    } else {
                        Expr {
                            kind: ExprKind::Neg(Box::new(e)),
                            span: DUMMY,
                        }
                    }
                }),
                (inner.clone(), 0i32..6).prop_map(|(e, n)| Expr::pow(e, n)),
                (inner, any::<u8>()).prop_map(|(e, f)| {
                    let f = match f % 5 {
                        0 => Func::Exp,
                        1 => Func::Log,
                        2 => Func::Sin,
                        3 => Func::Cos,
                        _ => Func::Sqrt,
                    };
                    Expr::call(f, e)
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap_or_else(|err| panic!("{printed}: {err}"));
            prop_assert_eq!(&reparsed, &e, "printed: {}", printed);
            // and printing is a fixed point
            prop_assert_eq!(reparsed.to_string(), printed);
        }
    }
}
