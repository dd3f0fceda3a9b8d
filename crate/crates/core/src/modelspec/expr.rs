//! Arithmetic expressions: parsing, printing and evaluation.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-'? atom ('^' factor)?
//! atom   := number | identifier | call | '(' expr ')'
//! call   := ('sin' | 'cos' | 'exp') '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-2^2`
//! is `-4` and `2^-1` is `0.5`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub const ALL: [Func; 3] = [Func::Sin, Func::Cos, Func::Exp];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: expected {}, found {found}", expected_list(.expected))]
pub struct ParseError {
    pub offset: usize,
    pub expected: BTreeSet<&'static str>,
    pub found: String,
}

fn expected_list(expected: &BTreeSet<&'static str>) -> String {
    let items: Vec<&str> = expected.iter().copied().collect();
    match items.len() {
        1 => items[0].to_string(),
        _ => format!("one of {}", items.join(", ")),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is outside the domain of real arithmetic")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok<'a> {
    Num(f64),
    Ident(&'a str),
    Op(u8),
    End,
}

impl fmt::Display for Tok<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "number {x}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Op(c) => write!(f, "'{}'", *c as char),
            Tok::End => f.write_str("end of input"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok<'a>,
    tok_start: usize,
}

const ATOM_START: [&str; 4] = ["number", "identifier", "'('", "'-'"];

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut p = Parser { src, pos: 0, tok: Tok::End, tok_start: 0 };
        p.advance()?;
        Ok(p)
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError { offset: self.tok_start, expected: expected.iter().copied().collect(), found: self.tok.to_string() }
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            self.tok = Tok::End;
            return Ok(());
        };
        if c.is_ascii_digit() || c == b'.' {
            let end = scan_number(bytes, self.pos);
            let text = &self.src[self.pos..end];
            let value = text.parse::<f64>().map_err(|_| ParseError {
                offset: self.pos,
                expected: ["number"].into_iter().collect(),
                found: format!("`{text}`"),
            })?;
            self.pos = end;
            self.tok = Tok::Num(value);
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let end = self.pos
                + bytes[self.pos..].iter().take_while(|b| b.is_ascii_alphanumeric() || **b == b'_').count();
            self.tok = Tok::Ident(&self.src[self.pos..end]);
            self.pos = end;
        } else if b"+-*/^()".contains(&c) {
            self.pos += 1;
            self.tok = Tok::Op(c);
        } else {
            let ch = self.src[self.pos..].chars().next().expect("in bounds");
            return Err(ParseError {
                offset: self.pos,
                expected: ["number", "identifier", "operator"].into_iter().collect(),
                found: format!("character {ch:?}"),
            });
        }
        Ok(())
    }

    fn eat(&mut self, op: u8) -> Result<bool, ParseError> {
        if self.tok == Tok::Op(op) {
            self.advance()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Op(b'+') => BinOp::Add,
                Tok::Op(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.tok {
                Tok::Op(b'*') => BinOp::Mul,
                Tok::Op(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.factor()?));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let negate = self.eat(b'-')?;
        let base = self.atom(negate)?;
        let e = if self.eat(b'^')? { Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.factor()?)) } else { base };
        Ok(if negate { Expr::Neg(Box::new(e)) } else { e })
    }

    fn atom(&mut self, after_minus: bool) -> Result<Expr, ParseError> {
        let expected: &[&str] = if after_minus { &ATOM_START[..3] } else { &ATOM_START };
        match self.tok {
            Tok::Num(x) => {
                self.advance()?;
                Ok(Expr::Num(x))
            }
            Tok::Ident(name) => {
                let start = self.tok_start;
                self.advance()?;
                if self.tok != Tok::Op(b'(') {
                    return Ok(Expr::Var(name.to_string()));
                }
                let Some(func) = Func::from_name(name) else {
                    return Err(ParseError {
                        offset: start,
                        expected: Func::ALL.iter().map(|f| f.name()).collect(),
                        found: format!("unknown function `{name}`"),
                    });
                };
                self.advance()?;
                let arg = self.expr()?;
                self.close()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::Op(b'(') => {
                self.advance()?;
                let e = self.expr()?;
                self.close()?;
                Ok(e)
            }
            _ => Err(self.error(expected)),
        }
    }

    fn close(&mut self) -> Result<(), ParseError> {
        if self.eat(b')')? {
            Ok(())
        } else {
            Err(self.error(&["')'", "operator"]))
        }
    }
}

/// End of a decimal literal `digits [. digits] [(e|E) [+|-] digits]`.
fn scan_number(bytes: &[u8], start: usize) -> usize {
    let digits = |mut i: usize| {
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    let mut i = digits(start);
    if bytes.get(i) == Some(&b'.') {
        i = digits(i + 1);
    }
    if matches!(bytes.get(i), Some(b'e' | b'E')) {
        let mut j = i + 1;
        if matches!(bytes.get(j), Some(b'+' | b'-')) {
            j += 1;
        }
        if bytes.get(j).is_some_and(u8::is_ascii_digit) {
            i = digits(j);
        }
    }
    i
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

// Printing precedence levels, loosest first.
const SUM: u8 = 0;
const PRODUCT: u8 = 1;
const FACTOR: u8 = 2;
const POWER_BASE: u8 = 3;

impl Expr {
    fn level(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => SUM,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => PRODUCT,
            Expr::Neg(_) | Expr::Bin(BinOp::Pow, ..) => FACTOR,
            Expr::Num(x) if x.is_sign_negative() => FACTOR,
            _ => POWER_BASE,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            f.write_str("(")?;
            self.write_at(f, SUM)?;
            return f.write_str(")");
        }
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(name) => f.write_str(name),
            Expr::Neg(inner) => {
                f.write_str("-")?;
                // the operand of a leading minus is an unsigned power or atom
                match inner.as_ref() {
                    Expr::Bin(BinOp::Pow, ..) => inner.write_at(f, FACTOR),
                    _ => inner.write_at(f, POWER_BASE),
                }
            }
            Expr::Bin(op, lhs, rhs) => {
                let (sym, l, r) = match op {
                    BinOp::Add => (" + ", SUM, PRODUCT),
                    BinOp::Sub => (" - ", SUM, PRODUCT),
                    BinOp::Mul => ("*", PRODUCT, FACTOR),
                    BinOp::Div => ("/", PRODUCT, FACTOR),
                    BinOp::Pow => ("^", POWER_BASE, FACTOR),
                };
                lhs.write_at(f, l)?;
                f.write_str(sym)?;
                rhs.write_at(f, r)
            }
            Expr::Call(func, arg) => {
                write!(f, "{}(", func.name())?;
                arg.write_at(f, SUM)?;
                f.write_str(")")
            }
        }
    }

    /// Free variables in order of first occurrence.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(name) => {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_vars(out),
            Expr::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn eval(&self, env: &HashMap<String, f64>) -> Result<f64, EvalError> {
        self.eval_with(&|name| env.get(name).copied())
    }

    pub(crate) fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, EvalError> {
        match self {
            Expr::Num(x) => Ok(*x),
            Expr::Var(name) => lookup(name).ok_or_else(|| EvalError::Unbound(name.clone())),
            Expr::Neg(e) => Ok(-e.eval_with(lookup)?),
            Expr::Bin(op, l, r) => binary(*op, l.eval_with(lookup)?, r.eval_with(lookup)?),
            Expr::Call(func, e) => call(*func, e.eval_with(lookup)?),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, SUM)
    }
}

fn checked(value: f64, what: impl FnOnce() -> String) -> Result<f64, EvalError> {
    if value.is_nan() {
        Err(EvalError::Domain(what()))
    } else {
        Ok(value)
    }
}

fn binary(op: BinOp, a: f64, b: f64) -> Result<f64, EvalError> {
    let value = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div if b == 0.0 => return Err(EvalError::DivisionByZero),
        BinOp::Div => a / b,
        BinOp::Pow => a.powf(b),
    };
    checked(value, || {
        let sym = match op {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        };
        format!("{a} {sym} {b}")
    })
}

fn call(func: Func, x: f64) -> Result<f64, EvalError> {
    checked(func.apply(x), || format!("{}({x})", func.name()))
}

/// Where a compiled variable reference reads from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    Input(usize),
    State(usize),
}

/// An expression with every variable resolved: parameters inlined as
/// constants, inputs and states as vector indices.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Compiled {
    Num(f64),
    Read(Slot),
    Neg(Box<Compiled>),
    Bin(BinOp, Box<Compiled>, Box<Compiled>),
    Call(Func, Box<Compiled>),
}

impl Compiled {
    pub(crate) fn new(e: &Expr, resolve: &dyn Fn(&str) -> Option<Compiled>) -> Result<Self, EvalError> {
        Ok(match e {
            Expr::Num(x) => Compiled::Num(*x),
            Expr::Var(name) => resolve(name).ok_or_else(|| EvalError::Unbound(name.clone()))?,
            Expr::Neg(e) => Compiled::Neg(Box::new(Self::new(e, resolve)?)),
            Expr::Bin(op, l, r) => Compiled::Bin(*op, Box::new(Self::new(l, resolve)?), Box::new(Self::new(r, resolve)?)),
            Expr::Call(f, e) => Compiled::Call(*f, Box::new(Self::new(e, resolve)?)),
        })
    }

    pub(crate) fn eval(&self, inputs: &[f64], states: &[f64]) -> Result<f64, EvalError> {
        match self {
            Compiled::Num(x) => Ok(*x),
            Compiled::Read(Slot::Input(i)) => Ok(inputs[*i]),
            Compiled::Read(Slot::State(i)) => Ok(states[*i]),
            Compiled::Neg(e) => Ok(-e.eval(inputs, states)?),
            Compiled::Bin(op, l, r) => binary(*op, l.eval(inputs, states)?, r.eval(inputs, states)?),
            Compiled::Call(f, e) => call(*f, e.eval(inputs, states)?),
        }
    }
}
