//! Formal expressions: arithmetic over names, Poisson-bracket nodes and
//! formal derivatives of structure functions.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary `-`, `^`. Exponents are
//! integer literals (optionally negative). `{f, g}` is a bracket node and
//! `diff(F, X)` the formal partial derivative of structure function `F`
//! with respect to generator `X`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::error::CatalogError;
use super::lexer::{tokenize, Spanned, Tok};
use crate::algebra::{DivisionByZero, GaussianRational, RatExpr};

/// Largest accepted absolute exponent.
pub const MAX_EXPONENT: i32 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formal {
    Num(GaussianRational),
    Sym(String),
    Neg(Box<Formal>),
    Add(Box<Formal>, Box<Formal>),
    Sub(Box<Formal>, Box<Formal>),
    Mul(Box<Formal>, Box<Formal>),
    Div(Box<Formal>, Box<Formal>),
    Pow(Box<Formal>, i32),
    Bracket(Box<Formal>, Box<Formal>),
    Diff(String, String),
}

impl Formal {
    pub fn sym(name: &str) -> Self {
        Formal::Sym(name.to_string())
    }

    pub fn bracket(a: Formal, b: Formal) -> Self {
        Formal::Bracket(Box::new(a), Box::new(b))
    }

    pub fn int(n: i64) -> Self {
        Formal::Num(GaussianRational::from_integer(n))
    }

    /// Every `Sym` name, plus structure-function and generator names used
    /// by `diff` nodes.
    pub fn symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Formal::Num(_) => {}
            Formal::Sym(s) => {
                out.insert(s.clone());
            }
            Formal::Neg(a) | Formal::Pow(a, _) => a.symbols(out),
            Formal::Add(a, b)
            | Formal::Sub(a, b)
            | Formal::Mul(a, b)
            | Formal::Div(a, b)
            | Formal::Bracket(a, b) => {
                a.symbols(out);
                b.symbols(out);
            }
            Formal::Diff(f, x) => {
                out.insert(f.clone());
                out.insert(x.clone());
            }
        }
    }

    pub fn contains_bracket(&self) -> bool {
        match self {
            Formal::Num(_) | Formal::Sym(_) | Formal::Diff(..) => false,
            Formal::Bracket(..) => true,
            Formal::Neg(a) | Formal::Pow(a, _) => a.contains_bracket(),
            Formal::Add(a, b) | Formal::Sub(a, b) | Formal::Mul(a, b) | Formal::Div(a, b) => {
                a.contains_bracket() || b.contains_bracket()
            }
        }
    }

    pub fn contains_diff(&self) -> bool {
        match self {
            Formal::Num(_) | Formal::Sym(_) => false,
            Formal::Diff(..) => true,
            Formal::Bracket(a, b) | Formal::Add(a, b) | Formal::Sub(a, b) | Formal::Mul(a, b) | Formal::Div(a, b) => {
                a.contains_diff() || b.contains_diff()
            }
            Formal::Neg(a) | Formal::Pow(a, _) => a.contains_diff(),
        }
    }

    /// Bracket nesting depth.
    pub fn depth(&self) -> usize {
        match self {
            Formal::Num(_) | Formal::Sym(_) | Formal::Diff(..) => 0,
            Formal::Bracket(a, b) => 1 + a.depth().max(b.depth()),
            Formal::Neg(a) | Formal::Pow(a, _) => a.depth(),
            Formal::Add(a, b) | Formal::Sub(a, b) | Formal::Mul(a, b) | Formal::Div(a, b) => {
                a.depth().max(b.depth())
            }
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formal::Add(..) | Formal::Sub(..) => 1,
            Formal::Mul(..) | Formal::Div(..) => 2,
            Formal::Neg(_) => 3,
            Formal::Pow(..) => 4,
            Formal::Sym(_) | Formal::Bracket(..) | Formal::Diff(..) => 5,
            Formal::Num(c) => num_prec(c),
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.prec() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Formal::Num(c) => write!(f, "{c}")?,
            Formal::Sym(s) => f.write_str(s)?,
            Formal::Neg(a) => {
                f.write_str("-")?;
                a.write_prec(f, 3)?;
            }
            Formal::Add(a, b) => {
                a.write_prec(f, 1)?;
                f.write_str(" + ")?;
                b.write_prec(f, 2)?;
            }
            Formal::Sub(a, b) => {
                a.write_prec(f, 1)?;
                f.write_str(" - ")?;
                b.write_prec(f, 2)?;
            }
            Formal::Mul(a, b) => {
                a.write_prec(f, 2)?;
                f.write_str("*")?;
                b.write_prec(f, 3)?;
            }
            Formal::Div(a, b) => {
                a.write_prec(f, 2)?;
                f.write_str("/")?;
                b.write_prec(f, 3)?;
            }
            Formal::Pow(a, k) => {
                a.write_prec(f, 5)?;
                write!(f, "^{k}")?;
            }
            Formal::Bracket(a, b) => {
                f.write_str("{")?;
                a.write_prec(f, 1)?;
                f.write_str(", ")?;
                b.write_prec(f, 1)?;
                f.write_str("}")?;
            }
            Formal::Diff(func, x) => write!(f, "diff({func}, {x})")?,
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn num_prec(c: &GaussianRational) -> u8 {
    let (re, im) = (c.re(), c.im());
    if im.is_zero() {
        if re < &num_rational::BigRational::zero() {
            3
        } else if re.is_integer() {
            5
        } else {
            2
        }
    } else if re.is_zero() {
        if im < &num_rational::BigRational::zero() {
            3
        } else if im == &num_rational::BigRational::from_integer(1.into()) {
            5
        } else {
            2
        }
    } else {
        5
    }
}

impl fmt::Display for Formal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

/// Recursive-descent parser over a token slice.
pub(crate) struct ExprParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    /// Position reported when input ends unexpectedly.
    end: (usize, usize),
}

impl<'a> ExprParser<'a> {
    pub fn new(toks: &'a [Spanned], end: (usize, usize)) -> Self {
        ExprParser { toks, pos: 0, end }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn position(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or(self.end)
    }

    pub fn error(&self, msg: impl Into<String>) -> CatalogError {
        let (l, c) = self.position();
        CatalogError::syntax(l, c, msg)
    }

    pub fn unexpected(&self, wanted: &str) -> CatalogError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    pub fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos).map(|t| &t.tok);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), CatalogError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    pub fn ident(&mut self) -> Result<String, CatalogError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    pub fn integer(&mut self) -> Result<BigInt, CatalogError> {
        match self.peek() {
            Some(Tok::Int(s)) => {
                self.pos += 1;
                Ok(s.parse().expect("lexer yields digits"))
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    pub fn sum(&mut self) -> Result<Formal, CatalogError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat(&Tok::Plus) {
                let rhs = self.product()?;
                lhs = Formal::Add(Box::new(lhs), Box::new(rhs));
            } else if self.eat(&Tok::Minus) {
                let rhs = self.product()?;
                lhs = Formal::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Formal, CatalogError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                let rhs = self.unary()?;
                lhs = Formal::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.eat(&Tok::Slash) {
                let rhs = self.unary()?;
                lhs = Formal::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Formal, CatalogError> {
        if self.eat(&Tok::Minus) {
            return Ok(Formal::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Formal, CatalogError> {
        let base = self.atom()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let neg = self.eat(&Tok::Minus);
        let n = self.integer()?;
        let k: i32 = match i32::try_from(&n) {
            Ok(k) if k <= MAX_EXPONENT => k,
            _ => return Err(self.error(format!("exponent exceeds {MAX_EXPONENT}"))),
        };
        Ok(Formal::Pow(Box::new(base), if neg { -k } else { k }))
    }

    fn atom(&mut self) -> Result<Formal, CatalogError> {
        match self.peek() {
            Some(Tok::Int(_)) => {
                let n = self.integer()?;
                Ok(Formal::Num(GaussianRational::from_bigint(n)))
            }
            Some(Tok::Ident(s)) if s == "i" => {
                self.pos += 1;
                Ok(Formal::Num(GaussianRational::i()))
            }
            Some(Tok::Ident(s)) if s == "diff" && self.toks.get(self.pos + 1).map(|t| &t.tok) == Some(&Tok::LParen) => {
                self.pos += 2;
                let func = self.ident()?;
                self.expect(&Tok::Comma)?;
                let x = self.ident()?;
                self.expect(&Tok::RParen)?;
                Ok(Formal::Diff(func, x))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Formal::Sym(s.clone()))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::LBrace) => {
                self.pos += 1;
                let a = self.sum()?;
                self.expect(&Tok::Comma)?;
                let b = self.sum()?;
                self.expect(&Tok::RBrace)?;
                Ok(Formal::bracket(a, b))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

/// Parse a complete formal expression.
pub fn parse_formal(text: &str) -> Result<Formal, CatalogError> {
    let toks = tokenize(text, 1, 1)?;
    let end = end_position(text);
    let mut p = ExprParser::new(&toks, end);
    let e = p.sum()?;
    if !p.at_end() {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

pub(crate) fn end_position(text: &str) -> (usize, usize) {
    let line = text.lines().count().max(1);
    let col = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Name resolution and bracket semantics for [`evaluate`].
pub trait FormalEnv {
    fn symbol(&self, name: &str) -> Option<RatExpr>;
    /// The bracket of two evaluated operands; `None` if brackets are not
    /// meaningful in this context.
    fn bracket(&self, a: &RatExpr, b: &RatExpr) -> Option<RatExpr>;
    /// `diff(F, X)` already substituted into the evaluation space.
    fn diff(&self, func: &str, wrt: &str) -> Option<RatExpr>;
    /// Hook to evaluate a bracket node before its operands; lets an
    /// environment memoize by the operands' text.
    fn bracket_formal(&self, _a: &Formal, _b: &Formal) -> Option<Result<RatExpr, FormalError>> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormalError {
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("bracket not allowed here")]
    BracketNotAllowed,
    #[error("cannot differentiate `{0}` with respect to `{1}`")]
    BadDiff(String, String),
    #[error("division by zero")]
    DivisionByZero,
}

impl From<DivisionByZero> for FormalError {
    fn from(_: DivisionByZero) -> Self {
        FormalError::DivisionByZero
    }
}

/// Evaluate a formal expression to a rational function.
pub fn evaluate<E: FormalEnv + ?Sized>(f: &Formal, env: &E) -> Result<RatExpr, FormalError> {
    Ok(match f {
        Formal::Num(c) => RatExpr::constant(c.clone()),
        Formal::Sym(s) => env.symbol(s).ok_or_else(|| FormalError::Unbound(s.clone()))?,
        Formal::Neg(a) => evaluate(a, env)?.neg(),
        Formal::Add(a, b) => evaluate(a, env)?.add(&evaluate(b, env)?),
        Formal::Sub(a, b) => evaluate(a, env)?.sub(&evaluate(b, env)?),
        Formal::Mul(a, b) => evaluate(a, env)?.mul(&evaluate(b, env)?),
        Formal::Div(a, b) => evaluate(a, env)?.mul(&reciprocal(b, env)?),
        Formal::Pow(a, k) => evaluate(a, env)?.pow(*k)?,
        Formal::Bracket(a, b) => {
            if let Some(r) = env.bracket_formal(a, b) {
                return r;
            }
            let (a, b) = (evaluate(a, env)?, evaluate(b, env)?);
            env.bracket(&a, &b).ok_or(FormalError::BracketNotAllowed)?
        }
        Formal::Diff(func, x) => env
            .diff(func, x)
            .ok_or_else(|| FormalError::BadDiff(func.clone(), x.clone()))?,
    })
}

/// `1/f`, inverting products and powers factor by factor so that known
/// denominator factors never need to be rediscovered in an expansion.
fn reciprocal<E: FormalEnv + ?Sized>(f: &Formal, env: &E) -> Result<RatExpr, FormalError> {
    match f {
        Formal::Mul(a, b) => Ok(reciprocal(a, env)?.mul(&reciprocal(b, env)?)),
        Formal::Pow(a, k) => Ok(reciprocal(a, env)?.pow(*k)?),
        Formal::Neg(a) => Ok(reciprocal(a, env)?.neg()),
        _ => Ok(evaluate(f, env)?.inv()?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse_formal("-x^2 + a*b/c - d").unwrap();
        assert_eq!(e.to_string(), "-x^2 + a*b/c - d");
        match &e {
            Formal::Sub(l, _) => match l.as_ref() {
                Formal::Add(n, _) => assert!(matches!(n.as_ref(), Formal::Neg(_))),
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse_formal("-x^2").unwrap();
        assert!(matches!(e, Formal::Neg(ref a) if matches!(**a, Formal::Pow(_, 2))));
    }

    #[test]
    fn nested_bracket() {
        let e = parse_formal("{A1,{A1,B1}}").unwrap();
        assert_eq!(e.depth(), 2);
        assert_eq!(e.to_string(), "{A1, {A1, B1}}");
    }

    #[test]
    fn diff_node_and_parens() {
        let e = parse_formal("2*(a + b)*diff(F1, B1)").unwrap();
        assert_eq!(e.to_string(), "2*(a + b)*diff(F1, B1)");
        let e = parse_formal("(a - b) - (c - d)").unwrap();
        assert_eq!(e.to_string(), "a - b - (c - d)");
    }

    #[test]
    fn reprint_is_fixed_point() {
        for s in [
            "alpha/(x + i*y)^2",
            "a*-b",
            "x^-2 - -3",
            "(1 + 2)*i*x",
            "{{A1, F}, A2} - 8*A1*A2",
        ] {
            let e = parse_formal(s).unwrap();
            let again = parse_formal(&e.to_string()).unwrap();
            assert_eq!(e, again, "{s}");
        }
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_formal("x + * y").unwrap_err();
        assert!(matches!(err, CatalogError::Syntax { line: 1, col: 5, .. }));
        assert!(parse_formal("{A1, B1").is_err());
        assert!(parse_formal("x^100").is_err());
        assert!(parse_formal("x y").is_err());
    }
}
