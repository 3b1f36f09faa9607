//! Quotients of polynomials with a factored, monic denominator.
//!
//! The denominator is kept as a product of monic factors. Factors come from
//! trial division against a small dictionary of linear forms
//! (`x, y, z, x±iy, y±iz`) plus single-variable content; whatever is left
//! over becomes one opaque factor. Equality never relies on this
//! simplification: it is decided by cross-multiplication.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::gaussian::GaussianRational;
use super::poly::PolyExpr;
use super::vars::{VarId, VarTable};

type Coeff = GaussianRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("denominator vanishes at the evaluation point")]
    DenominatorZero,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("division by the zero expression")]
pub struct DivisionByZero;

/// Total order on polynomials used to keep factor lists sorted.
fn poly_cmp(a: &PolyExpr, b: &PolyExpr) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        for ((ma, ca), (mb, cb)) in a.terms().iter().zip(b.terms()) {
            let o = ma
                .cmp(mb)
                .then_with(|| ca.re().cmp(cb.re()))
                .then_with(|| ca.im().cmp(cb.im()));
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    })
}

/// `∏ fᵢ^eᵢ` with every `fᵢ` monic and non-constant, sorted, no repeats.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Denominator {
    factors: Vec<(Arc<PolyExpr>, u32)>,
}

impl Denominator {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(Arc<PolyExpr>, u32)] {
        &self.factors
    }

    fn insert(&mut self, f: Arc<PolyExpr>, e: u32) {
        if e == 0 {
            return;
        }
        match self
            .factors
            .binary_search_by(|(g, _)| poly_cmp(g, &f))
        {
            Ok(k) => self.factors[k].1 += e,
            Err(k) => self.factors.insert(k, (f, e)),
        }
    }

    fn combine(&self, other: &Self, pick: impl Fn(u32, u32) -> u32) -> Self {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (a, b) = (&self.factors, &other.factors);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => poly_cmp(&x.0, &y.0),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => unreachable!(),
            };
            match ord {
                Ordering::Less => {
                    let e = pick(a[i].1, 0);
                    if e > 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                }
                Ordering::Greater => {
                    let e = pick(0, b[j].1);
                    if e > 0 {
                        out.push((b[j].0.clone(), e));
                    }
                    j += 1;
                }
                Ordering::Equal => {
                    let e = pick(a[i].1, b[j].1);
                    if e > 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Denominator { factors: out }
    }

    pub fn product(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn lcm(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a.max(b))
    }

    /// `self / other` as a polynomial, assuming `other` divides `self`
    /// factor-wise.
    fn cofactor_poly(&self, other: &Self) -> PolyExpr {
        let quotient = self.combine(other, |a, b| a.saturating_sub(b));
        quotient.to_poly()
    }

    pub fn to_poly(&self) -> PolyExpr {
        let mut acc = PolyExpr::one();
        for (f, e) in &self.factors {
            acc = acc.mul(&f.pow(*e));
        }
        acc
    }

    pub fn pow(&self, k: u32) -> Self {
        Denominator {
            factors: self
                .factors
                .iter()
                .filter(|_| k > 0)
                .map(|(f, e)| (f.clone(), e * k))
                .collect(),
        }
    }

    pub fn eval(&self, point: &[Coeff]) -> Coeff {
        let mut acc = Coeff::one();
        for (f, e) in &self.factors {
            acc = &acc * &f.eval(point).pow(*e);
        }
        acc
    }

    pub fn total_degree(&self) -> u32 {
        self.factors
            .iter()
            .map(|(f, e)| f.total_degree() * e)
            .sum()
    }
}

/// The dictionary of linear denominator factors beyond single variables.
fn dictionary() -> &'static [PolyExpr] {
    use std::sync::OnceLock;
    static DICT: OnceLock<Vec<PolyExpr>> = OnceLock::new();
    DICT.get_or_init(|| {
        let x = PolyExpr::var(VarId::X);
        let y = PolyExpr::var(VarId::Y);
        let z = PolyExpr::var(VarId::Z);
        let i = PolyExpr::constant(Coeff::i());
        vec![
            x.add(&i.mul(&y)),
            x.sub(&i.mul(&y)),
            y.add(&i.mul(&z)),
            y.sub(&i.mul(&z)),
        ]
    })
}

/// Split a nonzero polynomial into `constant × ∏ factors`.
pub fn factor_polynomial(p: &PolyExpr) -> (Coeff, Denominator) {
    let (monic, lc) = p.monic();
    let mut den = Denominator::one();
    let content = monic.monomial_content();
    let mut rest = if content.is_one() {
        monic
    } else {
        for (v, e) in content.factors() {
            den.insert(Arc::new(PolyExpr::var(v)), e as u32);
        }
        monic
            .div_exact(&PolyExpr::monomial(content, Coeff::one()))
            .expect("monomial content divides")
    };
    if rest.as_constant().is_none() {
        for d in dictionary() {
            let mut count = 0;
            while rest.total_degree() >= 1 {
                match rest.div_exact(d) {
                    Some(q) => {
                        rest = q;
                        count += 1;
                    }
                    None => break,
                }
            }
            if count > 0 {
                den.insert(Arc::new(d.clone()), count);
            }
        }
    }
    let (rest, rest_lc) = rest.monic();
    if rest.as_constant().is_none() {
        den.insert(Arc::new(rest), 1);
    }
    (&lc * &rest_lc, den)
}

/// A rational function `num / den` over a phase-space [`VarTable`].
#[derive(Clone, PartialEq, Eq)]
pub struct RatExpr {
    num: PolyExpr,
    den: Denominator,
}

impl Default for RatExpr {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<PolyExpr> for RatExpr {
    fn from(p: PolyExpr) -> Self {
        RatExpr {
            num: p,
            den: Denominator::one(),
        }
    }
}

impl RatExpr {
    pub fn zero() -> Self {
        PolyExpr::zero().into()
    }

    pub fn one() -> Self {
        PolyExpr::one().into()
    }

    pub fn constant(c: Coeff) -> Self {
        PolyExpr::constant(c).into()
    }

    pub fn integer(n: i64) -> Self {
        PolyExpr::integer(n).into()
    }

    pub fn var(v: VarId) -> Self {
        PolyExpr::var(v).into()
    }

    /// Build `num / den` for an arbitrary nonzero polynomial denominator.
    pub fn from_parts(num: PolyExpr, den: &PolyExpr) -> Result<Self, DivisionByZero> {
        RatExpr::from(num).div(&RatExpr::from(den.clone()))
    }

    pub fn num(&self) -> &PolyExpr {
        &self.num
    }

    pub fn den(&self) -> &Denominator {
        &self.den
    }

    /// The denominator expanded as a polynomial (leading coefficient 1).
    pub fn den_poly(&self) -> PolyExpr {
        self.den.to_poly()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Coeff> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    fn normalized(num: PolyExpr, den: Denominator) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let mut r = RatExpr { num, den };
        r.cancel();
        r
    }

    /// Remove denominator factors that divide the numerator.
    fn cancel(&mut self) {
        if self.den.is_one() {
            return;
        }
        let mut kept = Vec::with_capacity(self.den.factors.len());
        for (f, e) in std::mem::take(&mut self.den.factors) {
            let mut e = e;
            while e > 0 {
                match self.num.div_exact(&f) {
                    Some(q) => {
                        self.num = q;
                        e -= 1;
                    }
                    None => break,
                }
            }
            if e > 0 {
                kept.push((f, e));
            }
        }
        self.den.factors = kept;
    }

    pub fn neg(&self) -> Self {
        RatExpr {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, k: &Coeff) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        RatExpr {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    fn add_sub(&self, other: &Self, negate: bool) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if negate { other.neg() } else { other.clone() };
        }
        if self.den == other.den {
            let num = if negate {
                self.num.sub(&other.num)
            } else {
                self.num.add(&other.num)
            };
            return Self::normalized(num, self.den.clone());
        }
        let l = self.den.lcm(&other.den);
        let a = self.num.mul(&l.cofactor_poly(&self.den));
        let b = other.num.mul(&l.cofactor_poly(&other.den));
        let num = if negate { a.sub(&b) } else { a.add(&b) };
        Self::normalized(num, l)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_sub(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_sub(other, true)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let num = self.num.mul(&other.num);
        let den = self.den.product(&other.den);
        if den.is_one() {
            return RatExpr { num, den };
        }
        Self::normalized(num, den)
    }

    pub fn inv(&self) -> Result<Self, DivisionByZero> {
        if self.num.is_zero() {
            return Err(DivisionByZero);
        }
        let (c, fden) = factor_polynomial(&self.num);
        let cinv = c.inv().ok_or(DivisionByZero)?;
        let num = self.den.to_poly().scale(&cinv);
        Ok(Self::normalized(num, fden))
    }

    pub fn div(&self, other: &Self) -> Result<Self, DivisionByZero> {
        let inv = other.inv()?;
        Ok(self.mul(&inv))
    }

    pub fn pow(&self, e: i32) -> Result<Self, DivisionByZero> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let k = e.unsigned_abs();
        if k == 0 {
            return Ok(Self::one());
        }
        Ok(RatExpr {
            num: base.num.pow(k),
            den: base.den.pow(k),
        })
    }

    /// Exact partial derivative by the quotient rule on the factored form.
    pub fn derivative(&self, v: VarId) -> Self {
        let dn = self.num.derivative(v);
        let dependent: Vec<usize> = (0..self.den.factors.len())
            .filter(|&k| self.den.factors[k].0.uses_var(v))
            .collect();
        if dependent.is_empty() {
            return Self::normalized(dn, self.den.clone());
        }
        // d(N/∏f^e) = (N'·∏f − N·Σ e_k f_k' ∏_{j≠k} f_j) / (∏f^e · ∏f)
        let facs = &self.den.factors;
        let prod_all = dependent
            .iter()
            .fold(PolyExpr::one(), |acc, &k| acc.mul(&facs[k].0));
        let mut sum = PolyExpr::zero();
        for &k in &dependent {
            let (f, e) = &facs[k];
            let mut term = f
                .derivative(v)
                .scale(&Coeff::from_integer(*e as i64));
            for &j in &dependent {
                if j != k {
                    term = term.mul(&facs[j].0);
                }
            }
            sum = sum.add(&term);
        }
        let num = dn.mul(&prod_all).sub(&self.num.mul(&sum));
        let mut den = self.den.clone();
        for &k in &dependent {
            den.insert(facs[k].0.clone(), 1);
        }
        Self::normalized(num, den)
    }

    pub fn eval(&self, point: &[Coeff]) -> Result<Coeff, EvalError> {
        let d = self.den.eval(point);
        let inv = d.inv().ok_or(EvalError::DenominatorZero)?;
        Ok(&self.num.eval(point) * &inv)
    }

    /// Exact equality by cross-multiplication.
    pub fn equals(&self, other: &Self) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        let l = self.den.lcm(&other.den);
        let a = self.num.mul(&l.cofactor_poly(&self.den));
        let b = other.num.mul(&l.cofactor_poly(&other.den));
        a == b
    }

    /// Substitute polynomial images for every variable of the numerator and
    /// the denominator factors (e.g. parameters → values).
    pub fn substitute(&self, images: &[PolyExpr]) -> Result<Self, DivisionByZero> {
        let num: RatExpr = self.num.substitute(images).into();
        let mut den = RatExpr::one();
        for (f, e) in &self.den.factors {
            let fi: RatExpr = f.substitute(images).into();
            den = den.mul(&fi.pow(*e as i32)?);
        }
        num.div(&den)
    }

    /// Total degree of the numerator.
    pub fn num_degree(&self) -> u32 {
        self.num.total_degree()
    }

    /// Variables occurring in numerator or denominator, as a slot bitmask.
    pub fn var_mask(&self) -> u32 {
        self.den
            .factors
            .iter()
            .fold(self.num.var_mask(), |m, (f, _)| m | f.var_mask())
    }

    pub fn is_real(&self) -> bool {
        self.num.is_real() && self.den.factors.iter().all(|(f, _)| f.is_real())
    }

    /// Multiply numerator and denominator to a target common denominator.
    /// `target` must be a multiple of `self.den()`.
    pub fn numerator_over(&self, target: &Denominator) -> PolyExpr {
        self.num.mul(&target.cofactor_poly(&self.den))
    }

    pub fn display<'a>(&'a self, vars: &'a VarTable) -> RatDisplay<'a> {
        RatDisplay { expr: self, vars }
    }

    /// The numerator's `n` leading terms over the same denominator.
    pub fn head(&self, n: usize) -> RatExpr {
        RatExpr {
            num: self.num.head(n),
            den: self.den.clone(),
        }
    }

    /// Number of numerator terms.
    pub fn size(&self) -> usize {
        self.num.len()
    }
}

impl fmt::Debug for RatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?})", self.num)?;
        for (g, e) in &self.den.factors {
            write!(f, " / ({:?})^{}", g, e)?;
        }
        Ok(())
    }
}

pub struct RatDisplay<'a> {
    expr: &'a RatExpr,
    vars: &'a VarTable,
}

/// Canonical text: `num` or `(num)/(f1^e1*f2^e2)` with multi-term factors
/// parenthesized.
impl fmt::Display for RatDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.expr.num.display(self.vars);
        if self.expr.den.is_one() {
            return write!(f, "{num}");
        }
        write!(f, "({num})/(")?;
        for (k, (g, e)) in self.expr.den.factors.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if g.len() > 1 {
                write!(f, "({})", g.display(self.vars))?;
            } else {
                write!(f, "{}", g.display(self.vars))?;
            }
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(id: VarId) -> RatExpr {
        RatExpr::var(id)
    }

    #[test]
    fn monomial_inverse_cancels() {
        let z2 = v(VarId::Z).pow(2).unwrap();
        let r = RatExpr::one().div(&z2).unwrap().mul(&z2);
        assert_eq!(r, RatExpr::one());
    }

    #[test]
    fn quotient_rule() {
        // d/dz (alpha / z^2) = -2 alpha / z^3
        let alpha = RatExpr::var(VarId(6));
        let f = alpha.div(&v(VarId::Z).pow(2).unwrap()).unwrap();
        let d = f.derivative(VarId::Z);
        let expect = alpha
            .scale(&Coeff::from_integer(-2))
            .div(&v(VarId::Z).pow(3).unwrap())
            .unwrap();
        assert!(d.equals(&expect));
        assert_eq!(d, expect);
    }

    #[test]
    fn equality_by_cross_multiplication() {
        let x = v(VarId::X);
        let y = v(VarId::Y);
        let z = v(VarId::Z);
        let i = RatExpr::constant(Coeff::i());
        assert!(x.pow(2).unwrap().div(&x).unwrap().equals(&x));
        let w = x.add(&i.mul(&y));
        assert!(w.pow(2).unwrap().div(&w).unwrap().equals(&w));
        assert!(!x.div(&z).unwrap().equals(&x.div(&y).unwrap()));
    }

    #[test]
    fn eval_pole() {
        let f = RatExpr::one().div(&v(VarId::Z).pow(2).unwrap()).unwrap();
        let pt = vec![Coeff::one(), Coeff::one(), Coeff::zero()];
        assert_eq!(f.eval(&pt), Err(EvalError::DenominatorZero));
    }

    #[test]
    fn factoring_finds_dictionary_terms() {
        let x = PolyExpr::var(VarId::X);
        let y = PolyExpr::var(VarId::Y);
        let i = PolyExpr::constant(Coeff::i());
        let w = x.add(&i.mul(&y));
        let p = w.pow(3).mul(&y).scale(&Coeff::from_integer(4));
        let (c, den) = factor_polynomial(&p);
        assert_eq!(c, Coeff::from_integer(4));
        assert_eq!(den.factors().len(), 2);
        assert_eq!(den.to_poly().scale(&c), p);
    }

    #[test]
    fn leading_coefficient_of_den_is_one() {
        let x = PolyExpr::var(VarId::X);
        let r = RatExpr::from_parts(PolyExpr::one(), &x.scale(&Coeff::from_integer(3))).unwrap();
        assert!(r.den_poly().leading_coeff().unwrap().is_one());
        assert_eq!(r.num(), &PolyExpr::constant(Coeff::from_ratio(1, 3)));
    }
}
