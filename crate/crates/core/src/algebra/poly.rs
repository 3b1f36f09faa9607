//! Sparse multivariate polynomials over `Q(i)` in canonical form.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use super::gaussian::GaussianRational;
use super::monomial::Monomial;
use super::vars::{VarId, VarTable};
use super::FastHash;

/// A polynomial as a list of terms sorted by strictly decreasing monomial
/// (graded lexicographic). No zero coefficients are stored, so two equal
/// polynomials have identical term lists.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PolyExpr {
    terms: Vec<(Monomial, GaussianRational)>,
}

type Coeff = GaussianRational;

impl PolyExpr {
    pub fn zero() -> Self {
        PolyExpr { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        Self::monomial(Monomial::one(), c)
    }

    pub fn integer(n: i64) -> Self {
        Self::constant(Coeff::from_integer(n))
    }

    pub fn var(v: VarId) -> Self {
        Self::monomial(Monomial::var(v), Coeff::one())
    }

    pub fn monomial(m: Monomial, c: Coeff) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            PolyExpr { terms: vec![(m, c)] }
        }
    }

    /// Build from arbitrary terms; duplicates are combined and zeros dropped.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Coeff)>>(terms: I) -> Self {
        let mut acc: HashMap<Monomial, Coeff, FastHash> = HashMap::default();
        for (m, c) in terms {
            *acc.entry(m).or_default() += &c;
        }
        Self::from_map(acc)
    }

    fn from_map(acc: HashMap<Monomial, Coeff, FastHash>) -> Self {
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        PolyExpr { terms }
    }

    /// Terms in canonical (decreasing) order.
    pub fn terms(&self) -> &[(Monomial, Coeff)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, Coeff)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    /// The constant value if this polynomial has no variables.
    pub fn as_constant(&self) -> Option<Coeff> {
        match self.terms.as_slice() {
            [] => Some(Coeff::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<&(Monomial, Coeff)> {
        self.terms.first()
    }

    pub fn leading_coeff(&self) -> Option<&Coeff> {
        self.terms.first().map(|t| &t.1)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map_or(0, |t| t.0.degree())
    }

    pub fn degree_in(&self, v: VarId) -> u16 {
        self.terms.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0)
    }

    pub fn uses_var(&self, v: VarId) -> bool {
        self.terms.iter().any(|(m, _)| m.exp(v) > 0)
    }

    /// Variables that occur, as a bitmask over slots.
    pub fn var_mask(&self) -> u32 {
        let mut mask = 0u32;
        for (m, _) in &self.terms {
            for (v, _) in m.factors() {
                mask |= 1 << v.0;
            }
        }
        mask
    }

    pub fn neg(&self) -> Self {
        PolyExpr {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Coeff) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        if k.is_one() {
            return self.clone();
        }
        PolyExpr {
            terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect(),
        }
    }

    /// Multiply by a single term.
    pub fn mul_term(&self, mono: &Monomial, k: &Coeff) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        // Multiplying by a monomial preserves the relative order of terms.
        PolyExpr {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.mul(mono), c * k))
                .collect(),
        }
    }

    /// Make the leading coefficient one; returns `(monic, leading coeff)`.
    pub fn monic(&self) -> (Self, Coeff) {
        match self.leading_coeff() {
            None => (Self::zero(), Coeff::one()),
            Some(lc) => {
                let inv = lc.inv().expect("leading coefficient is nonzero");
                (self.scale(&inv), lc.clone())
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.merge(other, true)
    }

    fn merge(&self, other: &Self, negate: bool) -> Self {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0, c));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate {
                        &a[i].1 - &b[j].1
                    } else {
                        &a[i].1 + &b[j].1
                    };
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0, c));
        }
        PolyExpr { terms: out }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let (small, big) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        if small.len() == 1 {
            let (m, c) = &small.terms[0];
            return big.mul_term(m, c);
        }
        let mut acc: HashMap<Monomial, Coeff, FastHash> =
            HashMap::with_capacity_and_hasher(big.len() * small.len() / 2 + 1, FastHash::default());
        for (ms, cs) in &small.terms {
            for (mb, cb) in &big.terms {
                let prod = cs * cb;
                match acc.entry(ms.mul(mb)) {
                    std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += &prod,
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(prod);
                    }
                }
            }
        }
        Self::from_map(acc)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact partial derivative.
    pub fn derivative(&self, v: VarId) -> Self {
        let terms = self.terms.iter().filter_map(|(m, c)| {
            m.d_by(v)
                .map(|(e, m2)| (m2, c * &Coeff::from_integer(e as i64)))
        });
        // Lowering one exponent can merge terms, so renormalize.
        Self::from_terms(terms)
    }

    /// Evaluate at a full assignment (indexed by slot).
    pub fn eval(&self, point: &[Coeff]) -> Coeff {
        let mut powers: Vec<Vec<Coeff>> = vec![Vec::new(); point.len()];
        let mut acc = Coeff::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.factors() {
                let k = v.index();
                let table = &mut powers[k];
                if table.is_empty() {
                    table.push(Coeff::one());
                }
                while table.len() <= e as usize {
                    let next = table.last().unwrap() * &point[k];
                    table.push(next);
                }
                t = &t * &table[e as usize];
            }
            acc += &t;
        }
        acc
    }

    /// Replace each variable `v` by `images[v]`, in a possibly different table.
    pub fn substitute(&self, images: &[PolyExpr]) -> PolyExpr {
        let mut cache: HashMap<(u8, u16), PolyExpr, FastHash> = HashMap::default();
        let mut acc: HashMap<Monomial, Coeff, FastHash> = HashMap::default();
        for (m, c) in &self.terms {
            let mut t = PolyExpr::constant(c.clone());
            for (v, e) in m.factors() {
                let p = cache
                    .entry((v.0, e))
                    .or_insert_with(|| images[v.index()].pow(e as u32));
                t = t.mul(p);
            }
            for (mm, cc) in t.terms {
                *acc.entry(mm).or_default() += &cc;
            }
        }
        Self::from_map(acc)
    }

    /// Exact division; `None` if `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &PolyExpr) -> Option<PolyExpr> {
        let (lm, lc) = divisor.leading()?;
        if divisor.len() == 1 {
            if !self.terms.iter().all(|(m, _)| lm.divides(m)) {
                return None;
            }
            let inv = lc.inv()?;
            return Some(PolyExpr {
                terms: self
                    .terms
                    .iter()
                    .map(|(m, c)| (lm.quotient_of(m), c * &inv))
                    .collect(),
            });
        }
        // Quick rejections: degree in each variable and total degree.
        if self.total_degree() < divisor.total_degree() && !self.is_zero() {
            return None;
        }
        let lc_inv = lc.inv()?;
        let mut rem: BTreeMap<Monomial, Coeff> = self.terms.iter().cloned().collect();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            if !lm.divides(&m) {
                return None;
            }
            let qm = lm.quotient_of(&m);
            let qc = &c * &lc_inv;
            for (dm, dc) in &divisor.terms[1..] {
                let key = dm.mul(&qm);
                let delta = dc * &qc;
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() -= &delta;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(-delta);
                    }
                }
            }
            quot.push((qm, qc));
        }
        // Quotient terms were produced in decreasing order.
        Some(PolyExpr { terms: quot })
    }

    /// Group terms by the monomial in the variables selected by `outer`,
    /// returning `outer monomial -> coefficient polynomial` in the rest.
    pub fn collect_by(&self, outer: impl Fn(VarId) -> bool) -> BTreeMap<Monomial, PolyExpr> {
        let mut groups: BTreeMap<Monomial, Vec<(Monomial, Coeff)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (o, inner) = m.split(&outer);
            groups.entry(o).or_default().push((inner, c.clone()));
        }
        groups
            .into_iter()
            .map(|(o, ts)| {
                let mut ts = ts;
                ts.sort_unstable_by(|a, b| b.0.cmp(&a.0));
                (o, PolyExpr { terms: ts })
            })
            .collect()
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        match it.next() {
            None => Monomial::one(),
            Some((first, _)) => it.fold(*first, |g, (m, _)| g.gcd(m)),
        }
    }

    /// Are all coefficients real?
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.is_real())
    }

    pub fn display<'a>(&'a self, vars: &'a VarTable) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, vars }
    }

    /// The first `n` terms as a polynomial.
    pub fn head(&self, n: usize) -> PolyExpr {
        PolyExpr {
            terms: self.terms.iter().take(n).cloned().collect(),
        }
    }
}

impl fmt::Debug for PolyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{c}*{m:?}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a PolyExpr,
    vars: &'a VarTable,
}

pub(crate) fn write_monomial(f: &mut impl fmt::Write, m: &Monomial, vars: &VarTable) -> fmt::Result {
    let mut first = true;
    for (v, e) in m.factors() {
        if !first {
            f.write_char('*')?;
        }
        first = false;
        f.write_str(vars.name(v))?;
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

/// Write one signed term; `leading` controls the `" + "` separator.
pub(crate) fn write_term(
    f: &mut impl fmt::Write,
    m: &Monomial,
    c: &Coeff,
    vars: &VarTable,
    leading: bool,
) -> fmt::Result {
    let negative = c.is_negative_real() || (c.re().is_zero() && c.im() < &num_rational::BigRational::zero());
    let mag = if negative { -c } else { c.clone() };
    match (leading, negative) {
        (true, true) => f.write_str("-")?,
        (true, false) => {}
        (false, true) => f.write_str(" - ")?,
        (false, false) => f.write_str(" + ")?,
    }
    if m.is_one() {
        return write!(f, "{mag}");
    }
    if !mag.is_one() {
        write!(f, "{mag}*")?;
    }
    write_monomial(f, m, vars)
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.poly.terms.iter().enumerate() {
            write_term(f, m, c, self.vars, k == 0)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> PolyExpr {
        PolyExpr::var(VarId::X)
    }
    fn y() -> PolyExpr {
        PolyExpr::var(VarId::Y)
    }
    fn i() -> PolyExpr {
        PolyExpr::constant(Coeff::i())
    }

    #[test]
    fn difference_of_squares_over_gaussian() {
        let a = x().add(&i().mul(&y()));
        let b = x().sub(&i().mul(&y()));
        let expect = x().mul(&x()).add(&y().mul(&y()));
        assert_eq!(a.mul(&b), expect);
    }

    #[test]
    fn additive_identity() {
        let p = x().mul(&y()).add(&PolyExpr::integer(3));
        assert_eq!(p.add(&PolyExpr::zero()), p);
    }

    #[test]
    fn derivative_power_rule() {
        let px = PolyExpr::var(VarId::PX);
        let f = x().mul(&x()).mul(&px);
        assert_eq!(f.derivative(VarId::X), PolyExpr::integer(2).mul(&x()).mul(&px));
    }

    #[test]
    fn exact_division() {
        let a = x().add(&i().mul(&y()));
        let f = a.pow(3).mul(&y());
        let q = f.div_exact(&a).unwrap();
        assert_eq!(q, a.pow(2).mul(&y()));
        assert!(f.div_exact(&x().sub(&i().mul(&y()))).is_none());
        assert!(x().div_exact(&y()).is_none());
    }

    #[test]
    fn canonical_text() {
        let t = VarTable::phase_space(&["alpha"]).unwrap();
        let p = x()
            .mul(&x())
            .scale(&Coeff::from_integer(2))
            .sub(&i().mul(&y()))
            .add(&PolyExpr::var(VarId(6)).scale(&Coeff::from_ratio(-1, 2)));
        assert_eq!(p.display(&t).to_string(), "2*x^2 - i*y - 1/2*alpha");
    }

    #[test]
    fn eval_simple() {
        let p = x().mul(&x()).add(&y().mul(&y()));
        let mut pt = vec![Coeff::zero(); 6];
        pt[0] = Coeff::from_integer(3);
        pt[1] = Coeff::from_integer(4);
        assert_eq!(p.eval(&pt), Coeff::from_integer(25));
    }
}
