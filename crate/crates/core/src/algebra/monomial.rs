//! Power products over a [`VarTable`](super::VarTable).

use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

use super::vars::{VarId, MAX_VARS};

/// A power product `∏ v^e`.
///
/// Stored densely by slot; unused slots are zero, so the empty product is
/// the all-zero array. The derived order is graded lexicographic: total
/// degree first, then exponents compared slot by slot (slot 0 largest).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial {
    degree: u16,
    exps: [u16; MAX_VARS],
}

impl Hash for Monomial {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // Exponents fit comfortably in a byte in practice; fold them into words.
        let mut words = [0u64; MAX_VARS / 8];
        for (k, e) in self.exps.iter().enumerate() {
            words[k / 8] |= ((*e as u64) & 0xff) << ((k % 8) * 8);
        }
        words.hash(state);
        self.degree.hash(state);
    }
}

impl Default for Monomial {
    fn default() -> Self {
        Self::one()
    }
}

impl Monomial {
    pub fn one() -> Self {
        Monomial {
            degree: 0,
            exps: [0; MAX_VARS],
        }
    }

    pub fn var(v: VarId) -> Self {
        Self::var_pow(v, 1)
    }

    pub fn var_pow(v: VarId, e: u16) -> Self {
        let mut m = Self::one();
        m.exps[v.index()] = e;
        m.degree = e;
        m
    }

    pub fn from_exponents(pairs: &[(VarId, u16)]) -> Self {
        let mut m = Self::one();
        for &(v, e) in pairs {
            m.exps[v.index()] += e;
            m.degree += e;
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.degree == 0
    }

    pub fn degree(&self) -> u32 {
        self.degree as u32
    }

    pub fn exp(&self, v: VarId) -> u16 {
        self.exps[v.index()]
    }

    /// Nonzero `(var, exponent)` pairs in slot order.
    pub fn factors(&self) -> impl Iterator<Item = (VarId, u16)> + '_ {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, e)| **e > 0)
            .map(|(k, e)| (VarId(k as u8), *e))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps;
        for (a, b) in exps.iter_mut().zip(other.exps.iter()) {
            *a = a.checked_add(*b).expect("monomial exponent overflow");
        }
        Monomial {
            degree: self
                .degree
                .checked_add(other.degree)
                .expect("monomial degree overflow"),
            exps,
        }
    }

    pub fn pow(&self, k: u16) -> Monomial {
        let mut exps = self.exps;
        for e in exps.iter_mut() {
            *e = e.checked_mul(k).expect("monomial exponent overflow");
        }
        Monomial {
            degree: self.degree.checked_mul(k).expect("monomial degree overflow"),
            exps,
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.degree <= other.degree && self.exps.iter().zip(other.exps.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self.divides(other)`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        let mut exps = other.exps;
        for (a, b) in exps.iter_mut().zip(self.exps.iter()) {
            *a -= *b;
        }
        Monomial {
            degree: other.degree - self.degree,
            exps,
        }
    }

    /// Lower the exponent of `v` by one, returning the previous exponent.
    pub fn d_by(&self, v: VarId) -> Option<(u16, Monomial)> {
        let e = self.exps[v.index()];
        if e == 0 {
            return None;
        }
        let mut m = *self;
        m.exps[v.index()] -= 1;
        m.degree -= 1;
        Some((e, m))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut m = Monomial::one();
        for k in 0..MAX_VARS {
            let e = self.exps[k].min(other.exps[k]);
            m.exps[k] = e;
            m.degree += e;
        }
        m
    }

    /// Split off the part whose variables satisfy `keep`.
    pub fn split(&self, keep: impl Fn(VarId) -> bool) -> (Monomial, Monomial) {
        let mut a = Monomial::one();
        let mut b = Monomial::one();
        for (v, e) in self.factors() {
            let target = if keep(v) { &mut a } else { &mut b };
            target.exps[v.index()] = e;
            target.degree += e;
        }
        (a, b)
    }

    /// Highest occupied slot plus one.
    pub fn support_len(&self) -> usize {
        self.exps.iter().rposition(|e| *e > 0).map_or(0, |k| k + 1)
    }

    /// Graded lexicographic comparison (same as `Ord`).
    pub fn grlex_cmp(&self, other: &Monomial) -> Ordering {
        self.cmp(other)
    }
}

impl std::fmt::Debug for Monomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .factors()
            .map(|(v, e)| format!("v{}^{}", v.0, e))
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grlex_order() {
        let x = Monomial::var(VarId::X);
        let y = Monomial::var(VarId::Y);
        let x2 = Monomial::var_pow(VarId::X, 2);
        let xy = x.mul(&y);
        let y3 = Monomial::var_pow(VarId::Y, 3);
        assert!(x > y);
        assert!(x2 > xy);
        assert!(y3 > x2);
        assert!(Monomial::one() < y);
    }

    #[test]
    fn divide_and_quotient() {
        let a = Monomial::from_exponents(&[(VarId::X, 2), (VarId::PZ, 1)]);
        let b = Monomial::var(VarId::X);
        assert!(b.divides(&a));
        assert!(!a.divides(&b));
        let q = b.quotient_of(&a);
        assert_eq!(q.mul(&b), a);
        assert_eq!(q.degree(), 2);
    }
}
