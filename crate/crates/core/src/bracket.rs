//! The canonical Poisson bracket on `(x, y, z, p_x, p_y, p_z)`.

use std::fmt;
use std::str::FromStr;

use crate::algebra::{GaussianRational, PolyExpr, RatExpr, VarId};

/// Normalization and sign choices for brackets and the Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BracketConvention {
    /// Read `H` with a ½ on its `p_x² + p_y² + p_z²` part.
    pub kinetic_half: bool,
    /// Overall sign, `+1` gives `{x, p_x} = 1`.
    pub sign: i8,
}

impl Default for BracketConvention {
    fn default() -> Self {
        BracketConvention {
            kinetic_half: false,
            sign: 1,
        }
    }
}

impl BracketConvention {
    pub const DEFAULT: Self = BracketConvention {
        kinetic_half: false,
        sign: 1,
    };
    pub const HALF: Self = BracketConvention {
        kinetic_half: true,
        sign: 1,
    };
    pub const NEG: Self = BracketConvention {
        kinetic_half: false,
        sign: -1,
    };
    pub const HALF_NEG: Self = BracketConvention {
        kinetic_half: true,
        sign: -1,
    };

    /// All four conventions, default first.
    pub const ALL: [Self; 4] = [Self::DEFAULT, Self::HALF, Self::NEG, Self::HALF_NEG];

    pub fn name(&self) -> &'static str {
        match (self.kinetic_half, self.sign > 0) {
            (false, true) => "default",
            (true, true) => "half",
            (false, false) => "neg",
            (true, false) => "half-neg",
        }
    }

    /// Rewrite `H = T + V` with `T = p_x² + p_y² + p_z²` to `½T + V` when
    /// `kinetic_half` is set.
    pub fn adjust_hamiltonian(&self, h: &RatExpr) -> RatExpr {
        if !self.kinetic_half {
            return h.clone();
        }
        h.sub(&RatExpr::from(kinetic_energy()).scale(&GaussianRational::from_ratio(1, 2)))
    }
}

/// `p_x² + p_y² + p_z²`.
pub fn kinetic_energy() -> PolyExpr {
    [VarId::PX, VarId::PY, VarId::PZ]
        .iter()
        .fold(PolyExpr::zero(), |acc, p| {
            acc.add(&PolyExpr::var(*p).pow(2))
        })
}

impl fmt::Display for BracketConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BracketConvention {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown convention `{s}` (expected default, half, neg, half-neg)"))
    }
}

/// `{f, g} = sign · Σ_q (∂f/∂q ∂g/∂p_q − ∂f/∂p_q ∂g/∂q)`.
pub fn bracket(f: &RatExpr, g: &RatExpr, conv: BracketConvention) -> RatExpr {
    let fm = f.var_mask();
    let gm = g.var_mask();
    let mut acc = RatExpr::zero();
    for (q, p) in VarId::CANONICAL_PAIRS {
        let (qb, pb) = (1u32 << q.0, 1u32 << p.0);
        if fm & qb != 0 && gm & pb != 0 {
            acc = acc.add(&f.derivative(q).mul(&g.derivative(p)));
        }
        if fm & pb != 0 && gm & qb != 0 {
            acc = acc.sub(&f.derivative(p).mul(&g.derivative(q)));
        }
    }
    if conv.sign < 0 {
        acc.neg()
    } else {
        acc
    }
}

/// `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}`, identically zero for a valid bracket.
pub fn jacobi_residual(f: &RatExpr, g: &RatExpr, h: &RatExpr, conv: BracketConvention) -> RatExpr {
    let a = bracket(f, &bracket(g, h, conv), conv);
    let b = bracket(g, &bracket(h, f, conv), conv);
    let c = bracket(h, &bracket(f, g, conv), conv);
    a.add(&b).add(&c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(id: VarId) -> RatExpr {
        RatExpr::var(id)
    }

    fn angular() -> (RatExpr, RatExpr, RatExpr) {
        let (x, y, z) = (v(VarId::X), v(VarId::Y), v(VarId::Z));
        let (px, py, pz) = (v(VarId::PX), v(VarId::PY), v(VarId::PZ));
        let jx = y.mul(&pz).sub(&z.mul(&py));
        let jy = z.mul(&px).sub(&x.mul(&pz));
        let jz = x.mul(&py).sub(&y.mul(&px));
        (jx, jy, jz)
    }

    #[test]
    fn canonical_pair() {
        let c = BracketConvention::default();
        assert_eq!(bracket(&v(VarId::X), &v(VarId::PX), c), RatExpr::one());
        assert_eq!(
            bracket(&v(VarId::X), &v(VarId::PX), BracketConvention::NEG),
            RatExpr::integer(-1)
        );
    }

    #[test]
    fn angular_momentum_algebra() {
        let (jx, jy, jz) = angular();
        let c = BracketConvention::default();
        assert_eq!(bracket(&jx, &jy, c), jz);
        assert!(jacobi_residual(&jx, &jy, &jz, c).is_zero());
    }

    #[test]
    fn jacobi_on_canonical_triple() {
        let c = BracketConvention::default();
        assert!(jacobi_residual(&v(VarId::X), &v(VarId::PX), &v(VarId::Y), c).is_zero());
    }

    #[test]
    fn coordinates_commute() {
        let f = v(VarId::X).mul(&v(VarId::Y)).div(&v(VarId::Z)).unwrap();
        let g = v(VarId::Z).pow(3).unwrap();
        assert!(bracket(&f, &g, BracketConvention::default()).is_zero());
    }

    #[test]
    fn half_convention_changes_kinetic_part_only() {
        let h = RatExpr::from(kinetic_energy()).add(&v(VarId::X).pow(2).unwrap());
        let adj = BracketConvention::HALF.adjust_hamiltonian(&h);
        let expect = RatExpr::from(kinetic_energy())
            .scale(&GaussianRational::from_ratio(1, 2))
            .add(&v(VarId::X).pow(2).unwrap());
        assert_eq!(adj, expect);
        assert_eq!("half-neg".parse::<BracketConvention>().unwrap(), BracketConvention::HALF_NEG);
    }
}
