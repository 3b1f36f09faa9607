//! Randomized checks of the exact kernel: field axioms on rational
//! functions, bracket identities and the randomized zero test.

use poisson_verify_core::algebra::{pit, GaussianRational, Monomial, PolyExpr, RatExpr, VarId};
use poisson_verify_core::{bracket, jacobi_residual, BracketConvention};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const NVARS: usize = 7;

fn coeff() -> impl Strategy<Value = GaussianRational> {
    (-6i64..=6, 1i64..=4, -2i64..=2).prop_map(|(n, d, im)| {
        GaussianRational::from_ratio(n, d) + GaussianRational::i() * GaussianRational::from_integer(im)
    })
}

/// Terms over `x, y, z, p_x, p_y, p_z` and one parameter.
fn poly(max_terms: usize) -> impl Strategy<Value = PolyExpr> {
    prop::collection::vec((coeff(), prop::array::uniform7(0u16..=2)), 0..=max_terms).prop_map(|terms| {
        PolyExpr::from_terms(terms.into_iter().map(|(c, e)| {
            let pairs: Vec<(VarId, u16)> = (0..NVARS)
                .map(|k| (if k < 6 { VarId::PHASE_SPACE[k] } else { param() }, e[k]))
                .collect();
            (Monomial::from_exponents(&pairs), c)
        }))
    })
}

fn param() -> VarId {
    poisson_verify_core::VarTable::phase_space(&["a"]).unwrap().lookup("a").unwrap()
}

/// A polynomial over one of a few denominators of the kind that occur in
/// the catalog.
fn rat() -> impl Strategy<Value = RatExpr> {
    (poly(4), 0usize..5).prop_map(|(p, k)| {
        let v = |id| PolyExpr::var(id);
        let den = match k {
            0 => PolyExpr::one(),
            1 => v(VarId::X).pow(2),
            2 => v(VarId::Y).mul(&v(VarId::Z)),
            3 => v(VarId::X).add(&v(VarId::Y).scale(&GaussianRational::i())).pow(3),
            _ => v(VarId::Z).pow(2).add(&PolyExpr::integer(1)),
        };
        RatExpr::from_parts(p, &den).unwrap()
    })
}

fn eq(a: &RatExpr, b: &RatExpr) -> bool {
    a.equals(b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn addition_is_a_commutative_group(a in rat(), b in rat(), c in rat()) {
        prop_assert!(eq(&a.add(&b), &b.add(&a)));
        prop_assert!(eq(&a.add(&b).add(&c), &a.add(&b.add(&c))));
        prop_assert!(eq(&a.add(&RatExpr::zero()), &a));
        prop_assert!(a.add(&a.neg()).is_zero());
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn multiplication_is_commutative_associative_distributive(a in rat(), b in rat(), c in rat()) {
        prop_assert!(eq(&a.mul(&b), &b.mul(&a)));
        prop_assert!(eq(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c))));
        prop_assert!(eq(&a.mul(&b.add(&c)), &a.mul(&b).add(&a.mul(&c))));
        prop_assert!(eq(&a.mul(&RatExpr::one()), &a));
        prop_assert!(a.mul(&RatExpr::zero()).is_zero());
    }

    #[test]
    fn nonzero_elements_are_invertible(a in rat()) {
        prop_assume!(!a.is_zero());
        let inv = a.inv().unwrap();
        prop_assert!(eq(&a.mul(&inv), &RatExpr::one()));
        prop_assert!(eq(&a.div(&a).unwrap(), &RatExpr::one()));
    }

    #[test]
    fn derivative_is_a_derivation(a in rat(), b in rat(), k in 0usize..6) {
        let v = VarId::PHASE_SPACE[k];
        let lhs = a.mul(&b).derivative(v);
        let rhs = a.derivative(v).mul(&b).add(&a.mul(&b.derivative(v)));
        prop_assert!(eq(&lhs, &rhs));
    }

    #[test]
    fn bracket_is_antisymmetric(f in rat(), g in rat(), c in 0usize..4) {
        let conv = BracketConvention::ALL[c];
        prop_assert!(bracket(&f, &g, conv).add(&bracket(&g, &f, conv)).is_zero());
        prop_assert!(bracket(&f, &f, conv).is_zero());
    }

    #[test]
    fn bracket_obeys_leibniz(f in rat(), g in rat(), h in rat(), c in 0usize..4) {
        let conv = BracketConvention::ALL[c];
        let lhs = bracket(&f, &g.mul(&h), conv);
        let rhs = bracket(&f, &g, conv).mul(&h).add(&g.mul(&bracket(&f, &h, conv)));
        prop_assert!(eq(&lhs, &rhs));
    }

    #[test]
    fn bracket_is_bilinear(f in rat(), g in rat(), h in rat(), k in coeff()) {
        let conv = BracketConvention::DEFAULT;
        let lhs = bracket(&f, &g.add(&h.scale(&k)), conv);
        let rhs = bracket(&f, &g, conv).add(&bracket(&f, &h, conv).scale(&k));
        prop_assert!(eq(&lhs, &rhs));
    }

    #[test]
    fn zero_test_agrees_with_exact_equality(a in rat(), b in rat(), c in rat(), same in any::<bool>(), seed in any::<u64>()) {
        // Equal pairs are built along different routes so both sides are
        // formed independently.
        let (f, g) = if same {
            (a.add(&b).mul(&c), c.mul(&b).add(&a.mul(&c)))
        } else {
            (a.mul(&c), b.mul(&c).add(&RatExpr::var(VarId::PX)))
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let test = pit::probabilistic_zero(&f.sub(&g), NVARS, 1000, pit::DEFAULT_TRIALS, &mut rng).unwrap();
        prop_assert_eq!(test.is_probably_zero(), f.equals(&g));
        if let pit::ZeroTest::Nonzero { value, point } = test {
            let direct = f.eval(&point).unwrap() - g.eval(&point).unwrap();
            prop_assert_eq!(direct, value);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn jacobi_identity(f in rat(), g in rat(), h in rat(), c in 0usize..4) {
        prop_assert!(jacobi_residual(&f, &g, &h, BracketConvention::ALL[c]).is_zero());
    }
}

#[test]
fn canonical_brackets() {
    let v = RatExpr::var;
    let conv = BracketConvention::DEFAULT;
    for (q, p) in VarId::CANONICAL_PAIRS {
        assert!(eq(&bracket(&v(q), &v(p), conv), &RatExpr::one()));
        assert!(eq(&bracket(&v(q), &v(p), BracketConvention::NEG), &RatExpr::integer(-1)));
    }
    assert!(bracket(&v(VarId::X), &v(VarId::PY), conv).is_zero());
}
