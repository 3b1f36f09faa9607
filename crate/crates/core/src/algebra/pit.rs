//! Randomized zero testing of rational functions (Schwartz–Zippel).
//!
//! A nonzero numerator of total degree `d` vanishes at a uniformly random
//! point of `S^n` with probability at most `d / |S|`. Verdicts of
//! [`ZeroTest::Nonzero`] are certain and come with a witness point;
//! [`ZeroTest::ProbablyZero`] may be wrong with probability at most
//! `(d / (2·bound + 1))^trials`.

use num_traits::Zero;
use rand::Rng;

use super::gaussian::GaussianRational;
use super::rational::RatExpr;

/// Half-width of the integer sampling box `[-bound, bound]`.
pub const DEFAULT_SAMPLE_BOUND: i64 = 1_000_000;
pub const DEFAULT_TRIALS: u32 = 3;
/// Resampling attempts per trial when the denominator vanishes.
const RETRY_BUDGET: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroTest {
    ProbablyZero,
    /// The expression is certainly nonzero; it evaluates to `value` at `point`.
    Nonzero {
        point: Vec<GaussianRational>,
        value: GaussianRational,
    },
}

impl ZeroTest {
    pub fn is_probably_zero(&self) -> bool {
        matches!(self, ZeroTest::ProbablyZero)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZeroTestError {
    #[error("no point with nonvanishing denominator found after {0} samples")]
    SamplingExhausted(usize),
    #[error("invalid zero-test arguments: {0}")]
    InvalidArgument(&'static str),
}

/// Draw a point in `[-bound, bound]^nvars` where the denominator of `f`
/// does not vanish.
pub fn sample_safe_point<R: Rng + ?Sized>(
    f: &RatExpr,
    nvars: usize,
    bound: i64,
    rng: &mut R,
) -> Result<Vec<GaussianRational>, ZeroTestError> {
    for _ in 0..RETRY_BUDGET {
        let point: Vec<GaussianRational> = (0..nvars)
            .map(|_| GaussianRational::from_integer(rng.gen_range(-bound..=bound)))
            .collect();
        if !f.den().eval(&point).is_zero() {
            return Ok(point);
        }
    }
    Err(ZeroTestError::SamplingExhausted(RETRY_BUDGET))
}

/// Test `f ≡ 0` by evaluation at `trials` random integer points.
///
/// `nvars` is the number of slots of the variable table `f` lives in.
pub fn probabilistic_zero<R: Rng + ?Sized>(
    f: &RatExpr,
    nvars: usize,
    bound: i64,
    trials: u32,
    rng: &mut R,
) -> Result<ZeroTest, ZeroTestError> {
    if trials == 0 {
        return Err(ZeroTestError::InvalidArgument("trials must be at least 1"));
    }
    if bound < 1 {
        return Err(ZeroTestError::InvalidArgument("bound must be positive"));
    }
    if f.is_zero() {
        return Ok(ZeroTest::ProbablyZero);
    }
    for _ in 0..trials {
        let point = sample_safe_point(f, nvars, bound, rng)?;
        let value = f.num().eval(&point);
        if !value.is_zero() {
            let den = f.den().eval(&point);
            return Ok(ZeroTest::Nonzero {
                value: &value / &den,
                point,
            });
        }
    }
    Ok(ZeroTest::ProbablyZero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::VarId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = probabilistic_zero(&RatExpr::zero(), 6, 100, 3, &mut rng).unwrap();
        assert!(r.is_probably_zero());
    }

    #[test]
    fn commutator_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = RatExpr::var(VarId::X);
        let y = RatExpr::var(VarId::Y);
        let f = x.mul(&y).sub(&y.mul(&x));
        assert!(probabilistic_zero(&f, 6, 1000, 3, &mut rng)
            .unwrap()
            .is_probably_zero());
    }

    #[test]
    fn nonzero_has_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = RatExpr::var(VarId::X);
        let f = x.div(&RatExpr::var(VarId::Z)).unwrap();
        match probabilistic_zero(&f, 6, 1000, 3, &mut rng).unwrap() {
            ZeroTest::Nonzero { point, value } => {
                assert_eq!(f.eval(&point).unwrap(), value);
                assert!(!value.is_zero());
            }
            ZeroTest::ProbablyZero => panic!("x/z is not zero"),
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(probabilistic_zero(&RatExpr::one(), 6, 10, 0, &mut rng).is_err());
    }
}
