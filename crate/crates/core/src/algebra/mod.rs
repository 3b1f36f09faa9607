//! Exact arithmetic kernel: Gaussian rationals, sparse polynomials in
//! canonical form, rational functions, and exact linear algebra.

mod gaussian;
pub mod linalg;
mod monomial;
pub mod pit;
mod poly;
mod rational;
mod vars;

pub use gaussian::GaussianRational;
pub use monomial::Monomial;
pub use pit::{probabilistic_zero, ZeroTest, ZeroTestError, DEFAULT_SAMPLE_BOUND, DEFAULT_TRIALS};
pub use poly::PolyExpr;
pub use rational::{factor_polynomial, Denominator, DivisionByZero, EvalError, RatExpr};
pub use vars::{VarError, VarId, VarKind, VarTable, MAX_VARS};


/// FxHash-style hasher for monomial-keyed maps.
#[derive(Default, Clone, Copy)]
pub struct FastHasher(u64);

impl std::hash::Hasher for FastHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.write_u64(*b as u64);
        }
    }

    fn write_u64(&mut self, n: u64) {
        self.0 = (self.0.rotate_left(5) ^ n).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
    }

    fn write_u16(&mut self, n: u16) {
        self.write_u64(n as u64);
    }

    fn write_usize(&mut self, n: usize) {
        self.write_u64(n as u64);
    }

    fn write_u8(&mut self, n: u8) {
        self.write_u64(n as u64);
    }
}

pub type FastHash = std::hash::BuildHasherDefault<FastHasher>;
