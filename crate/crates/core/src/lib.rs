//! Exact verification of quadratic Poisson algebras for three-dimensional
//! superintegrable systems.
//!
//! The crate is layered bottom-up:
//!
//! * [`algebra`]: Gaussian-rational coefficients, canonical sparse
//!   polynomials, rational functions, exact linear algebra and a
//!   randomized zero test.
//! * [`bracket`]: the canonical Poisson bracket and its conventions.
//! * [`catalog`]: the text format for systems and relations, and the
//!   built-in systems.
//! * [`verify`]: commutation tables, relation adjudication, structure
//!   function fitting, functional and linear independence.
//! * [`dynamics`]: floating-point trajectory integration used as an
//!   independent check that integrals are conserved.

pub mod algebra;
pub mod bracket;
pub mod catalog;
pub mod dynamics;
pub mod verify;

pub use algebra::{GaussianRational, Monomial, PolyExpr, RatExpr, VarId, VarKind, VarTable};
pub use bracket::{bracket, jacobi_residual, BracketConvention};
