//! Executable checks of the algebraic claims attached to a system.

mod conservation;
mod expand;
mod fit;
mod independence;
mod relations;
mod report;
mod table;

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{pit, GaussianRational, PolyExpr, RatExpr, VarTable, ZeroTest, ZeroTestError};
use crate::bracket::BracketConvention;
use crate::catalog::{FormalError, SystemDefinition};

pub use conservation::{conservation, ConservationEntry, ConservationReport, ConventionTrial, VariantCheck};
pub use expand::{Expander, MemoStore};
pub use fit::{
    closure_operands, default_pair_basis, fit_expression, fit_quadratic_closure, fit_structure_function, FitCoefficient,
    FitError, FitResult, StructureAnsatz,
};
pub use independence::{
    check_functional_independence, check_linear_independence, Dependency, LinearReport, RankReport,
};
pub use relations::{
    classify, verify_relation, verify_relations, verify_second_algebra, verify_special_structure,
    verify_structure_claims, RelationKind, RelationVerdict, Status, StructureOutcome,
};
pub use report::{verify_system, Counts, IndependenceSummary, Section, SystemReport};
pub use table::{commutation_table, CommutationEntry, CommutationTable, Discrepancy};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("unresolved name `{0}`")]
    UnresolvedName(String),
    #[error("{0}")]
    Formal(String),
    #[error("`{0}` is not a polynomial in generators and parameters")]
    NotPolynomial(String),
    #[error("a parameter specialization makes `{0}` singular")]
    Singular(String),
    #[error(transparent)]
    Sampling(#[from] ZeroTestError),
    #[error("in function `{name}`: {message}")]
    Function { name: String, message: String },
}

impl VerifyError {
    fn in_function(name: &str, e: VerifyError) -> Self {
        VerifyError::Function {
            name: name.to_string(),
            message: e.to_string(),
        }
    }
}

impl From<FormalError> for VerifyError {
    fn from(e: FormalError) -> Self {
        match e {
            FormalError::Unbound(n) => VerifyError::UnresolvedName(n),
            other => VerifyError::Formal(other.to_string()),
        }
    }
}

/// Knobs shared by every check.
#[derive(Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Fix parameters to random integers and report verified lines as
    /// probable (Schwartz–Zippel in the parameters).
    pub fast: bool,
    /// Use this convention instead of searching.
    pub convention: Option<BracketConvention>,
    /// Checks not started by this instant are reported as skipped.
    pub deadline: Option<Instant>,
    /// Fit a corrected right-hand side for refuted closure lines and
    /// structure claims.
    pub fit_corrections: bool,
    pub store: Option<Arc<dyn MemoStore>>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            fast: false,
            convention: None,
            deadline: None,
            fit_corrections: true,
            store: None,
        }
    }
}

impl std::fmt::Debug for VerifyOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VerifyOptions")
            .field("seed", &self.seed)
            .field("fast", &self.fast)
            .field("convention", &self.convention)
            .field("deadline", &self.deadline)
            .field("fit_corrections", &self.fit_corrections)
            .finish()
    }
}

/// Deterministic per-check random stream.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// One system under a fixed set of options; expanders are built lazily
/// per convention and shared by all checks.
pub struct Session<'a> {
    pub sys: &'a SystemDefinition,
    pub options: VerifyOptions,
    convention: BracketConvention,
    param_values: Option<Vec<GaussianRational>>,
    expanders: [OnceLock<Result<Expander<'a>, VerifyError>>; 4],
    exact: OnceLock<Result<Expander<'a>, VerifyError>>,
}

impl<'a> Session<'a> {
    pub fn new(sys: &'a SystemDefinition, options: VerifyOptions) -> Self {
        let param_values = options.fast.then(|| {
            let mut rng = rng_for(options.seed, u64::MAX);
            sys.parameters
                .iter()
                .map(|_| {
                    let mut n = 0;
                    while n == 0 {
                        n = rng.gen_range(-97i64..=97);
                    }
                    GaussianRational::from_integer(n)
                })
                .collect()
        });
        Session {
            sys,
            convention: options.convention.unwrap_or_default(),
            options,
            param_values,
            expanders: Default::default(),
            exact: OnceLock::new(),
        }
    }

    pub fn convention(&self) -> BracketConvention {
        self.convention
    }

    pub fn set_convention(&mut self, conv: BracketConvention) {
        self.convention = conv;
    }

    pub fn is_fast(&self) -> bool {
        self.param_values.is_some()
    }

    /// Specialized parameter values in fast mode.
    pub fn parameter_values(&self) -> Option<&[GaussianRational]> {
        self.param_values.as_deref()
    }

    fn make(&self, conv: BracketConvention, specialize: bool) -> Result<Expander<'a>, VerifyError> {
        let ex = match (&self.param_values, specialize) {
            (Some(vals), true) => Expander::specialized(self.sys, conv, vals)?,
            _ => Expander::new(self.sys, conv)?,
        };
        Ok(match &self.options.store {
            Some(store) => {
                let mut fp = fingerprint(&self.sys.serialize());
                if let (Some(vals), true) = (&self.param_values, specialize) {
                    let v: Vec<String> = vals.iter().map(|c| c.to_string()).collect();
                    fp = format!("{fp}@{}", v.join(","));
                }
                ex.with_store(store.clone(), fp)
            }
            None => ex,
        })
    }

    /// Expander for `conv` (parameters specialized in fast mode).
    pub fn expander(&self, conv: BracketConvention) -> Result<&Expander<'a>, VerifyError> {
        let k = BracketConvention::ALL.iter().position(|c| *c == conv).expect("known convention");
        self.expanders[k]
            .get_or_init(|| self.make(conv, true))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Expander for the session convention with symbolic parameters,
    /// used for fitting even in fast mode.
    pub fn exact_expander(&self) -> Result<&Expander<'a>, VerifyError> {
        if !self.is_fast() {
            return self.expander(self.convention);
        }
        self.exact
            .get_or_init(|| self.make(self.convention, false))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn expired(&self) -> bool {
        self.options.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Stable 64-bit FNV-1a digest, rendered in hex.
pub fn fingerprint(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// A coordinate of a witness point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coordinate {
    pub name: String,
    pub value: String,
}

/// A point where a residual is certainly nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub point: Vec<Coordinate>,
    pub value: String,
}

/// Excerpt of a nonzero residual.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Residual {
    /// Number of numerator terms.
    pub terms: usize,
    /// The three leading numerator terms in canonical order.
    pub head: Vec<String>,
    pub denominator: String,
    pub witness: Option<Witness>,
}

impl Residual {
    pub fn describe(r: &RatExpr, vars: &VarTable, rng: &mut ChaCha8Rng) -> Self {
        let head = r
            .num()
            .head(3)
            .terms()
            .iter()
            .map(|(m, c)| PolyExpr::monomial(*m, c.clone()).display(vars).to_string())
            .collect();
        let witness = match pit::probabilistic_zero(r, vars.len(), 1000, pit::DEFAULT_TRIALS, rng) {
            Ok(ZeroTest::Nonzero { point, value }) => Some(Witness {
                point: vars
                    .ids()
                    .map(|v| Coordinate {
                        name: vars.name(v).to_string(),
                        value: point[v.index()].to_string(),
                    })
                    .collect(),
                value: value.to_string(),
            }),
            _ => None,
        };
        Residual {
            terms: r.size(),
            head,
            denominator: PolyExpr::clone(&r.den_poly()).display(vars).to_string(),
            witness,
        }
    }
}
