//! Ansatz fitting: express a phase-space function as a polynomial in
//! generators whose coefficients are polynomials in the parameters.

use std::collections::HashMap;

use serde::Serialize;

use crate::algebra::linalg::SparseSystem;
use crate::algebra::{FastHash, GaussianRational, Monomial, PolyExpr, RatExpr, VarId};
use crate::bracket::{bracket, BracketConvention};
use crate::catalog::{Formal, SystemDefinition};

use super::{Session, VerifyError};

/// Which generator and parameter monomials an ansatz may use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureAnsatz {
    pub basis: Vec<String>,
    pub max_generator_degree: u32,
    pub max_parameter_degree: u32,
}

impl StructureAnsatz {
    pub fn new(basis: Vec<String>) -> Self {
        StructureAnsatz {
            basis,
            max_generator_degree: 3,
            max_parameter_degree: 3,
        }
    }

    /// Cubic ansatz for `{A, B}^2` over the default pair basis.
    pub fn for_bracket(sys: &SystemDefinition, bracket: &str) -> Option<Self> {
        let b = sys.named_bracket(bracket)?;
        if sys.generator(&b.left).is_none() || sys.generator(&b.right).is_none() {
            return None;
        }
        Some(Self::new(default_pair_basis(sys, &b.left, &b.right)))
    }

    /// Quadratic ansatz over every generator.
    pub fn closure(sys: &SystemDefinition) -> Self {
        StructureAnsatz {
            basis: sys.generator_names().iter().map(|s| s.to_string()).collect(),
            max_generator_degree: 2,
            max_parameter_degree: 3,
        }
    }
}

/// `A`, `B` and every generator commuting with both, in declaration order.
pub fn default_pair_basis(sys: &SystemDefinition, a: &str, b: &str) -> Vec<String> {
    let ea = &sys.generator(a).expect("generator").expr;
    let eb = &sys.generator(b).expect("generator").expr;
    sys.generators
        .iter()
        .filter(|g| {
            g.name == a
                || g.name == b
                || (bracket(&g.expr, ea, BracketConvention::DEFAULT).is_zero()
                    && bracket(&g.expr, eb, BracketConvention::DEFAULT).is_zero())
        })
        .map(|g| g.name.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FitCoefficient {
    pub monomial: String,
    pub coefficient: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub target: String,
    pub basis: Vec<String>,
    pub max_generator_degree: u32,
    pub max_parameter_degree: u32,
    pub unknowns: usize,
    pub equations: usize,
    /// Dimension of the solution space; positive when the basis admits
    /// syzygies at this degree.
    pub nullspace_dim: usize,
    pub residual_zero: bool,
    /// The fitted polynomial in generators and parameters.
    pub fitted: String,
    pub coefficients: Vec<FitCoefficient>,
    #[serde(skip)]
    pub polynomial: PolyExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FitError {
    #[error("no solution: target is not in the span of {unknowns} ansatz terms")]
    NoSolution { unknowns: usize, equations: usize },
    #[error("target is identically zero; the fit is degenerate")]
    Degenerate,
    #[error("`{0}` is not a generator")]
    UnknownGenerator(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Monomials in `vars` of total degree at most `max`, ascending.
fn monomials(vars: &[VarId], max: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    let mut frontier = vec![Monomial::one()];
    for _ in 0..max {
        let mut next = Vec::new();
        for m in &frontier {
            for v in vars {
                let n = m.mul(&Monomial::var(*v));
                if !next.contains(&n) {
                    next.push(n);
                }
            }
        }
        out.extend(next.iter().copied());
        frontier = next;
    }
    out.sort();
    out.dedup();
    out
}

/// Fit an arbitrary formal target.
pub fn fit_expression(session: &Session<'_>, target: &Formal, ansatz: &StructureAnsatz) -> Result<FitResult, FitError> {
    let ex = session.exact_expander()?;
    let t = ex.expand(target)?;
    fit_target(session, &t, target.to_string(), ansatz)
}

/// Fit `{A, B}^2` for the named bracket; the result is `2F`.
pub fn fit_structure_function(session: &Session<'_>, bracket: &str, ansatz: &StructureAnsatz) -> Result<FitResult, FitError> {
    let target = Formal::Pow(Box::new(Formal::sym(bracket)), 2);
    fit_expression(session, &target, ansatz)
}

/// Fit `{S_i, {S_j, S_k}}`.
pub fn fit_quadratic_closure(
    session: &Session<'_>,
    i: &str,
    j: &str,
    k: &str,
    ansatz: &StructureAnsatz,
) -> Result<FitResult, FitError> {
    let target = Formal::bracket(Formal::sym(i), Formal::bracket(Formal::sym(j), Formal::sym(k)));
    fit_expression(session, &target, ansatz)
}

/// For a left side `{S_i, {S_j, S_k}}` or `{{S_j, S_k}, S_i}` (inner
/// brackets possibly named) return `(i, j, k, sign)`.
pub fn closure_operands(sys: &SystemDefinition, lhs: &Formal) -> Option<(String, String, String, i8)> {
    let leaf = |f: &Formal| match f {
        Formal::Sym(s) if sys.generator(s).is_some() => Some(s.clone()),
        _ => None,
    };
    let pair = |f: &Formal| match f {
        Formal::Sym(s) => {
            let b = sys.named_bracket(s)?;
            (sys.generator(&b.left).is_some() && sys.generator(&b.right).is_some())
                .then(|| (b.left.clone(), b.right.clone()))
        }
        Formal::Bracket(a, b) => Some((leaf(a)?, leaf(b)?)),
        _ => None,
    };
    let Formal::Bracket(x, y) = lhs else {
        return None;
    };
    if let (Some(i), Some((j, k))) = (leaf(x), pair(y)) {
        return Some((i, j, k, 1));
    }
    if let (Some((j, k)), Some(i)) = (pair(x), leaf(y)) {
        return Some((i, j, k, -1));
    }
    None
}

fn fit_target(
    session: &Session<'_>,
    target: &RatExpr,
    target_text: String,
    ansatz: &StructureAnsatz,
) -> Result<FitResult, FitError> {
    if target.is_zero() {
        return Err(FitError::Degenerate);
    }
    let ex = session.exact_expander()?;
    let sys = session.sys;
    let gen_vars = ex.generator_vars();
    let ngen = sys.generators.len();
    let mut basis_ids = Vec::new();
    for name in &ansatz.basis {
        match gen_vars.lookup(name) {
            Some(v) if v.index() < ngen => {
                if !basis_ids.contains(&v) {
                    basis_ids.push(v)
                }
            }
            _ => return Err(FitError::UnknownGenerator(name.clone())),
        }
    }
    let gen_monos = monomials(&basis_ids, ansatz.max_generator_degree);
    let phase_params = sys.vars.parameters();
    let param_monos = monomials(&phase_params, ansatz.max_parameter_degree);

    let images: Vec<RatExpr> = gen_monos
        .iter()
        .map(|m| ex.realize(&PolyExpr::monomial(*m, GaussianRational::from_integer(1))))
        .collect();
    let mut den = target.den().clone();
    for im in &images {
        den = den.lcm(im.den());
    }
    let numerators: Vec<PolyExpr> = images.iter().map(|im| im.numerator_over(&den)).collect();
    let rhs = target.numerator_over(&den);

    let npm = param_monos.len();
    let ncols = gen_monos.len() * npm;
    let mut rows: HashMap<Monomial, Vec<(usize, GaussianRational)>, FastHash> = HashMap::default();
    for (mi, num) in numerators.iter().enumerate() {
        for (mono, c) in num.terms() {
            for (pi, pm) in param_monos.iter().enumerate() {
                rows.entry(mono.mul(pm)).or_default().push((mi * npm + pi, c.clone()));
            }
        }
    }
    let mut rhs_map: HashMap<Monomial, GaussianRational, FastHash> = HashMap::default();
    for (mono, c) in rhs.terms() {
        rhs_map.insert(*mono, c.clone());
        rows.entry(*mono).or_default();
    }
    let mut keys: Vec<Monomial> = rows.keys().copied().collect();
    keys.sort_by(|a, b| b.cmp(a));
    let equations = keys.len();
    let mut system = SparseSystem::new(ncols);
    for key in keys {
        let row = rows.remove(&key).unwrap_or_default();
        let r = rhs_map.remove(&key).unwrap_or_else(|| GaussianRational::from_integer(0));
        system.push(row, r);
    }
    let Some(u) = system.solve() else {
        return Err(FitError::NoSolution { unknowns: ncols, equations });
    };
    let nullspace_dim = system.nullity();

    // Reassemble in generator space: parameter slot 6 + k becomes ngen + k.
    let mut terms = Vec::new();
    for (col, c) in u.into_iter().enumerate() {
        if num_traits::Zero::is_zero(&c) {
            continue;
        }
        let (mi, pi) = (col / npm, col % npm);
        let mut pairs: Vec<(VarId, u16)> = gen_monos[mi].factors().collect();
        for (v, e) in param_monos[pi].factors() {
            pairs.push((VarId((v.index() - VarId::PHASE_SPACE.len() + ngen) as u8), e));
        }
        terms.push((Monomial::from_exponents(&pairs), c));
    }
    let polynomial = PolyExpr::from_terms(terms);
    let residual_zero = ex.realize(&polynomial).sub(target).is_zero();

    let coefficients = polynomial
        .collect_by(|v| v.index() < ngen)
        .into_iter()
        .rev()
        .map(|(m, p)| FitCoefficient {
            monomial: PolyExpr::monomial(m, GaussianRational::from_integer(1)).display(gen_vars).to_string(),
            coefficient: p.display(gen_vars).to_string(),
        })
        .collect();
    Ok(FitResult {
        target: target_text,
        basis: ansatz.basis.clone(),
        max_generator_degree: ansatz.max_generator_degree,
        max_parameter_degree: ansatz.max_parameter_degree,
        unknowns: ncols,
        equations,
        nullspace_dim,
        residual_zero,
        fitted: polynomial.display(gen_vars).to_string(),
        coefficients,
        polynomial,
    })
}
