//! Functional independence by Jacobian rank and linear independence by
//! coefficient matching.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::algebra::linalg::{poly_kernel, rank};
use crate::algebra::{GaussianRational, PolyExpr, RatExpr, VarId};

use super::{rng_for, Session, VerifyError};

/// Evaluation points for the Jacobian rank.
pub const RANK_TRIALS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub functions: Vec<String>,
    /// Largest rank seen over the sample points.
    pub rank: usize,
    pub trial_ranks: Vec<usize>,
    /// `rank == functions.len()`.
    pub independent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DependencyTerm {
    pub function: String,
    pub coefficient: String,
}

/// `Σ c_k f_k + constant = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dependency {
    pub terms: Vec<DependencyTerm>,
    pub constant: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearReport {
    pub functions: Vec<String>,
    pub independent: bool,
    pub dependencies: Vec<Dependency>,
}

fn resolve(session: &Session<'_>, names: &[String]) -> Result<Vec<RatExpr>, VerifyError> {
    let ex = session.exact_expander()?;
    names
        .iter()
        .map(|n| {
            let f = crate::catalog::parse_expression(n).map_err(|e| VerifyError::Formal(e.to_string()))?;
            ex.expand(&f)
        })
        .collect()
}

fn random_rational<R: Rng>(rng: &mut R) -> GaussianRational {
    let num = rng.gen_range(-60i64..=60);
    let den = rng.gen_range(1i64..=9);
    GaussianRational::from_ratio(num, den)
}

/// Rank of the Jacobian of `names` with respect to the six phase-space
/// coordinates, at random rational points with random parameter values.
pub fn check_functional_independence(session: &Session<'_>, names: &[String]) -> Result<RankReport, VerifyError> {
    let exprs = resolve(session, names)?;
    let nvars = session.sys.vars.len();
    let jac: Vec<Vec<RatExpr>> = exprs
        .iter()
        .map(|e| VarId::PHASE_SPACE.iter().map(|v| e.derivative(*v)).collect())
        .collect();
    let mut rng = rng_for(session.options.seed, 60_000);
    let mut trial_ranks = Vec::with_capacity(RANK_TRIALS);
    for _ in 0..RANK_TRIALS {
        let mut found = None;
        for _ in 0..64 {
            let point: Vec<GaussianRational> = (0..nvars).map(|_| random_rational(&mut rng)).collect();
            let rows: Option<Vec<Vec<GaussianRational>>> = jac
                .iter()
                .map(|row| row.iter().map(|d| d.eval(&point).ok()).collect())
                .collect();
            if let Some(rows) = rows {
                found = Some(rank(&rows));
                break;
            }
        }
        match found {
            Some(r) => trial_ranks.push(r),
            None => return Err(crate::algebra::ZeroTestError::SamplingExhausted(64).into()),
        }
    }
    let r = trial_ranks.iter().copied().max().unwrap_or(0);
    Ok(RankReport {
        functions: names.to_vec(),
        rank: r,
        trial_ranks,
        independent: r == names.len(),
    })
}

/// Linear relations `Σ c_k f_k + c_0 = 0` with coefficients polynomial
/// in the parameters.
pub fn check_linear_independence(session: &Session<'_>, names: &[String]) -> Result<LinearReport, VerifyError> {
    let exprs = resolve(session, names)?;
    let mut den = crate::algebra::Denominator::one();
    for e in &exprs {
        den = den.lcm(e.den());
    }
    let mut columns: Vec<PolyExpr> = exprs.iter().map(|e| e.numerator_over(&den)).collect();
    columns.push(den.to_poly());
    let is_phase = |v: VarId| v.index() < VarId::PHASE_SPACE.len();
    let collected: Vec<_> = columns.iter().map(|p| p.collect_by(is_phase)).collect();
    let mut keys: Vec<_> = collected.iter().flat_map(|c| c.keys().copied()).collect();
    keys.sort();
    keys.dedup();
    let matrix: Vec<Vec<PolyExpr>> = keys
        .iter()
        .rev()
        .map(|k| collected.iter().map(|c| c.get(k).cloned().unwrap_or_else(PolyExpr::zero)).collect())
        .collect();
    let kernel = poly_kernel(&matrix, columns.len());
    let vars = &session.sys.vars;
    let dependencies: Vec<Dependency> = kernel
        .basis
        .into_iter()
        .map(|v| {
            let v = normalize(v);
            let show = |p: &PolyExpr| p.display(vars).to_string();
            Dependency {
                terms: names
                    .iter()
                    .zip(&v)
                    .map(|(n, c)| DependencyTerm {
                        function: n.clone(),
                        coefficient: show(c),
                    })
                    .collect(),
                constant: show(&v[names.len()]),
            }
        })
        .collect();
    Ok(LinearReport {
        functions: names.to_vec(),
        independent: dependencies.is_empty(),
        dependencies,
    })
}

/// Constant vectors become primitive Gaussian-integer vectors; every
/// vector is signed so its first nonzero leading coefficient is positive.
pub fn normalize(mut v: Vec<PolyExpr>) -> Vec<PolyExpr> {
    if let Some(consts) = v.iter().map(|p| if p.is_zero() { Some(GaussianRational::zero()) } else { p.as_constant() }).collect::<Option<Vec<_>>>() {
        let mut l = BigInt::one();
        for c in &consts {
            l = l.lcm(&c.denom_lcm());
        }
        let scale = GaussianRational::from_bigint(l);
        let ints: Vec<GaussianRational> = consts.iter().map(|c| c * &scale).collect();
        let mut g = BigInt::zero();
        for c in &ints {
            g = g.gcd(c.re().numer()).gcd(c.im().numer());
        }
        if !g.is_zero() {
            let inv = GaussianRational::new(BigRational::new(BigInt::one(), g), BigRational::zero());
            v = ints.iter().map(|c| PolyExpr::constant(c * &inv)).collect();
        }
    }
    let lead = v.iter().find_map(|p| p.leading_coeff().cloned());
    if let Some(c) = lead {
        let negative = if c.re().is_zero() { c.im().is_negative() } else { c.re().is_negative() };
        if negative {
            v = v.iter().map(PolyExpr::neg).collect();
        }
    }
    v
}
