//! Pairwise brackets of generators.

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{Formal, SystemDefinition};

use super::{rng_for, Residual, Session, VerifyError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommutationEntry {
    pub left: String,
    pub right: String,
    pub zero: bool,
    /// Numerator terms of the bracket.
    pub terms: usize,
}

/// A claimed vanishing bracket that does not vanish.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub left: String,
    pub right: String,
    pub residual: Residual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommutationTable {
    pub convention: String,
    pub generators: Vec<String>,
    /// Upper triangle in declaration order, `H` included.
    pub entries: Vec<CommutationEntry>,
    /// Pairs claimed to commute, from `vanish` lines and relations
    /// `{X, Y} = 0` between generators.
    pub claimed: Vec<(String, String)>,
    /// Computed vanishing pairs not involving `H`.
    pub vanishing: Vec<(String, String)>,
    pub missing: Vec<Discrepancy>,
    /// Vanishing pairs that were not claimed.
    pub extra: Vec<(String, String)>,
    /// Generators other than `H` that fail to commute with `H`.
    pub not_conserved: Vec<String>,
    pub matches: bool,
}

fn ordered(sys: &SystemDefinition, a: &str, b: &str) -> (String, String) {
    let pos = |n: &str| sys.generators.iter().position(|g| g.name == n).unwrap_or(usize::MAX);
    if pos(a) <= pos(b) {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Claimed vanishing pairs, normalized to declaration order.
pub fn claimed_pairs(sys: &SystemDefinition) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = sys.vanishing.iter().map(|(a, b)| ordered(sys, a, b)).collect();
    for r in &sys.relations {
        let zero = matches!(&r.rhs, Formal::Num(c) if num_traits::Zero::is_zero(c));
        if let (Formal::Bracket(a, b), true) = (&r.lhs, zero) {
            if let (Formal::Sym(a), Formal::Sym(b)) = (a.as_ref(), b.as_ref()) {
                if sys.generator(a).is_some() && sys.generator(b).is_some() {
                    out.push(ordered(sys, a, b));
                }
            }
        }
    }
    out.sort_by_key(|(a, b)| {
        let pos = |n: &str| sys.generators.iter().position(|g| g.name == n);
        (pos(a), pos(b))
    });
    out.dedup();
    out
}

pub fn commutation_table(session: &Session<'_>) -> Result<CommutationTable, VerifyError> {
    let sys = session.sys;
    let ex = session.expander(session.convention())?;
    let names: Vec<String> = sys.generators.iter().map(|g| g.name.clone()).collect();
    let mut pairs = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            pairs.push((names[i].clone(), names[j].clone()));
        }
    }
    let values: Vec<Result<_, VerifyError>> = pairs
        .par_iter()
        .map(|(a, b)| ex.expand(&Formal::bracket(Formal::sym(a), Formal::sym(b))))
        .collect();
    let claimed = claimed_pairs(sys);
    let mut entries = Vec::new();
    let mut vanishing = Vec::new();
    let mut missing = Vec::new();
    let mut not_conserved = Vec::new();
    for (k, ((a, b), v)) in pairs.iter().zip(values).enumerate() {
        let v = v?;
        let zero = v.is_zero();
        entries.push(CommutationEntry {
            left: a.clone(),
            right: b.clone(),
            zero,
            terms: v.size(),
        });
        let with_h = a == "H" || b == "H";
        if with_h {
            if !zero {
                not_conserved.push(if a == "H" { b.clone() } else { a.clone() });
            }
            continue;
        }
        if zero {
            vanishing.push((a.clone(), b.clone()));
        } else if claimed.contains(&(a.clone(), b.clone())) {
            missing.push(Discrepancy {
                left: a.clone(),
                right: b.clone(),
                residual: Residual::describe(&v, &sys.vars, &mut rng_for(session.options.seed, 50_000 + k as u64)),
            });
        }
    }
    let extra: Vec<(String, String)> = vanishing.iter().filter(|p| !claimed.contains(p)).cloned().collect();
    let matches = missing.is_empty() && extra.is_empty();
    Ok(CommutationTable {
        convention: session.convention().to_string(),
        generators: names,
        entries,
        claimed,
        vanishing,
        missing,
        extra,
        not_conserved,
        matches,
    })
}
