//! `{H, S} = 0` for every generator, with convention search and variant
//! readings.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::RatExpr;
use crate::bracket::{bracket, BracketConvention};

use super::{rng_for, Expander, Residual, Session};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConventionTrial {
    pub convention: String,
    pub conserved: Vec<String>,
    pub failed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConservationEntry {
    pub generator: String,
    pub conserved: bool,
    pub residual: Option<Residual>,
}

/// Conservation of an alternative reading of one generator. For a
/// Hamiltonian variant every other generator is checked against it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariantCheck {
    pub generator: String,
    pub label: String,
    pub conserved: bool,
    pub failed: Vec<String>,
    pub residual: Option<Residual>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConservationReport {
    /// The convention under which every generator is conserved, if any.
    pub convention: Option<String>,
    pub trials: Vec<ConventionTrial>,
    /// Per-generator outcome under the validating convention, or the
    /// first one tried when none validates.
    pub entries: Vec<ConservationEntry>,
    pub variants: Vec<VariantCheck>,
}

impl ConservationReport {
    pub fn all_conserved(&self) -> bool {
        self.convention.is_some()
    }

    pub fn validating(&self) -> Option<BracketConvention> {
        self.convention.as_deref().and_then(|c| c.parse().ok())
    }
}

fn residuals(ex: &Expander<'_>) -> Vec<(String, RatExpr)> {
    let h = ex.image("H").expect("validated systems define H").clone();
    ex.sys
        .generators
        .par_iter()
        .filter(|g| g.name != "H")
        .map(|g| {
            let s = ex.image(&g.name).expect("generator");
            (g.name.clone(), bracket(&h, s, ex.conv))
        })
        .collect()
}

fn trial(conv: BracketConvention, rs: &[(String, RatExpr)]) -> ConventionTrial {
    let (ok, bad): (Vec<_>, Vec<_>) = rs.iter().partition(|(_, r)| r.is_zero());
    ConventionTrial {
        convention: conv.to_string(),
        conserved: ok.into_iter().map(|(n, _)| n.clone()).collect(),
        failed: bad.into_iter().map(|(n, _)| n.clone()).collect(),
    }
}

/// Run the session convention (or the default) first; if some generator
/// is not conserved try the other conventions, unless one was forced.
pub fn conservation(session: &Session<'_>) -> ConservationReport {
    let first = session.options.convention.unwrap_or_default();
    let order: Vec<BracketConvention> = match session.options.convention {
        Some(c) => vec![c],
        None => std::iter::once(first)
            .chain(BracketConvention::ALL.into_iter().filter(|c| *c != first))
            .collect(),
    };
    let mut trials = Vec::new();
    let mut chosen: Option<(BracketConvention, Vec<(String, RatExpr)>)> = None;
    let mut first_rs = None;
    for conv in order {
        let Ok(ex) = session.expander(conv) else {
            continue;
        };
        let rs = residuals(ex);
        let t = trial(conv, &rs);
        let ok = t.failed.is_empty();
        trials.push(t);
        if ok {
            chosen = Some((conv, rs));
            break;
        }
        if first_rs.is_none() {
            first_rs = Some((conv, rs));
        }
    }
    let validating = chosen.as_ref().map(|(c, _)| *c);
    let (conv, rs) = chosen.or(first_rs).unwrap_or((first, Vec::new()));
    let vars = &session.sys.vars;
    let entries = rs
        .iter()
        .enumerate()
        .map(|(k, (name, r))| ConservationEntry {
            generator: name.clone(),
            conserved: r.is_zero(),
            residual: (!r.is_zero()).then(|| Residual::describe(r, vars, &mut rng_for(session.options.seed, 30_000 + k as u64))),
        })
        .collect();
    let variants = check_variants(session, conv);
    ConservationReport {
        convention: validating.map(|c| c.to_string()),
        trials,
        entries,
        variants,
    }
}

fn check_variants(session: &Session<'_>, conv: BracketConvention) -> Vec<VariantCheck> {
    let sys = session.sys;
    sys.variants
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let mut out = VariantCheck {
                generator: v.generator.clone(),
                label: v.label.clone(),
                conserved: false,
                failed: Vec::new(),
                residual: None,
            };
            let Ok(alt) = sys.with_variant(&v.label) else {
                return out;
            };
            let Ok(ex) = Expander::new(&alt, conv) else {
                return out;
            };
            let rs: Vec<(String, RatExpr)> = residuals(&ex)
                .into_iter()
                .filter(|(n, _)| v.generator == "H" || *n == v.generator)
                .collect();
            out.failed = rs.iter().filter(|(_, r)| !r.is_zero()).map(|(n, _)| n.clone()).collect();
            out.conserved = out.failed.is_empty();
            if let Some((_, r)) = rs.iter().find(|(_, r)| !r.is_zero()) {
                out.residual = Some(Residual::describe(r, &alt.vars, &mut rng_for(session.options.seed, 40_000 + k as u64)));
            }
            out
        })
        .collect()
}
