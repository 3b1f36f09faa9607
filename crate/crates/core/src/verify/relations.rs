//! Adjudication of claimed identities.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::GaussianRational;
use crate::bracket::BracketConvention;
use crate::catalog::{Formal, SystemDefinition};

use super::expand::claim_function;
use super::fit::{
    closure_operands, fit_quadratic_closure, fit_structure_function, FitError, FitResult, StructureAnsatz,
};
use super::{rng_for, Residual, Session};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationKind {
    /// Nested brackets of generators.
    Closure,
    /// Brackets between named brackets.
    SecondAlgebra,
    /// No brackets or derivatives, e.g. `C1 + C2 + M + L = 0`.
    Linear,
    Structure,
    Special,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Verified,
    /// Holds under a convention other than the session's.
    VerifiedUnderConvention,
    /// Fast mode: zero after specializing parameters.
    Probable,
    Refuted,
    Error,
    Skipped,
}

impl Status {
    pub fn holds(self) -> bool {
        matches!(self, Status::Verified | Status::VerifiedUnderConvention | Status::Probable)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationVerdict {
    pub label: Option<String>,
    pub kind: RelationKind,
    pub relation: String,
    pub status: Status,
    pub convention: String,
    pub residual: Option<Residual>,
    /// A fitted right-hand side that does hold, for refuted closure lines.
    pub fitted_rhs: Option<String>,
    pub note: Option<String>,
}

/// Classify a relation by shape.
pub fn classify(sys: &SystemDefinition, lhs: &Formal, rhs: &Formal) -> RelationKind {
    if !lhs.contains_bracket() && !rhs.contains_bracket() {
        // `diff(F, X) = ...` continues a closure line.
        if lhs.contains_diff() || rhs.contains_diff() {
            return RelationKind::Closure;
        }
        return RelationKind::Linear;
    }
    let named = |f: &Formal| matches!(f, Formal::Sym(s) if sys.named_bracket(s).is_some());
    match lhs {
        Formal::Bracket(a, b) if named(a) && named(b) => RelationKind::SecondAlgebra,
        _ => RelationKind::Closure,
    }
}

/// Check `lhs = rhs` under the session convention; on failure retry the
/// other conventions.
pub fn verify_relation(
    session: &Session<'_>,
    stream: u64,
    label: Option<String>,
    kind: RelationKind,
    lhs: &Formal,
    rhs: &Formal,
) -> RelationVerdict {
    let conv = session.convention();
    let mut v = RelationVerdict {
        label,
        kind,
        relation: format!("{lhs} = {rhs}"),
        status: Status::Error,
        convention: conv.to_string(),
        residual: None,
        fitted_rhs: None,
        note: None,
    };
    if session.expired() {
        v.status = Status::Skipped;
        v.note = Some("time limit reached".into());
        return v;
    }
    let residual = match difference(session, conv, lhs, rhs) {
        Ok(r) => r,
        Err(e) => {
            v.note = Some(e);
            return v;
        }
    };
    if residual.is_zero() {
        v.status = if session.is_fast() { Status::Probable } else { Status::Verified };
        return v;
    }
    for other in BracketConvention::ALL {
        if other == conv {
            continue;
        }
        if let Ok(r) = difference(session, other, lhs, rhs) {
            if r.is_zero() {
                v.status = Status::VerifiedUnderConvention;
                v.convention = other.to_string();
                return v;
            }
        }
    }
    v.status = Status::Refuted;
    let vars = &session.sys.vars;
    let mut rng = rng_for(session.options.seed, stream);
    let mut res = Residual::describe(&residual, vars, &mut rng);
    if let (Some(vals), Some(w)) = (session.parameter_values(), res.witness.as_mut()) {
        // In fast mode parameters were fixed before expansion.
        for (name, c) in session.sys.parameters.iter().zip(vals) {
            if let Some(coord) = w.point.iter_mut().find(|p| &p.name == name) {
                coord.value = c.to_string();
            }
        }
    }
    v.residual = Some(res);
    v
}

fn difference(
    session: &Session<'_>,
    conv: BracketConvention,
    lhs: &Formal,
    rhs: &Formal,
) -> Result<crate::algebra::RatExpr, String> {
    let ex = session.expander(conv).map_err(|e| e.to_string())?;
    let l = ex.expand(lhs).map_err(|e| e.to_string())?;
    let r = ex.expand(rhs).map_err(|e| e.to_string())?;
    Ok(l.sub(&r))
}

/// All relations of the system, in declaration order.
pub fn verify_relations(session: &Session<'_>) -> Vec<RelationVerdict> {
    let sys = session.sys;
    sys.relations
        .par_iter()
        .enumerate()
        .map(|(k, r)| {
            let kind = classify(sys, &r.lhs, &r.rhs);
            let mut v = verify_relation(session, k as u64, r.label.clone(), kind, &r.lhs, &r.rhs);
            if v.status == Status::Refuted && kind == RelationKind::Closure && session.options.fit_corrections {
                if let Some(fit) = corrected_closure(session, &r.lhs) {
                    v.fitted_rhs = Some(fit);
                }
            }
            v
        })
        .collect()
}

fn corrected_closure(session: &Session<'_>, lhs: &Formal) -> Option<String> {
    let (i, j, k, sign) = closure_operands(session.sys, lhs)?;
    let fit = fit_quadratic_closure(session, &i, &j, &k, &StructureAnsatz::closure(session.sys)).ok()?;
    if !fit.residual_zero {
        return None;
    }
    let p = if sign < 0 { fit.polynomial.neg() } else { fit.polynomial.clone() };
    let vars = session.sys.generator_vars();
    Some(p.display(&vars).to_string())
}

/// The relations that live among named brackets: the second algebra
/// and the linear relations.
pub fn verify_second_algebra(session: &Session<'_>) -> Vec<RelationVerdict> {
    let sys = session.sys;
    sys.relations
        .par_iter()
        .enumerate()
        .filter_map(|(k, r)| {
            let kind = classify(sys, &r.lhs, &r.rhs);
            matches!(kind, RelationKind::SecondAlgebra | RelationKind::Linear)
                .then(|| verify_relation(session, k as u64, r.label.clone(), kind, &r.lhs, &r.rhs))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureOutcome {
    pub bracket: String,
    pub verdict: RelationVerdict,
    /// Exact fit of the square when the stated claim fails.
    pub fit: Option<FitResult>,
    /// The fitted structure function, half the fitted square.
    pub fitted_function: Option<String>,
    pub fit_error: Option<String>,
}

fn sym(s: &str) -> Formal {
    Formal::sym(s)
}

fn br(a: Formal, b: Formal) -> Formal {
    Formal::bracket(a, b)
}

fn mul(a: Formal, b: Formal) -> Formal {
    Formal::Mul(Box::new(a), Box::new(b))
}

fn add(a: Formal, b: Formal) -> Formal {
    Formal::Add(Box::new(a), Box::new(b))
}

fn sub(a: Formal, b: Formal) -> Formal {
    Formal::Sub(Box::new(a), Box::new(b))
}

fn neg(a: Formal) -> Formal {
    Formal::Neg(Box::new(a))
}

fn diff(f: &str, x: &str) -> Formal {
    Formal::Diff(f.to_string(), x.to_string())
}

/// `BRACKET^2 = 2*(RHS)` for every structure claim.
pub fn verify_structure_claims(session: &Session<'_>) -> Vec<StructureOutcome> {
    let sys = session.sys;
    let base = 10_000u64;
    sys.structures
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let lhs = Formal::Pow(Box::new(sym(&c.bracket)), 2);
            let rhs = mul(Formal::int(2), c.rhs.clone());
            let verdict = verify_relation(
                session,
                base + k as u64,
                Some(format!("{} squared", c.bracket)),
                RelationKind::Structure,
                &lhs,
                &rhs,
            );
            let mut out = StructureOutcome {
                bracket: c.bracket.clone(),
                verdict,
                fit: None,
                fitted_function: None,
                fit_error: None,
            };
            if out.verdict.status == Status::Refuted && session.options.fit_corrections {
                let fit = StructureAnsatz::for_bracket(sys, &c.bracket)
                    .ok_or_else(|| FitError::UnknownGenerator(c.bracket.clone()))
                    .and_then(|a| fit_structure_function(session, &c.bracket, &a));
                match fit {
                    Ok(fit) => {
                        let half = fit.polynomial.scale(&GaussianRational::from_ratio(1, 2));
                        out.fitted_function = Some(half.display(&sys.generator_vars()).to_string());
                        out.fit = Some(fit);
                    }
                    Err(FitError::Degenerate) => {
                        out.fitted_function = Some("0".to_string());
                        out.verdict.note = Some(format!("{} vanishes identically", c.bracket));
                    }
                    Err(e) => out.fit_error = Some(e.to_string()),
                }
            }
            out
        })
        .collect()
}

/// Operands of a named bracket when both are generators.
fn pair_of(sys: &SystemDefinition, name: &str) -> Option<(String, String)> {
    let b = sys.named_bracket(name)?;
    (sys.generator(&b.left).is_some() && sys.generator(&b.right).is_some()).then(|| (b.left.clone(), b.right.clone()))
}

/// Function name to differentiate for a claim on `bracket`.
fn claim_name(sys: &SystemDefinition, bracket: &str) -> Option<String> {
    let c = sys.structures.iter().find(|c| c.bracket == bracket)?;
    Some(match &c.rhs {
        Formal::Sym(f) if sys.function(f).is_some() => f.clone(),
        _ => claim_function(bracket),
    })
}

/// The special form of the algebra for the pairs `C1 = {A1, B1}` and
/// `C2 = {A2, B2}` with structure functions `F1`, `F2`, together with the
/// identities it implies. Lines that need a missing piece are omitted,
/// and nothing is checked unless the system claims the vanishing
/// brackets of the special form.
pub fn verify_special_structure(session: &Session<'_>) -> Vec<RelationVerdict> {
    let sys = session.sys;
    let (Some((a1, b1)), Some((a2, b2))) = (pair_of(sys, "C1"), pair_of(sys, "C2")) else {
        return Vec::new();
    };
    let (a1, b1, a2, b2) = (a1.as_str(), b1.as_str(), a2.as_str(), b2.as_str());
    let claimed = super::table::claimed_pairs(sys);
    let pi_shape = [(a1, a2), (a1, b2), (a2, b1)].iter().all(|(p, q)| {
        claimed
            .iter()
            .any(|(x, y)| (x == p && y == q) || (x == q && y == p))
    });
    if !pi_shape {
        return Vec::new();
    }
    let f1 = claim_name(sys, "C1");
    let f2 = claim_name(sys, "C2");
    let c1 = || br(sym(a1), sym(b1));
    let c2 = || br(sym(a2), sym(b2));
    let d = || br(sym(b1), sym(b2));
    let zero = || Formal::int(0);

    let mut lines: Vec<(String, Formal, Formal)> = vec![
        ("vanishing".into(), br(sym(a1), sym(a2)), zero()),
        ("vanishing".into(), br(sym(a1), sym(b2)), zero()),
        ("vanishing".into(), br(sym(a2), sym(b1)), zero()),
    ];
    for (f, a, b, c) in [(&f1, a1, b1, c1()), (&f2, a2, b2, c2())] {
        if let Some(f) = f {
            lines.push((
                "square".into(),
                Formal::Pow(Box::new(c.clone()), 2),
                mul(Formal::int(2), sym(f)),
            ));
            lines.push(("derivative".into(), br(sym(a), c.clone()), diff(f, b)));
            lines.push(("derivative".into(), br(sym(b), c), neg(diff(f, a))));
        }
    }
    lines.push(("mixed".into(), br(c1(), sym(b2)), br(sym(a1), d())));
    lines.push(("mixed".into(), br(c2(), sym(b1)), neg(br(sym(a2), d()))));

    let mut implied = Vec::new();
    if let (Some(f1), Some(f2)) = (&f1, &f2) {
        let (f1, f2) = (f1.as_str(), f2.as_str());
        let ia = sub(
            sub(mul(br(c1(), sym(b2)), c1()), mul(diff(f1, a2), c2())),
            mul(diff(f1, b1), d()),
        );
        let ib = add(
            sub(mul(br(c2(), sym(b1)), c2()), mul(diff(f2, a1), c1())),
            mul(diff(f2, b2), d()),
        );
        let c12 = || br(c1(), c2());
        implied.push(("implied (a)".to_string(), ia.clone(), zero()));
        implied.push(("implied (b)".to_string(), ib.clone(), zero()));
        implied.push((
            "implied {C1, C2} times D".to_string(),
            mul(c12(), d()),
            add(
                mul(br(sym(a1), d()), br(sym(a2), d())),
                mul(diff(f1, a2), diff(f2, a1)),
            ),
        ));
        implied.push((
            "implied {C1, C2} times C2".to_string(),
            mul(c12(), c2()),
            add(
                neg(mul(diff(f1, b1), diff(f2, a1))),
                mul(diff(f2, b2), br(sym(a1), d())),
            ),
        ));
        implied.push((
            "implied {C1, C2} times C1".to_string(),
            mul(c12(), c1()),
            add(
                mul(diff(f1, a2), diff(f2, b2)),
                mul(diff(f1, b1), br(sym(a2), d())),
            ),
        ));
        implied.push((
            "implied {C1, C2} times C1 C2".to_string(),
            mul(mul(c12(), c1()), c2()),
            add(
                add(
                    mul(mul(diff(f1, b1), diff(f2, a1)), c1()),
                    mul(mul(diff(f1, a2), diff(f2, b2)), c2()),
                ),
                mul(mul(diff(f1, b1), diff(f2, b2)), d()),
            ),
        ));
        implied.push(("implied (a) minus (b)".to_string(), sub(ia, ib), zero()));
    }
    let n = lines.len();
    lines.extend(implied);
    let base = 20_000u64;
    let mut out: Vec<RelationVerdict> = lines
        .par_iter()
        .enumerate()
        .map(|(k, (label, l, r))| verify_relation(session, base + k as u64, Some(label.clone()), RelationKind::Special, l, r))
        .collect();
    // The combined chain is only informative when a separate line fails.
    if out.len() > n {
        let separate_ok = out[n].status.holds() && out[n + 1].status.holds();
        let last = out.len() - 1;
        if separate_ok {
            out.pop();
        } else if out[last].status.holds() {
            out[last].note = Some("holds only as a difference".into());
        }
    }
    out
}
