//! Human-readable output.

use std::fmt::Write;

use poisson_verify_core::verify::{FitResult, RelationVerdict, Residual, Status, SystemReport};

use crate::{DynamicsReport, IndependenceReport};

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Verified => "verified",
        Status::VerifiedUnderConvention => "verified*",
        Status::Probable => "probable",
        Status::Refuted => "REFUTED",
        Status::Error => "ERROR",
        Status::Skipped => "skipped",
    }
}

fn pairs(ps: &[(String, String)]) -> String {
    if ps.is_empty() {
        return "none".into();
    }
    ps.iter().map(|(a, b)| format!("({a},{b})")).collect::<Vec<_>>().join(" ")
}

fn residual(out: &mut String, r: &Residual, indent: &str) {
    let _ = writeln!(out, "{indent}residual: {} terms, leading {}", r.terms, r.head.join(", "));
    if r.denominator != "1" {
        let _ = writeln!(out, "{indent}  over {}", r.denominator);
    }
    if let Some(w) = &r.witness {
        let pt: Vec<String> = w.point.iter().map(|c| format!("{}={}", c.name, c.value)).collect();
        let _ = writeln!(out, "{indent}witness: {} at {}", w.value, pt.join(" "));
    }
}

fn verdict(out: &mut String, v: &RelationVerdict) {
    let label = v.label.as_deref().map(|l| format!("[{l}] ")).unwrap_or_default();
    let _ = writeln!(out, "  {:<10} {label}{}", status_word(v.status), v.relation);
    if v.status == Status::VerifiedUnderConvention {
        let _ = writeln!(out, "             under convention {}", v.convention);
    }
    if let Some(r) = &v.residual {
        residual(out, r, "             ");
    }
    if let Some(f) = &v.fitted_rhs {
        let _ = writeln!(out, "             fitted: {f}");
    }
    if let Some(n) = &v.note {
        let _ = writeln!(out, "             note: {n}");
    }
}

pub fn verify(r: &SystemReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}  engine {}  seed {}  {} mode  convention {}",
        r.system, r.engine_version, r.seed, r.mode, r.convention
    );
    if let Some(vals) = &r.parameter_values {
        let _ = writeln!(out, "parameters specialized to {}", vals.join(", "));
    }
    if let Some(c) = &r.conservation {
        let _ = writeln!(out, "\nconservation");
        match &c.convention {
            Some(conv) => {
                let _ = writeln!(out, "  every generator commutes with H under `{conv}`");
            }
            None => {
                for t in &c.trials {
                    let _ = writeln!(out, "  {}: not conserved: {}", t.convention, t.failed.join(", "));
                }
                for e in c.entries.iter().filter(|e| !e.conserved) {
                    let _ = writeln!(out, "  {{H, {}}} != 0", e.generator);
                    if let Some(res) = &e.residual {
                        residual(&mut out, res, "    ");
                    }
                }
            }
        }
        for v in &c.variants {
            let state = if v.conserved { "conserved" } else { "not conserved" };
            let _ = writeln!(out, "  variant {} \"{}\": {state}", v.generator, v.label);
        }
    }
    if let Some(t) = &r.commutation {
        let _ = writeln!(out, "\ncommutation");
        let _ = writeln!(out, "  claimed:   {}", pairs(&t.claimed));
        let _ = writeln!(out, "  vanishing: {}", pairs(&t.vanishing));
        if t.matches {
            let _ = writeln!(out, "  matches the claimed set");
        }
        for d in &t.missing {
            let _ = writeln!(out, "  claimed but nonzero: ({},{})", d.left, d.right);
            residual(&mut out, &d.residual, "    ");
        }
        if !t.extra.is_empty() {
            let _ = writeln!(out, "  vanishing but not claimed: {}", pairs(&t.extra));
        }
        if !t.not_conserved.is_empty() {
            let _ = writeln!(out, "  not commuting with H: {}", t.not_conserved.join(", "));
        }
    }
    if let Some(e) = &r.commutation_error {
        let _ = writeln!(out, "\ncommutation failed: {e}");
    }
    if !r.structures.is_empty() {
        let _ = writeln!(out, "\nstructure functions");
        for s in &r.structures {
            verdict(&mut out, &s.verdict);
            if let Some(f) = &s.fitted_function {
                let _ = writeln!(out, "             fitted structure function: {f}");
            }
            if let Some(e) = &s.fit_error {
                let _ = writeln!(out, "             fit failed: {e}");
            }
        }
    }
    for (title, vs) in [("special structure", &r.special), ("relations", &r.relations)] {
        if !vs.is_empty() {
            let _ = writeln!(out, "\n{title}");
            for v in vs.iter() {
                verdict(&mut out, v);
            }
        }
    }
    if let Some(ind) = &r.independence {
        let _ = writeln!(out, "\nindependence");
        if let Some(e) = &ind.error {
            let _ = writeln!(out, "  failed: {e}");
        }
        if let (Some(c), Some(a)) = (&ind.core, &ind.all) {
            let _ = writeln!(out, "  functional rank({})={}; with {}: {}", c.functions.join(","), c.rank, a.functions.last().map(String::as_str).unwrap_or(""), a.rank);
        }
        if let Some(l) = &ind.linear {
            let _ = writeln!(out, "  linear: {}", if l.independent { "independent" } else { "dependent" });
        }
    }
    if !r.counts.is_empty() {
        let _ = writeln!(out, "\ncounts");
        for (kind, c) in &r.counts {
            let held = c.verified + c.verified_under_convention + c.probable;
            let _ = write!(out, "  {kind:<15} {held}/{} hold, {} refuted", c.total, c.refuted);
            if c.errors > 0 {
                let _ = write!(out, ", {} errors", c.errors);
            }
            if c.skipped > 0 {
                let _ = write!(out, ", {} skipped", c.skipped);
            }
            out.push('\n');
        }
    }
    if r.partial {
        let _ = writeln!(out, "\npartial report: the timeout was reached");
    }
    out
}

pub fn fit(f: &FitResult, pair: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "target: {}", f.target);
    let _ = writeln!(
        out,
        "basis: {} (degree <= {} in generators, <= {} in parameters)",
        f.basis.join(", "),
        f.max_generator_degree,
        f.max_parameter_degree
    );
    let _ = writeln!(out, "unknowns {}, equations {}, nullspace dimension {}", f.unknowns, f.equations, f.nullspace_dim);
    let what = if pair { "fitted 2F" } else { "fitted" };
    let _ = writeln!(out, "{what}: {}", f.fitted);
    for c in &f.coefficients {
        let _ = writeln!(out, "  {}: {}", c.monomial, c.coefficient);
    }
    out
}

pub fn independence(r: &IndependenceReport) -> String {
    let mut out = String::new();
    let last = r.all.functions.last().map(String::as_str).unwrap_or("");
    let _ = writeln!(
        out,
        "functional rank({})={}; rank with {last}={}; linear: {}",
        r.core.functions.join(","),
        r.core.rank,
        r.all.rank,
        if r.linear.independent { "independent" } else { "dependent" }
    );
    for d in &r.linear.dependencies {
        let terms: Vec<String> = d
            .terms
            .iter()
            .filter(|t| t.coefficient != "0")
            .map(|t| format!("({})*{}", t.coefficient, t.function))
            .collect();
        let _ = writeln!(out, "  dependency: {} + ({}) = 0", terms.join(" + "), d.constant);
    }
    out
}

pub fn dynamics(r: &DynamicsReport) -> String {
    let mut out = String::new();
    let params: Vec<String> = r.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let _ = writeln!(out, "{}  {}  dt {}  horizon {}", r.system, params.join(" "), r.dt, r.horizon);
    let _ = writeln!(out, "{:<10} {:>24} {:>12}", "integral", "initial", "drift");
    for d in &r.drift {
        let flag = if d.drift > r.tolerance { "  > tolerance" } else { "" };
        let _ = writeln!(out, "{:<10} {:>24.16e} {:>12.3e}{flag}", d.integral, d.initial, d.drift);
    }
    out
}

pub fn list<'a>(entries: impl Iterator<Item = (&'a String, &'a Vec<String>, &'a Vec<String>, usize, usize)>) -> String {
    let mut out = String::new();
    for (name, params, gens, claims, variants) in entries {
        let _ = writeln!(
            out,
            "{name:<6} params {:<24} generators {:<20} {claims} claims, {variants} variants",
            params.join(","),
            gens.join(",")
        );
    }
    out
}
