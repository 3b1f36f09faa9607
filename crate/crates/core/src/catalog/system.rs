use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use super::error::CatalogError;
use super::formal::{evaluate, Formal, FormalEnv, FormalError};
use crate::algebra::{RatExpr, VarId, VarTable};

/// A named phase-space integral (or the Hamiltonian `H`).
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub name: String,
    pub expr: RatExpr,
}

/// `NAME = {LEFT, RIGHT}`; operands are generators or earlier bracket names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedBracket {
    pub name: String,
    pub left: String,
    pub right: String,
}

/// A structure function: a polynomial in generators with parameter
/// coefficients, kept formal so it can be differentiated by generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureFunction {
    pub name: String,
    pub body: Formal,
}

/// `BRACKET^2 = 2*(RHS)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureClaim {
    pub bracket: String,
    pub rhs: Formal,
}

/// A claimed identity `lhs = rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub label: Option<String>,
    pub lhs: Formal,
    pub rhs: Formal,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// An alternative reading of one generator, checked for conservation
/// alongside the active definition.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub generator: String,
    pub label: String,
    /// Parameters that exist only in this variant; they follow the system
    /// parameters in the variant's variable table.
    pub extra_params: Vec<String>,
    pub expr: RatExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemDefinition {
    pub name: String,
    pub parameters: Vec<String>,
    pub vars: VarTable,
    pub generators: Vec<Generator>,
    pub brackets: Vec<NamedBracket>,
    pub functions: Vec<StructureFunction>,
    pub vanishing: Vec<(String, String)>,
    pub structures: Vec<StructureClaim>,
    pub relations: Vec<Relation>,
    pub variants: Vec<Variant>,
}

/// Names predefined in generator expressions.
pub const HELPERS: [&str; 6] = ["J_x", "J_y", "J_z", "J1", "J2", "J3"];

/// Names that can never be declared.
pub(crate) const RESERVED: [&str; 2] = ["i", "diff"];

/// Angular momentum components `(J_x, J_y, J_z)`.
pub fn angular_momentum() -> [RatExpr; 3] {
    let v = RatExpr::var;
    let (x, y, z) = (v(VarId::X), v(VarId::Y), v(VarId::Z));
    let (px, py, pz) = (v(VarId::PX), v(VarId::PY), v(VarId::PZ));
    [
        y.mul(&pz).sub(&z.mul(&py)),
        z.mul(&px).sub(&x.mul(&pz)),
        x.mul(&py).sub(&y.mul(&px)),
    ]
}

/// Symbol environment for generator expressions over a phase-space table.
pub(crate) struct PhaseEnv<'a> {
    pub vars: &'a VarTable,
    pub angular: [RatExpr; 3],
}

impl<'a> PhaseEnv<'a> {
    pub fn new(vars: &'a VarTable) -> Self {
        PhaseEnv {
            vars,
            angular: angular_momentum(),
        }
    }
}

impl FormalEnv for PhaseEnv<'_> {
    fn symbol(&self, name: &str) -> Option<RatExpr> {
        if let Some(v) = self.vars.lookup(name) {
            return Some(RatExpr::var(v));
        }
        match name {
            "J_x" | "J1" => Some(self.angular[0].clone()),
            "J_y" | "J2" => Some(self.angular[1].clone()),
            "J_z" | "J3" => Some(self.angular[2].clone()),
            _ => None,
        }
    }

    fn bracket(&self, _: &RatExpr, _: &RatExpr) -> Option<RatExpr> {
        None
    }

    fn diff(&self, _: &str, _: &str) -> Option<RatExpr> {
        None
    }
}

pub(crate) fn lift(err: FormalError, line: usize) -> CatalogError {
    match err {
        FormalError::Unbound(name) => CatalogError::UnboundName { name, line },
        other => CatalogError::invalid(line, other.to_string()),
    }
}

impl SystemDefinition {
    pub fn generator(&self, name: &str) -> Option<&Generator> {
        self.generators.iter().find(|g| g.name == name)
    }

    pub fn hamiltonian(&self) -> &RatExpr {
        &self
            .generator("H")
            .expect("validated systems define H")
            .expr
    }

    pub fn generator_names(&self) -> Vec<&str> {
        self.generators.iter().map(|g| g.name.as_str()).collect()
    }

    pub fn named_bracket(&self, name: &str) -> Option<&NamedBracket> {
        self.brackets.iter().find(|b| b.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&StructureFunction> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Generator-space table: every generator, then the parameters.
    pub fn generator_vars(&self) -> VarTable {
        VarTable::generator_space(&self.generator_names(), &self.parameters)
            .expect("validated at construction")
    }

    /// Variable table of a variant: system parameters then its extras.
    pub fn variant_vars(&self, v: &Variant) -> VarTable {
        let mut ps = self.parameters.clone();
        ps.extend(v.extra_params.iter().cloned());
        VarTable::phase_space(&ps).expect("validated at construction")
    }

    pub fn variant(&self, label: &str) -> Option<&Variant> {
        self.variants.iter().find(|v| v.label == label)
    }

    /// The system with one generator replaced by the variant `label`.
    /// Variant-only parameters become system parameters.
    pub fn with_variant(&self, label: &str) -> Result<SystemDefinition, CatalogError> {
        let v = self.variant(label).ok_or_else(|| CatalogError::UnknownVariant(label.to_string()))?;
        let mut out = self.clone();
        out.parameters.extend(v.extra_params.iter().cloned());
        out.vars = self.variant_vars(v);
        for g in &mut out.generators {
            if g.name == v.generator {
                g.expr = v.expr.clone();
            }
        }
        out.variants.retain(|w| w.label != label);
        Ok(out)
    }

    /// Canonical text of the definition in the system file format.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "system {}", self.name);
        if !self.parameters.is_empty() {
            let _ = writeln!(s, "param {}", self.parameters.join(" "));
        }
        for g in &self.generators {
            let _ = writeln!(s, "generator {} = {}", g.name, g.expr.display(&self.vars));
        }
        for b in &self.brackets {
            let _ = writeln!(s, "bracketname {} = {{{}, {}}}", b.name, b.left, b.right);
        }
        for f in &self.functions {
            let _ = writeln!(s, "function {} = {}", f.name, f.body);
        }
        for (a, b) in &self.vanishing {
            let _ = writeln!(s, "vanish {a} {b}");
        }
        for c in &self.structures {
            let _ = writeln!(s, "structure {}^2 = 2*({})", c.bracket, c.rhs);
        }
        for r in &self.relations {
            match &r.label {
                Some(l) => {
                    let _ = writeln!(s, "relation {}: {}", quote(l), r);
                }
                None => {
                    let _ = writeln!(s, "relation: {r}");
                }
            }
        }
        for v in &self.variants {
            let vars = self.variant_vars(v);
            let _ = write!(s, "variant {} {}", v.generator, quote(&v.label));
            if !v.extra_params.is_empty() {
                let _ = write!(s, " param {}", v.extra_params.join(" "));
            }
            let _ = writeln!(s, " = {}", v.expr.display(&vars));
        }
        s
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push(' '),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Incremental, validating constructor used by the parser.
pub(crate) struct SystemBuilder {
    pub sys: SystemDefinition,
}

impl SystemBuilder {
    pub fn new(name: String) -> Self {
        SystemBuilder {
            sys: SystemDefinition {
                name,
                parameters: Vec::new(),
                vars: VarTable::phase_space::<&str>(&[]).expect("six names"),
                generators: Vec::new(),
                brackets: Vec::new(),
                functions: Vec::new(),
                vanishing: Vec::new(),
                structures: Vec::new(),
                relations: Vec::new(),
                variants: Vec::new(),
            },
        }
    }

    /// Every name visible in the system's formal namespace.
    fn is_declared(&self, name: &str) -> bool {
        self.sys.vars.lookup(name).is_some()
            || HELPERS.contains(&name)
            || RESERVED.contains(&name)
            || self.sys.generator(name).is_some()
            || self.sys.named_bracket(name).is_some()
            || self.sys.function(name).is_some()
    }

    fn fresh(&self, name: &str, line: usize) -> Result<(), CatalogError> {
        if self.is_declared(name) {
            return Err(CatalogError::DuplicateGenerator {
                name: name.to_string(),
                line,
            });
        }
        Ok(())
    }

    pub fn params(&mut self, names: Vec<String>, line: usize) -> Result<(), CatalogError> {
        if !self.sys.generators.is_empty() {
            return Err(CatalogError::invalid(
                line,
                "parameters must be declared before generators",
            ));
        }
        for n in names {
            self.fresh(&n, line)?;
            self.sys.parameters.push(n);
            self.sys.vars = VarTable::phase_space(&self.sys.parameters)?;
        }
        Ok(())
    }

    pub fn generator(&mut self, name: String, body: &Formal, line: usize) -> Result<(), CatalogError> {
        self.fresh(&name, line)?;
        let expr = evaluate(body, &PhaseEnv::new(&self.sys.vars)).map_err(|e| lift(e, line))?;
        self.sys.generators.push(Generator { name, expr });
        // Keep the generator table within limits as we go.
        VarTable::generator_space(&self.sys.generator_names(), &self.sys.parameters)?;
        Ok(())
    }

    pub fn bracket_name(
        &mut self,
        name: String,
        left: String,
        right: String,
        line: usize,
    ) -> Result<(), CatalogError> {
        self.fresh(&name, line)?;
        for op in [&left, &right] {
            if self.sys.generator(op).is_none() && self.sys.named_bracket(op).is_none() {
                return Err(CatalogError::UnboundName {
                    name: op.clone(),
                    line,
                });
            }
        }
        self.sys.brackets.push(NamedBracket { name, left, right });
        Ok(())
    }

    pub fn function(&mut self, name: String, body: Formal, line: usize) -> Result<(), CatalogError> {
        self.fresh(&name, line)?;
        if body.contains_bracket() {
            return Err(CatalogError::invalid(
                line,
                "structure functions are polynomials in generators",
            ));
        }
        let mut syms = BTreeSet::new();
        body.symbols(&mut syms);
        for s in syms {
            if self.sys.generator(&s).is_none() && !self.sys.parameters.contains(&s) {
                return Err(CatalogError::UnboundName { name: s, line });
            }
        }
        if has_diff(&body) {
            return Err(CatalogError::invalid(line, "`diff` is not allowed in a structure function"));
        }
        self.sys.functions.push(StructureFunction { name, body });
        Ok(())
    }

    pub fn vanish(&mut self, a: String, b: String, line: usize) -> Result<(), CatalogError> {
        for op in [&a, &b] {
            if self.sys.generator(op).is_none() {
                return Err(CatalogError::UnboundName {
                    name: op.clone(),
                    line,
                });
            }
        }
        self.sys.vanishing.push((a, b));
        Ok(())
    }

    pub fn structure(&mut self, bracket: String, rhs: Formal, line: usize) -> Result<(), CatalogError> {
        if self.sys.named_bracket(&bracket).is_none() {
            return Err(CatalogError::UnboundName { name: bracket, line });
        }
        self.check_formal(&rhs, line)?;
        if rhs.contains_bracket() {
            return Err(CatalogError::invalid(line, "structure claims are polynomials in generators"));
        }
        self.sys.structures.push(StructureClaim { bracket, rhs });
        Ok(())
    }

    pub fn relation(&mut self, label: Option<String>, sides: Vec<Formal>, line: usize) -> Result<(), CatalogError> {
        for s in &sides {
            self.check_formal(s, line)?;
        }
        let last = sides.len() - 1;
        for s in &sides[..last] {
            self.sys.relations.push(Relation {
                label: label.clone(),
                lhs: s.clone(),
                rhs: sides[last].clone(),
            });
        }
        Ok(())
    }

    pub fn variant(
        &mut self,
        generator: String,
        label: String,
        extra_params: Vec<String>,
        body: &Formal,
        line: usize,
    ) -> Result<(), CatalogError> {
        if self.sys.generator(&generator).is_none() {
            return Err(CatalogError::UnboundName { name: generator, line });
        }
        for p in &extra_params {
            self.fresh(p, line)?;
        }
        let mut ps = self.sys.parameters.clone();
        ps.extend(extra_params.iter().cloned());
        let vars = VarTable::phase_space(&ps)?;
        let expr = evaluate(body, &PhaseEnv::new(&vars)).map_err(|e| lift(e, line))?;
        self.sys.variants.push(Variant {
            generator,
            label,
            extra_params,
            expr,
        });
        Ok(())
    }

    /// Names in relations must be generators, bracket names, functions or
    /// parameters; `diff` needs a function and a generator.
    fn check_formal(&self, f: &Formal, line: usize) -> Result<(), CatalogError> {
        let mut bad = None;
        walk(f, &mut |node| match node {
            Formal::Sym(s) => {
                let ok = self.sys.generator(s).is_some()
                    || self.sys.named_bracket(s).is_some()
                    || self.sys.function(s).is_some()
                    || self.sys.parameters.contains(s);
                if !ok && bad.is_none() {
                    bad = Some(s.clone());
                }
            }
            Formal::Diff(func, x) => {
                for (n, ok) in [
                    (func, self.sys.function(func).is_some()),
                    (x, self.sys.generator(x).is_some()),
                ] {
                    if !ok && bad.is_none() {
                        bad = Some(n.clone());
                    }
                }
            }
            _ => {}
        });
        match bad {
            Some(name) => Err(CatalogError::UnboundName { name, line }),
            None => Ok(()),
        }
    }

    pub fn finish(self) -> Result<SystemDefinition, CatalogError> {
        if self.sys.generator("H").is_none() {
            return Err(CatalogError::MissingHamiltonian);
        }
        Ok(self.sys)
    }
}

fn has_diff(f: &Formal) -> bool {
    let mut found = false;
    walk(f, &mut |n| {
        if matches!(n, Formal::Diff(..)) {
            found = true;
        }
    });
    found
}

/// Pre-order traversal.
pub fn walk(f: &Formal, visit: &mut dyn FnMut(&Formal)) {
    visit(f);
    match f {
        Formal::Num(_) | Formal::Sym(_) | Formal::Diff(..) => {}
        Formal::Neg(a) | Formal::Pow(a, _) => walk(a, visit),
        Formal::Add(a, b)
        | Formal::Sub(a, b)
        | Formal::Mul(a, b)
        | Formal::Div(a, b)
        | Formal::Bracket(a, b) => {
            walk(a, visit);
            walk(b, visit);
        }
    }
}
