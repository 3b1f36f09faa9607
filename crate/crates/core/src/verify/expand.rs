//! Expansion of formal relations to phase-space rational functions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::algebra::{GaussianRational, PolyExpr, RatExpr, VarId, VarTable};
use crate::bracket::{bracket, BracketConvention};
use crate::catalog::{evaluate, Formal, FormalEnv, FormalError, SystemDefinition};

use super::VerifyError;

/// Optional persistent memo for bracket expansions. Keys are opaque
/// strings that already include a fingerprint of the system and
/// convention; values are canonical expression text.
pub trait MemoStore: Send + Sync {
    fn get(&self, key: &str) -> Option<String>;
    fn put(&self, key: &str, value: &str);
}

/// Generator-space environment: generators and parameters are formal
/// variables, functions are their polynomial bodies.
struct GenEnv<'a> {
    vars: &'a VarTable,
    functions: &'a HashMap<String, PolyExpr>,
}

impl FormalEnv for GenEnv<'_> {
    fn symbol(&self, name: &str) -> Option<RatExpr> {
        if let Some(v) = self.vars.lookup(name) {
            return Some(RatExpr::var(v));
        }
        self.functions.get(name).map(|p| RatExpr::from(p.clone()))
    }

    fn bracket(&self, _: &RatExpr, _: &RatExpr) -> Option<RatExpr> {
        None
    }

    fn diff(&self, _: &str, _: &str) -> Option<RatExpr> {
        None
    }
}

/// Evaluation context for one system under one convention.
pub struct Expander<'a> {
    pub sys: &'a SystemDefinition,
    pub conv: BracketConvention,
    /// Phase-space value of each generator, in declaration order.
    images: Vec<RatExpr>,
    /// Value of each parameter: itself, or a constant in fast mode.
    params: Vec<RatExpr>,
    gen_vars: VarTable,
    functions: HashMap<String, PolyExpr>,
    cache: Mutex<HashMap<String, RatExpr>>,
    store: Option<(Arc<dyn MemoStore>, String)>,
}

impl<'a> Expander<'a> {
    pub fn new(sys: &'a SystemDefinition, conv: BracketConvention) -> Result<Self, VerifyError> {
        let params = sys
            .vars
            .parameters()
            .into_iter()
            .map(RatExpr::var)
            .collect();
        Self::build(sys, conv, params)
    }

    /// Like [`Expander::new`] with every parameter fixed to a value.
    pub fn specialized(
        sys: &'a SystemDefinition,
        conv: BracketConvention,
        values: &[GaussianRational],
    ) -> Result<Self, VerifyError> {
        let params = values.iter().map(|c| RatExpr::constant(c.clone())).collect();
        Self::build(sys, conv, params)
    }

    fn build(sys: &'a SystemDefinition, conv: BracketConvention, params: Vec<RatExpr>) -> Result<Self, VerifyError> {
        let gen_vars = sys.generator_vars();
        let mut substitution: Vec<PolyExpr> = VarId::PHASE_SPACE.iter().map(|v| PolyExpr::var(*v)).collect();
        let specialized = params.iter().any(|p: &RatExpr| p.as_constant().is_some());
        for p in &params {
            substitution.push(p.num().clone());
        }
        let mut images = Vec::with_capacity(sys.generators.len());
        for g in &sys.generators {
            let mut e = if g.name == "H" {
                conv.adjust_hamiltonian(&g.expr)
            } else {
                g.expr.clone()
            };
            if specialized {
                e = e.substitute(&substitution).map_err(|_| VerifyError::Singular(g.name.clone()))?;
            }
            images.push(e);
        }
        let mut functions = HashMap::new();
        for f in &sys.functions {
            let p = gen_poly(&f.body, &gen_vars, &functions).map_err(|e| VerifyError::in_function(&f.name, e))?;
            functions.insert(f.name.clone(), p);
        }
        for c in &sys.structures {
            let p = gen_poly(&c.rhs, &gen_vars, &functions).map_err(|e| VerifyError::in_function(&c.bracket, e))?;
            functions.insert(claim_function(&c.bracket), p);
        }
        Ok(Expander {
            sys,
            conv,
            images,
            params,
            gen_vars,
            functions,
            cache: Mutex::new(HashMap::new()),
            store: None,
        })
    }

    /// Attach a persistent memo; `fingerprint` must identify the system
    /// definition and parameter specialization.
    pub fn with_store(mut self, store: Arc<dyn MemoStore>, fingerprint: String) -> Self {
        self.store = Some((store, format!("{fingerprint}|{}", self.conv)));
        self
    }

    pub fn generator_vars(&self) -> &VarTable {
        &self.gen_vars
    }

    pub fn image(&self, name: &str) -> Option<&RatExpr> {
        let k = self.sys.generators.iter().position(|g| g.name == name)?;
        Some(&self.images[k])
    }

    pub fn images(&self) -> &[RatExpr] {
        &self.images
    }

    /// Register a generator-space polynomial under `name` so that
    /// `diff(name, X)` and the symbol `name` resolve to it.
    pub fn define_function(&mut self, name: &str, body: PolyExpr) {
        self.functions.insert(name.to_string(), body);
    }

    pub fn function_poly(&self, name: &str) -> Option<&PolyExpr> {
        self.functions.get(name)
    }

    /// A formal polynomial over generators and parameters.
    pub fn generator_polynomial(&self, f: &Formal) -> Result<PolyExpr, VerifyError> {
        gen_poly(f, &self.gen_vars, &self.functions)
    }

    pub fn expand(&self, f: &Formal) -> Result<RatExpr, VerifyError> {
        evaluate(f, self).map_err(VerifyError::from)
    }

    /// Substitute phase-space images into a generator-space polynomial.
    pub fn realize(&self, p: &PolyExpr) -> RatExpr {
        let ngen = self.images.len();
        let mut powers: HashMap<(u8, u16), RatExpr> = HashMap::new();
        let mut acc = RatExpr::zero();
        for (m, c) in p.terms() {
            let mut t = RatExpr::constant(c.clone());
            for (v, e) in m.factors() {
                let f = powers
                    .entry((v.0, e))
                    .or_insert_with(|| {
                        let base = if v.index() < ngen {
                            &self.images[v.index()]
                        } else {
                            &self.params[v.index() - ngen]
                        };
                        base.pow(e as i32).expect("nonnegative power")
                    })
                    .clone();
                t = t.mul(&f);
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// `∂F/∂X` taken in generator space, then realized.
    pub fn formal_derivative(&self, func: &str, wrt: &str) -> Option<PolyExpr> {
        let p = self.functions.get(func)?;
        let v = self.gen_vars.lookup(wrt)?;
        if v.index() >= self.images.len() {
            return None;
        }
        Some(p.derivative(v))
    }

    fn cached(&self, key: &str, compute: impl FnOnce() -> Result<RatExpr, FormalError>) -> Result<RatExpr, FormalError> {
        if let Some(v) = self.cache.lock().expect("cache lock").get(key) {
            return Ok(v.clone());
        }
        let v = match self.load(key) {
            Some(v) => v,
            None => {
                let v = compute()?;
                self.save(key, &v);
                v
            }
        };
        self.cache.lock().expect("cache lock").insert(key.to_string(), v.clone());
        Ok(v)
    }

    fn load(&self, key: &str) -> Option<RatExpr> {
        let (store, prefix) = self.store.as_ref()?;
        let text = store.get(&format!("{prefix}|{key}"))?;
        let f = crate::catalog::parse_expression(&text).ok()?;
        evaluate(&f, &crate::catalog::PhaseEnv::new(&self.sys.vars)).ok()
    }

    fn save(&self, key: &str, v: &RatExpr) {
        if let Some((store, prefix)) = &self.store {
            store.put(&format!("{prefix}|{key}"), &v.display(&self.sys.vars).to_string());
        }
    }
}

/// Name under which the right side of `BRACKET^2 = 2*(RHS)` is registered.
pub fn claim_function(bracket: &str) -> String {
    format!("claim:{bracket}")
}

fn gen_poly(f: &Formal, vars: &VarTable, functions: &HashMap<String, PolyExpr>) -> Result<PolyExpr, VerifyError> {
    let e = evaluate(f, &GenEnv { vars, functions })?;
    if !e.is_polynomial() {
        return Err(VerifyError::NotPolynomial(f.to_string()));
    }
    Ok(e.num().clone())
}

impl FormalEnv for Expander<'_> {
    fn symbol(&self, name: &str) -> Option<RatExpr> {
        if let Some(e) = self.image(name) {
            return Some(e.clone());
        }
        if let Some(b) = self.sys.named_bracket(name) {
            return self
                .bracket_formal(&Formal::sym(&b.left), &Formal::sym(&b.right))
                .and_then(Result::ok);
        }
        if let Some(p) = self.functions.get(name) {
            return Some(self.realize(p));
        }
        let k = self.sys.parameters.iter().position(|p| p == name)?;
        Some(self.params[k].clone())
    }

    fn bracket(&self, a: &RatExpr, b: &RatExpr) -> Option<RatExpr> {
        Some(bracket(a, b, self.conv))
    }

    fn diff(&self, func: &str, wrt: &str) -> Option<RatExpr> {
        let key = format!("diff({func}, {wrt})");
        self.cached(&key, || {
            let d = self
                .formal_derivative(func, wrt)
                .ok_or_else(|| FormalError::BadDiff(func.to_string(), wrt.to_string()))?;
            Ok(self.realize(&d))
        })
        .ok()
    }

    fn bracket_formal(&self, a: &Formal, b: &Formal) -> Option<Result<RatExpr, FormalError>> {
        let key = Formal::bracket(a.clone(), b.clone()).to_string();
        Some(self.cached(&key, || {
            let (x, y) = (evaluate(a, self)?, evaluate(b, self)?);
            Ok(bracket(&x, &y, self.conv))
        }))
    }
}
