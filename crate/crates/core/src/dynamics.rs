//! Floating-point trajectories of real systems, used to cross-check that
//! the listed integrals are conserved along the flow of `H`.
//!
//! `H` must have the form `c*(p_x^2 + p_y^2 + p_z^2) + V(x, y, z)`. The
//! flow is `q' = 2c*p`, `p' = -grad V`, integrated by velocity Verlet.

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::algebra::{GaussianRational, PolyExpr, RatExpr, VarId, VarTable};
use crate::catalog::SystemDefinition;

/// Default distance every denominator factor must keep from zero.
pub const DEFAULT_MARGIN: f64 = 1e-3;

/// Floor of the relative drift denominator.
pub const DRIFT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("`{0}` has a non-real coefficient after parameter substitution")]
    ComplexResidue(String),
    #[error("missing value for parameter `{0}`")]
    MissingParameter(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{0}` is not a finite number")]
    NonFiniteParameter(String),
    #[error("the parameter values make `{0}` singular")]
    Singular(String),
    #[error("invalid step: dt = {dt}, horizon = {horizon}")]
    InvalidStep { dt: f64, horizon: f64 },
    #[error("H is not of the form c*|p|^2 + V(q)")]
    NotSeparable,
    #[error("trajectory came within {margin} of a singular set at t = {t}")]
    SingularityApproach { t: f64, margin: f64 },
    #[error("start point is within {margin} of a singular set")]
    SingularStart { margin: f64 },
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub q: [f64; 3],
    pub p: [f64; 3],
}

impl PhasePoint {
    pub fn new(q: [f64; 3], p: [f64; 3]) -> Self {
        PhasePoint { q, p }
    }

    pub fn from_slice(v: &[f64; 6]) -> Self {
        PhasePoint {
            q: [v[0], v[1], v[2]],
            p: [v[3], v[4], v[5]],
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.q[0], self.q[1], self.q[2], self.p[0], self.p[1], self.p[2]]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone)]
struct CompiledPoly {
    /// Exponent of each phase variable, then the coefficient.
    terms: Vec<([u8; 6], f64)>,
    max_exp: [u8; 6],
}

impl CompiledPoly {
    fn new(p: &PolyExpr, name: &str) -> Result<Self, DynamicsError> {
        let mut terms = Vec::with_capacity(p.len());
        let mut max_exp = [0u8; 6];
        for (m, c) in p.terms() {
            if !c.im().is_zero() {
                return Err(DynamicsError::ComplexResidue(name.to_string()));
            }
            let mut exps = [0u8; 6];
            for (v, e) in m.factors() {
                let (k, e) = (v.index(), u8::try_from(e).map_err(|_| DynamicsError::Singular(name.to_string()))?);
                if k >= 6 {
                    return Err(DynamicsError::Singular(name.to_string()));
                }
                exps[k] = e;
                max_exp[k] = max_exp[k].max(e);
            }
            terms.push((exps, c.to_f64_pair().0));
        }
        Ok(CompiledPoly { terms, max_exp })
    }

    fn eval(&self, x: &[f64; 6]) -> f64 {
        let pows: [Vec<f64>; 6] = std::array::from_fn(|k| {
            let mut v = Vec::with_capacity(self.max_exp[k] as usize + 1);
            let mut acc = 1.0;
            for _ in 0..=self.max_exp[k] {
                v.push(acc);
                acc *= x[k];
            }
            v
        });
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = *c;
                for k in 0..6 {
                    if m[k] > 0 {
                        t *= pows[k][m[k] as usize];
                    }
                }
                t
            })
            .sum()
    }
}

/// A rational function of the phase-space coordinates with real
/// coefficients, evaluated in double precision.
#[derive(Debug, Clone)]
pub struct NumericFn {
    num: CompiledPoly,
    den: Vec<(CompiledPoly, i32)>,
}

impl NumericFn {
    pub fn eval(&self, point: &PhasePoint) -> f64 {
        let x = point.to_array();
        let mut v = self.num.eval(&x);
        for (f, e) in &self.den {
            v /= f.eval(&x).powi(*e);
        }
        v
    }
}

fn parameter_images(vars: &VarTable, params: &BTreeMap<String, f64>) -> Result<Vec<PolyExpr>, DynamicsError> {
    for name in params.keys() {
        if !vars.parameter_names().contains(&name.as_str()) {
            return Err(DynamicsError::UnknownParameter(name.clone()));
        }
    }
    vars.ids()
        .map(|v| {
            if v.index() < VarId::PHASE_SPACE.len() {
                return Ok(PolyExpr::var(v));
            }
            let name = vars.name(v);
            let value = *params
                .get(name)
                .ok_or_else(|| DynamicsError::MissingParameter(name.to_string()))?;
            let r = BigRational::from_float(value).ok_or_else(|| DynamicsError::NonFiniteParameter(name.to_string()))?;
            Ok(PolyExpr::constant(GaussianRational::new(r, BigRational::zero())))
        })
        .collect()
}

fn specialize(expr: &RatExpr, images: &[PolyExpr], name: &str) -> Result<RatExpr, DynamicsError> {
    let e = expr
        .substitute(images)
        .map_err(|_| DynamicsError::Singular(name.to_string()))?;
    if !e.is_real() {
        return Err(DynamicsError::ComplexResidue(name.to_string()));
    }
    Ok(e)
}

fn compile_specialized(e: &RatExpr, name: &str) -> Result<NumericFn, DynamicsError> {
    Ok(NumericFn {
        num: CompiledPoly::new(e.num(), name)?,
        den: e
            .den()
            .factors()
            .iter()
            .map(|(f, k)| Ok((CompiledPoly::new(f, name)?, *k as i32)))
            .collect::<Result<_, DynamicsError>>()?,
    })
}

/// Substitute parameter values into `expr` and compile it.
pub fn compile_numeric(
    expr: &RatExpr,
    vars: &VarTable,
    params: &BTreeMap<String, f64>,
) -> Result<NumericFn, DynamicsError> {
    let images = parameter_images(vars, params)?;
    let e = specialize(expr, &images, "expression")?;
    compile_specialized(&e, "expression")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub point: PhasePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub integral: String,
    pub initial: f64,
    /// `max_t |S(t) - S(0)| / max(|S(0)|, DRIFT_FLOOR)`.
    pub drift: f64,
    pub dt: f64,
    pub horizon: f64,
}

/// A system specialized to real parameter values.
#[derive(Debug, Clone)]
pub struct NumericSystem {
    pub name: String,
    /// `H` first, then the other generators and any added integrals.
    pub integrals: Vec<(String, NumericFn)>,
    kinetic: f64,
    grad_v: [NumericFn; 3],
    /// Denominator factors; each must stay above `margin` in size.
    guards: Vec<(PolyExpr, CompiledPoly)>,
    pub margin: f64,
    vars: VarTable,
    images: Vec<PolyExpr>,
}

impl NumericSystem {
    pub fn new(sys: &SystemDefinition, params: &BTreeMap<String, f64>) -> Result<Self, DynamicsError> {
        let images = parameter_images(&sys.vars, params)?;
        let h = specialize(sys.hamiltonian(), &images, "H")?;
        let kinetic = separable_kinetic(&h).ok_or(DynamicsError::NotSeparable)?;
        let grad_v = [VarId::X, VarId::Y, VarId::Z].map(|v| h.derivative(v));
        let grad_v = [
            compile_specialized(&grad_v[0], "H")?,
            compile_specialized(&grad_v[1], "H")?,
            compile_specialized(&grad_v[2], "H")?,
        ];
        let mut out = NumericSystem {
            name: sys.name.clone(),
            integrals: Vec::new(),
            kinetic,
            grad_v,
            guards: Vec::new(),
            margin: DEFAULT_MARGIN,
            vars: sys.vars.clone(),
            images,
        };
        out.push_integral("H", sys.hamiltonian())?;
        for g in sys.generators.iter().filter(|g| g.name != "H") {
            out.push_integral(&g.name, &g.expr)?;
        }
        Ok(out)
    }

    /// Track an extra function of phase space, e.g. a deliberately
    /// corrupted integral.
    pub fn push_integral(&mut self, name: &str, expr: &RatExpr) -> Result<(), DynamicsError> {
        let e = specialize(expr, &self.images, name)?;
        for (f, _) in e.den().factors() {
            if !self.guards.iter().any(|(g, _)| g == f.as_ref()) {
                self.guards.push((f.as_ref().clone(), CompiledPoly::new(f, name)?));
            }
        }
        self.integrals.push((name.to_string(), compile_specialized(&e, name)?));
        Ok(())
    }

    pub fn vars(&self) -> &VarTable {
        &self.vars
    }

    /// `c` in `H = c*|p|^2 + V(q)`.
    pub fn kinetic_coefficient(&self) -> f64 {
        self.kinetic
    }

    fn guard_values(&self, point: &PhasePoint) -> Vec<f64> {
        let x = point.to_array();
        self.guards.iter().map(|(_, g)| g.eval(&x)).collect()
    }

    fn safe(&self, values: &[f64]) -> bool {
        values.iter().all(|v| v.abs() > self.margin)
    }

    fn force(&self, point: &PhasePoint) -> [f64; 3] {
        [0, 1, 2].map(|k| -self.grad_v[k].eval(point))
    }

    /// Drive the integrator, calling `observe` at `t = 0` and after every
    /// step.
    pub fn run(
        &self,
        start: PhasePoint,
        dt: f64,
        horizon: f64,
        mut observe: impl FnMut(f64, &PhasePoint),
    ) -> Result<PhasePoint, DynamicsError> {
        let steps = step_count(dt, horizon)?;
        let mut guard = self.guard_values(&start);
        if !self.safe(&guard) {
            return Err(DynamicsError::SingularStart { margin: self.margin });
        }
        let mut s = start;
        let mut f = self.force(&s);
        observe(0.0, &s);
        let speed = 2.0 * self.kinetic;
        for n in 1..=steps {
            let t = n as f64 * dt;
            for k in 0..3 {
                s.p[k] += 0.5 * dt * f[k];
                s.q[k] += dt * speed * s.p[k];
            }
            // A sign change means a step jumped across a singular set.
            let next = self.guard_values(&s);
            let crossed = next.iter().zip(&guard).any(|(a, b)| a.signum() != b.signum());
            if crossed || !self.safe(&next) {
                return Err(DynamicsError::SingularityApproach { t, margin: self.margin });
            }
            guard = next;
            f = self.force(&s);
            for k in 0..3 {
                s.p[k] += 0.5 * dt * f[k];
            }
            if !s.is_finite() {
                return Err(DynamicsError::NonFinite(t));
            }
            observe(t, &s);
        }
        Ok(s)
    }

    /// Every `stride`-th state, starting with the initial one.
    pub fn integrate(&self, start: PhasePoint, dt: f64, horizon: f64, stride: usize) -> Result<Vec<Sample>, DynamicsError> {
        let stride = stride.max(1);
        let mut out = Vec::new();
        let mut n = 0usize;
        self.run(start, dt, horizon, |t, p| {
            if n % stride == 0 {
                out.push(Sample { t, point: *p });
            }
            n += 1;
        })?;
        Ok(out)
    }

    /// Relative drift of every tracked integral, measured after each step.
    pub fn drift(&self, start: PhasePoint, dt: f64, horizon: f64) -> Result<Vec<DriftReport>, DynamicsError> {
        let initial: Vec<f64> = self.integrals.iter().map(|(_, f)| f.eval(&start)).collect();
        let mut worst = vec![0.0f64; initial.len()];
        self.run(start, dt, horizon, |_, p| {
            for (k, (_, f)) in self.integrals.iter().enumerate() {
                let d = (f.eval(p) - initial[k]).abs();
                if d > worst[k] || d.is_nan() {
                    worst[k] = d;
                }
            }
        })?;
        Ok(self
            .integrals
            .iter()
            .zip(initial.iter().zip(worst))
            .map(|((name, _), (s0, w))| DriftReport {
                integral: name.clone(),
                initial: *s0,
                drift: w / s0.abs().max(DRIFT_FLOOR),
                dt,
                horizon,
            })
            .collect())
    }

    /// Write `t, x, y, z, p_x, p_y, p_z` and every tracked integral, one
    /// row per sample.
    pub fn write_csv<W: Write>(&self, samples: &[Sample], mut out: W) -> io::Result<()> {
        let mut header: Vec<&str> = vec!["t"];
        header.extend(VarTable::PHASE_NAMES);
        header.extend(self.integrals.iter().map(|(n, _)| n.as_str()));
        writeln!(out, "{}", header.join(","))?;
        for s in samples {
            let mut row = vec![s.t];
            row.extend(s.point.to_array());
            row.extend(self.integrals.iter().map(|(_, f)| f.eval(&s.point)));
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn step_count(dt: f64, horizon: f64) -> Result<usize, DynamicsError> {
    let bad = || DynamicsError::InvalidStep { dt, horizon };
    if !(dt.is_finite() && dt > 0.0 && horizon.is_finite() && horizon >= 0.0) {
        return Err(bad());
    }
    let n = (horizon / dt).round();
    if n > 1e9 {
        return Err(bad());
    }
    Ok(n as usize)
}

/// `c` such that `h - c*(p_x^2 + p_y^2 + p_z^2)` is free of momenta.
fn separable_kinetic(h: &RatExpr) -> Option<f64> {
    let momenta = [VarId::PX, VarId::PY, VarId::PZ];
    // `h` is already specialized, so only phase-space slots occur.
    let images: Vec<PolyExpr> = VarId::PHASE_SPACE
        .iter()
        .map(|v| if momenta.contains(v) { PolyExpr::zero() } else { PolyExpr::var(*v) })
        .collect();
    let kinetic = h.sub(&h.substitute(&images).ok()?);
    let c = kinetic.derivative(VarId::PX).derivative(VarId::PX).as_constant()?;
    let c = &c * &GaussianRational::from_ratio(1, 2);
    let expected = RatExpr::from(crate::bracket::kinetic_energy()).scale(&c);
    if !kinetic.sub(&expected).is_zero() {
        return None;
    }
    let (re, im) = c.to_f64_pair();
    (im == 0.0).then_some(re)
}

/// Drift at `dt, dt/2, dt/4, ...`; `ratios[k][j]` is the drift of integral
/// `j` at level `k` over level `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub levels: Vec<Vec<DriftReport>>,
    pub ratios: Vec<Vec<f64>>,
}

pub fn convergence_study(
    sys: &NumericSystem,
    start: PhasePoint,
    dt: f64,
    horizon: f64,
    levels: usize,
) -> Result<ConvergenceStudy, DynamicsError> {
    let runs: Vec<Vec<DriftReport>> = (0..levels)
        .map(|k| sys.drift(start, dt / f64::powi(2.0, k as i32), horizon))
        .collect::<Result<_, _>>()?;
    let ratios = runs
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| a.drift / b.drift).collect())
        .collect();
    Ok(ConvergenceStudy { levels: runs, ratios })
}

/// Trajectory samples of a real system from `start`.
pub fn integrate(
    sys: &SystemDefinition,
    params: &BTreeMap<String, f64>,
    start: PhasePoint,
    dt: f64,
    horizon: f64,
) -> Result<Vec<Sample>, DynamicsError> {
    NumericSystem::new(sys, params)?.integrate(start, dt, horizon, 1)
}

/// One drift report per generator, `H` first.
pub fn conservation_drift(
    sys: &SystemDefinition,
    params: &BTreeMap<String, f64>,
    start: PhasePoint,
    dt: f64,
    horizon: f64,
) -> Result<Vec<DriftReport>, DynamicsError> {
    NumericSystem::new(sys, params)?.drift(start, dt, horizon)
}

/// Generic parameter values used when none are given: `1, 3/10, 1/2,
/// 7/10, 11/10, 13/10, ...` in declaration order.
pub fn reference_parameters(sys: &SystemDefinition) -> BTreeMap<String, f64> {
    const VALUES: [f64; 8] = [1.0, 0.3, 0.5, 0.7, 1.1, 1.3, 1.7, 1.9];
    sys.parameters
        .iter()
        .enumerate()
        .map(|(k, p)| (p.clone(), VALUES[k % VALUES.len()]))
        .collect()
}

/// Default start point, away from the coordinate planes.
pub const REFERENCE_START: PhasePoint = PhasePoint {
    q: [0.9, 1.1, 0.8],
    p: [0.3, -0.2, 0.5],
};
