use std::collections::BTreeMap;

use num_traits::Zero;
use poisson_verify_core::catalog::{builtin_system, BUILTIN_NAMES};
use poisson_verify_core::dynamics::*;
use poisson_verify_core::{GaussianRational, RatExpr, VarId};
use proptest::prelude::*;

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn v_i_unit() -> BTreeMap<String, f64> {
    params(&[("delta", 1.0), ("alpha1", 1.0), ("alpha2", 1.0), ("alpha3", 1.0)])
}

#[test]
fn v_i_hamiltonian_at_unit_point() {
    let sys = builtin_system("V_I").unwrap();
    let f = compile_numeric(sys.hamiltonian(), &sys.vars, &v_i_unit()).unwrap();
    let v = f.eval(&PhasePoint::new([1.0, 1.0, 1.0], [0.0; 3]));
    assert!((v - 6.0).abs() < 1e-12, "{v}");
}

#[test]
fn complex_system_is_rejected() {
    let sys = builtin_system("V_II").unwrap();
    let p = reference_parameters(&sys);
    assert!(matches!(NumericSystem::new(&sys, &p), Err(DynamicsError::ComplexResidue(_))));
}

#[test]
fn constant_compiles_to_constant() {
    let sys = builtin_system("V_I").unwrap();
    let c = RatExpr::constant(GaussianRational::from_ratio(3, 2));
    let f = compile_numeric(&c, &sys.vars, &v_i_unit()).unwrap();
    for q in [[1.0, 2.0, 3.0], [-0.5, 0.1, 7.0]] {
        assert_eq!(f.eval(&PhasePoint::new(q, [0.2, 0.3, 0.4])), 1.5);
    }
}

#[test]
fn parameter_errors() {
    let sys = builtin_system("V_I").unwrap();
    let mut p = v_i_unit();
    p.remove("alpha2");
    assert_eq!(NumericSystem::new(&sys, &p).unwrap_err(), DynamicsError::MissingParameter("alpha2".into()));
    let mut p = v_i_unit();
    p.insert("kappa".into(), 1.0);
    assert_eq!(NumericSystem::new(&sys, &p).unwrap_err(), DynamicsError::UnknownParameter("kappa".into()));
}

#[test]
fn zero_step_is_invalid() {
    let sys = builtin_system("V_I").unwrap();
    let r = integrate(&sys, &v_i_unit(), REFERENCE_START, 0.0, 1.0);
    assert!(matches!(r, Err(DynamicsError::InvalidStep { .. })));
}

#[test]
fn harmonic_limit_has_period_pi() {
    // H = |p|^2 + |q|^2 gives q'' = -4q.
    let sys = builtin_system("V_I").unwrap();
    let p = params(&[("delta", 1.0), ("alpha1", 0.0), ("alpha2", 0.0), ("alpha3", 0.0)]);
    let ns = NumericSystem::new(&sys, &p).unwrap();
    assert_eq!(ns.kinetic_coefficient(), 1.0);
    let start = PhasePoint::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
    let dt = 1e-4;
    let samples = ns.integrate(start, dt, std::f64::consts::PI, 1).unwrap();
    for s in samples.iter().step_by(997) {
        let (x, y) = ((2.0 * s.t).cos(), (2.0 * s.t).sin());
        assert!((s.point.q[0] - x).abs() < 1e-6, "x at {}", s.t);
        assert!((s.point.q[1] - y).abs() < 1e-6, "y at {}", s.t);
    }
    let end = samples.last().unwrap();
    assert!((end.t - std::f64::consts::PI).abs() < dt);
    assert!((end.point.q[0] - (2.0 * end.t).cos()).abs() < 1e-6);
    assert!((end.point.q[1] - (2.0 * end.t).sin()).abs() < 1e-6);
}

#[test]
fn free_flight_conserves_everything() {
    let sys = builtin_system("V_iv").unwrap();
    let p = params(&[("alpha", 0.0), ("beta", 0.0), ("gamma", 0.0), ("delta", 0.0)]);
    let start = PhasePoint::new([0.5, 1.0, 1.0], [0.1, 0.3, 0.05]);
    for r in conservation_drift(&sys, &p, start, 1e-2, 10.0).unwrap() {
        assert!(r.drift < 1e-12, "{}: {}", r.integral, r.drift);
    }
}

#[test]
fn singular_approach_aborts() {
    // An attractive delta/z^2 pulls the particle into the plane z = 0.
    let sys = builtin_system("V_iv").unwrap();
    let p = params(&[("alpha", 0.0), ("beta", 0.0), ("gamma", 1.0), ("delta", -1.0)]);
    let start = PhasePoint::new([0.5, 1.0, 1.0], [0.0, 0.0, -1.0]);
    let r = integrate(&sys, &p, start, 1e-3, 5.0);
    assert!(matches!(r, Err(DynamicsError::SingularityApproach { .. })), "{:?}", r.map(|s| s.len()));
    let bad = PhasePoint::new([0.5, 1.0, 1e-4], [0.0; 3]);
    assert!(matches!(integrate(&sys, &p, bad, 1e-3, 1.0), Err(DynamicsError::SingularStart { .. })));
}

#[test]
fn time_reversal() {
    for name in ["V_I", "V_iv"] {
        let sys = builtin_system(name).unwrap();
        let ns = NumericSystem::new(&sys, &reference_parameters(&sys)).unwrap();
        let mid = ns.run(REFERENCE_START, 1e-3, 1.0, |_, _| {}).unwrap();
        let back = PhasePoint::new(mid.q, mid.p.map(|v| -v));
        let end = ns.run(back, 1e-3, 1.0, |_, _| {}).unwrap();
        for k in 0..3 {
            assert!((end.q[k] - REFERENCE_START.q[k]).abs() < 1e-8, "{name}");
            assert!((end.p[k] + REFERENCE_START.p[k]).abs() < 1e-8, "{name}");
        }
    }
}

#[test]
fn second_order_convergence() {
    for name in ["V_I", "V_iv"] {
        let sys = builtin_system(name).unwrap();
        let ns = NumericSystem::new(&sys, &reference_parameters(&sys)).unwrap();
        let study = convergence_study(&ns, REFERENCE_START, 4e-3, 10.0, 3).unwrap();
        for row in &study.ratios {
            for (r, rep) in row.iter().zip(&study.levels[0]) {
                assert!((3.0..=5.0).contains(r), "{name} {}: ratio {r}", rep.integral);
            }
        }
    }
}

#[test]
fn corrupted_integral_drifts() {
    let sys = builtin_system("V_I").unwrap();
    let mut ns = NumericSystem::new(&sys, &reference_parameters(&sys)).unwrap();
    let bad = sys.generator("B1").unwrap().expr.add(&RatExpr::var(VarId::X));
    ns.push_integral("B1 + x", &bad).unwrap();
    let d = ns.drift(REFERENCE_START, 1e-3, 10.0).unwrap();
    assert!(d.last().unwrap().drift > 1e-2);
}

#[test]
fn csv_has_time_phase_and_integral_columns() {
    let sys = builtin_system("V_iv").unwrap();
    let ns = NumericSystem::new(&sys, &reference_parameters(&sys)).unwrap();
    let samples = ns.integrate(REFERENCE_START, 1e-2, 0.1, 1).unwrap();
    let mut out = Vec::new();
    ns.write_csv(&samples, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x,y,z,p_x,p_y,p_z,H,A1,A2,B1,B2,F");
    assert_eq!(lines.len(), 12);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 13));
}

#[test]
fn only_real_builtins_are_numeric() {
    for name in BUILTIN_NAMES {
        let sys = builtin_system(name).unwrap();
        let ok = NumericSystem::new(&sys, &reference_parameters(&sys)).is_ok();
        assert_eq!(ok, name == "V_I" || name == "V_iv", "{name}");
    }
}

fn exact_point(q: [(i64, i64); 3], p: [(i64, i64); 3], params: &[GaussianRational]) -> Vec<GaussianRational> {
    q.iter()
        .chain(&p)
        .map(|(n, d)| GaussianRational::from_ratio(*n, *d))
        .chain(params.iter().cloned())
        .collect()
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn compiled_matches_exact(
        sys_k in 0usize..2,
        q in prop::array::uniform3((1i64..40, 1i64..8)),
        p in prop::array::uniform3((-30i64..30, 1i64..8)),
        signs in prop::array::uniform3(any::<bool>()),
    ) {
        let name = ["V_I", "V_iv"][sys_k];
        let sys = builtin_system(name).unwrap();
        let vals = reference_parameters(&sys);
        let exact_params: Vec<GaussianRational> = sys
            .parameters
            .iter()
            .map(|n| {
                let r = num_rational::BigRational::from_float(vals[n]).unwrap();
                GaussianRational::new(r, num_rational::BigRational::zero())
            })
            .collect();
        let q = [0, 1, 2].map(|k| if signs[k] { (-q[k].0, q[k].1) } else { q[k] });
        let point = exact_point(q, p, &exact_params);
        let fp = PhasePoint::new(
            q.map(|(n, d)| n as f64 / d as f64),
            p.map(|(n, d)| n as f64 / d as f64),
        );
        for g in &sys.generators {
            let exact = g.expr.eval(&point).unwrap().to_f64_pair().0;
            let num = compile_numeric(&g.expr, &sys.vars, &vals).unwrap().eval(&fp);
            prop_assert!(rel_close(exact, num), "{name} {}: {exact} vs {num}", g.name);
        }
    }
}
