use std::path::Path;
use std::process::{Command, Output};

use poisson_verify_core::catalog::parse_system;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poisson-verify"))
        .args(args)
        .env_remove("POISSON_VERIFY_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn validator() -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&schema).unwrap()
}

fn assert_valid(text: &str) {
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    let schema = validator();
    let msgs: Vec<String> = match schema.validate(&v) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "schema violations:\n{}", msgs.join("\n"));
}

const FREE: &str = "system Free
generator H = p_x^2 + p_y^2 + p_z^2
generator P1 = p_x
generator P2 = p_y
generator L = J_z
relation \"sign\": {L, P1} = -P2
";

#[test]
fn commutation_only_confirms_the_diagram() {
    let o = run(&["verify", "V_I", "--only", "commutation"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("vanishing: (A1,A2) (A1,B2) (A2,B1) (B1,F) (B2,F)"), "{out}");
    assert!(out.contains("matches the claimed set"));
}

#[test]
fn missing_file_is_a_usage_error() {
    assert_eq!(code(&run(&["verify", "missing.sys"])), 2);
}

#[test]
fn malformed_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    for (k, text) in ["system X\ngenerator H = p_x^2 +\n", "generator H = 1\n", "system X\nparam a a\n", "\u{0}\u{1}"]
        .iter()
        .enumerate()
    {
        let p = dir.path().join(format!("bad{k}.sys"));
        std::fs::write(&p, text).unwrap();
        let o = run(&["verify", p.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{text:?}");
    }
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(code(&run(&["verify", "V_I", "--convention", "sideways"])), 2);
    assert_eq!(code(&run(&["verify", "V_I", "--only", "everything"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn json_is_deterministic_and_matches_schema() {
    let args = ["verify", "V_I", "--json", "--seed", "42"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    assert_valid(&stdout(&a));
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["system"], "V_I");
}

#[test]
fn other_reports_match_schema() {
    for args in [
        vec!["verify", "V_iv", "--json"],
        vec!["verify", "V_I", "--json", "--fast", "--seed", "7"],
        vec!["verify", "V_I", "--json", "--timings", "--only", "conservation,independence"],
        vec!["verify", "V_I", "--json", "--variant", "k x^2 read as delta x^2", "--only", "conservation"],
    ] {
        let o = run(&args);
        assert!(code(&o) <= 1, "{args:?}");
        assert_valid(&stdout(&o));
    }
}

#[test]
fn fast_mode_reports_probable() {
    let o = run(&["verify", "V_I", "--json", "--fast", "--only", "relations"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["mode"], "fast");
    assert_eq!(v["parameter_values"].as_array().unwrap().len(), 4);
    let statuses: Vec<&str> = v["relations"].as_array().unwrap().iter().map(|r| r["status"].as_str().unwrap()).collect();
    assert!(statuses.contains(&"probable"));
    assert!(!statuses.contains(&"verified"));
}

#[test]
fn refuted_claims_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("wrong.sys");
    std::fs::write(&p, FREE.replace("-P2", "P2 + P1")).unwrap();
    let o = run(&["verify", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("REFUTED"));
}

#[test]
fn alternate_convention_warns_unless_strict() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("free.sys");
    std::fs::write(&p, FREE).unwrap();
    let p = p.to_str().unwrap();
    let o = run(&["verify", p]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(code(&run(&["verify", p, "--strict-convention"])), 1);
    assert_eq!(code(&run(&["verify", p, "--convention", "neg"])), 0);
}

#[test]
fn fit_pair_and_closure() {
    let o = run(&["fit", "V_I", "--pair", "A1", "B1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("A1^2*B1: -16"), "{}", stdout(&o));
    let o = run(&["fit", "V_I", "--closure", "A1", "A1", "B1"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("fitted: 8*H*A1 - 8*A1^2 - 8*A1*A2 - 16*B1*delta"), "{out}");
}

#[test]
fn degenerate_fit_exits_one() {
    let o = run(&["fit", "V_I", "--pair", "A1", "A2"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("degenerate"));
}

#[test]
fn fit_rejects_unknown_generators() {
    assert_eq!(code(&run(&["fit", "V_I", "--pair", "A1", "Q"])), 2);
    assert_eq!(code(&run(&["fit", "V_I"])), 2);
}

#[test]
fn independence_summary() {
    let o = run(&["independence", "V_I"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("functional rank(H,A1,A2,B1,B2)=5; rank with F=5; linear: independent"));
}

#[test]
fn duplicated_function_gives_a_certificate() {
    let o = run(&["independence", "V_I", "--functions", "H,A1,A1"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("linear: dependent"), "{out}");
    assert!(out.contains("dependency: (1)*A1 + (-1)*A1 + (0) = 0"), "{out}");
}

#[test]
fn dynamics_real_and_complex() {
    let o = run(&["dynamics", "V_I", "--dt", "1e-3", "--horizon", "100"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 8);
    let o = run(&["dynamics", "V_II"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-real"));
    assert_eq!(code(&run(&["dynamics", "V_I", "--horizon", "1", "--tolerance", "1e-12"])), 1);
    assert_eq!(code(&run(&["dynamics", "V_I", "--dt", "0"])), 2);
    assert_eq!(code(&run(&["dynamics", "V_I", "--param", "kappa=1"])), 2);
}

#[test]
fn dynamics_csv_dump() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("out.csv");
    let o = run(&["dynamics", "V_iv", "--horizon", "0.5", "--dump", p.to_str().unwrap(), "--stride", "10"]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&p).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 1 + 51);
    assert!(rows.iter().all(|r| r.split(',').count() == 13));
}

#[test]
fn dynamics_json() {
    let o = run(&[
        "dynamics", "V_iv", "--json", "--horizon", "1", "--param", "beta=0", "--start", "0.5,1,1,0.1,-0.2,0.3",
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["parameters"]["beta"], 0.0);
    assert_eq!(v["drift"].as_array().unwrap().len(), 6);
    assert_eq!(v["start"]["p"][1], -0.2);
}

#[test]
fn list_and_dump() {
    let o = run(&["list"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 7);
    for name in ["V_I", "V_vii"] {
        let o = run(&["dump", name]);
        assert_eq!(code(&o), 0);
        let sys = parse_system(&stdout(&o)).unwrap();
        assert_eq!(sys.name, name);
    }
    assert_eq!(code(&run(&["dump", "V_x"])), 2);
}

#[test]
fn cache_directory_reproduces_results() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "V_iv", "--json", "--only", "relations"];
    let plain = run(&args);
    let with_cache = |_: ()| {
        Command::new(env!("CARGO_BIN_EXE_poisson-verify"))
            .args(args)
            .env("POISSON_VERIFY_CACHE", dir.path())
            .output()
            .unwrap()
    };
    let first = with_cache(());
    let second = with_cache(());
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
    assert_eq!(plain.stdout, first.stdout);
    assert_eq!(first.stdout, second.stdout);
}
