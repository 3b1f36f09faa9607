//! `poisson-verify`: exact checks of the quadratic Poisson algebras of
//! the built-in superintegrable systems, or of user-supplied system files.

mod render;
mod store;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use poisson_verify_core::catalog::{builtin_source, builtin_system, parse_system, Formal, SystemDefinition, BUILTIN_NAMES};
use poisson_verify_core::dynamics::{self, DriftReport, NumericSystem, PhasePoint, REFERENCE_START};
use poisson_verify_core::verify::{
    check_functional_independence, check_linear_independence, conservation, default_pair_basis, fit_expression,
    verify_system, FitError, FitResult, LinearReport, RankReport, Section, Session, StructureAnsatz, VerifyOptions,
};
use poisson_verify_core::BracketConvention;

const CACHE_ENV: &str = "POISSON_VERIFY_CACHE";

#[derive(Parser)]
#[command(name = "poisson-verify", version, about = "Exact verification of Poisson algebras of superintegrable systems")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Emit the machine-readable report.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Use this convention instead of searching for one.
    #[arg(long, global = true)]
    convention: Option<BracketConvention>,
    /// Treat identities that hold only under another convention as failures.
    #[arg(long, global = true)]
    strict_convention: bool,
    /// Specialize parameters to random integers; verdicts become "probable".
    #[arg(long, global = true)]
    fast: bool,
    /// Seconds after which remaining checks are reported as skipped.
    #[arg(long, global = true)]
    timeout: Option<f64>,
    /// Include wall-clock time in the output (breaks byte-identical reruns).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check conservation, commutation, structure functions and relations.
    Verify {
        system: String,
        /// Restrict to these sections.
        #[arg(long, value_delimiter = ',')]
        only: Vec<Section>,
        /// Replace a generator by one of its alternative readings.
        #[arg(long)]
        variant: Option<String>,
    },
    /// Fit a structure function or a closure as a polynomial in generators.
    Fit {
        system: String,
        /// Fit `{A, B}^2`, i.e. twice the structure function.
        #[arg(long, num_args = 2, value_names = ["A", "B"], conflicts_with = "closure", required_unless_present = "closure")]
        pair: Option<Vec<String>>,
        /// Fit `{I, {J, K}}`.
        #[arg(long, num_args = 3, value_names = ["I", "J", "K"])]
        closure: Option<Vec<String>>,
        /// Maximum degree in generators.
        #[arg(long)]
        generator_degree: Option<u32>,
        /// Maximum degree in parameters.
        #[arg(long, default_value_t = 3)]
        parameter_degree: u32,
        /// Generators allowed in the ansatz.
        #[arg(long, value_delimiter = ',')]
        basis: Vec<String>,
        #[arg(long)]
        variant: Option<String>,
    },
    /// Jacobian rank and linear independence of the generators.
    Independence {
        system: String,
        /// Functions to test instead of the generators.
        #[arg(long, value_delimiter = ',')]
        functions: Vec<String>,
        #[arg(long)]
        variant: Option<String>,
    },
    /// Integrate trajectories and measure the drift of every integral.
    Dynamics {
        system: String,
        /// Parameter value, `NAME=VALUE`; unset parameters take reference values.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        /// Start point `x,y,z,p_x,p_y,p_z`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "X,Y,Z,PX,PY,PZ")]
        start: Vec<f64>,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 100.0)]
        horizon: f64,
        /// Largest acceptable relative drift.
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
        /// Minimum distance from every singular plane.
        #[arg(long, default_value_t = dynamics::DEFAULT_MARGIN)]
        margin: f64,
        /// Write the trajectory as CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Keep every n-th step in the CSV.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        variant: Option<String>,
    },
    /// List the built-in systems.
    List,
    /// Print a built-in system in the system file format.
    Dump {
        system: String,
        /// Print the source text rather than the canonical form.
        #[arg(long)]
        source: bool,
    },
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Outcome of a command: report already written, exit status.
enum Failure {
    /// Refuted claims or exceeded tolerance.
    Refuted,
    /// Bad input.
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn load_system(reference: &str, variant: Option<&str>) -> Result<SystemDefinition, Failure> {
    let sys = if BUILTIN_NAMES.contains(&reference) {
        builtin_system(reference).map_err(usage)?
    } else {
        let path = Path::new(reference);
        let text = fs::read_to_string(path).map_err(|e| {
            Failure::Usage(format!("`{reference}` is neither a built-in system nor a readable file: {e}"))
        })?;
        parse_system(&text).map_err(|e| Failure::Usage(format!("{reference}: {e}")))?
    };
    match variant {
        Some(label) => sys.with_variant(label).map_err(usage),
        None => Ok(sys),
    }
}

fn options(g: &Global) -> Result<VerifyOptions, Failure> {
    let mut o = VerifyOptions {
        seed: g.seed,
        fast: g.fast,
        convention: g.convention,
        ..VerifyOptions::default()
    };
    if let Some(t) = g.timeout {
        let d = Duration::try_from_secs_f64(t).map_err(|e| Failure::Usage(format!("--timeout: {e}")))?;
        o.deadline = Some(Instant::now() + d);
    }
    if let Some(dir) = std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()) {
        match store::DirStore::open(&dir) {
            Ok(s) => o.store = Some(Arc::new(s)),
            Err(e) => eprintln!("warning: ignoring {CACHE_ENV}: {e}"),
        }
    }
    Ok(o)
}

fn emit_json<T: Serialize>(value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(usage)?;
    println!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct Timed<'a, T: Serialize> {
    #[serde(flatten)]
    report: &'a T,
    elapsed_ms: u128,
}

fn emit<T: Serialize>(g: &Global, value: &T, started: Instant, human: impl FnOnce(&T) -> String) -> Outcome {
    if g.json {
        if g.timings {
            emit_json(&Timed {
                report: value,
                elapsed_ms: started.elapsed().as_millis(),
            })
        } else {
            emit_json(value)
        }
    } else {
        print!("{}", human(value));
        if g.timings {
            println!("elapsed: {:.3} s", started.elapsed().as_secs_f64());
        }
        Ok(())
    }
}

fn cmd_verify(g: &Global, system: &str, only: &[Section], variant: Option<&str>) -> Outcome {
    let started = Instant::now();
    let sys = load_system(system, variant)?;
    let sections: Vec<Section> = if only.is_empty() { Section::ALL.to_vec() } else { only.to_vec() };
    let report = verify_system(&sys, options(g)?, &sections);
    emit(g, &report, started, render::verify)?;
    if !report.all_hold() {
        return Err(Failure::Refuted);
    }
    if report.used_alternate_convention() {
        if g.strict_convention {
            eprintln!("error: some identities hold only under another convention (--strict-convention)");
            return Err(Failure::Refuted);
        }
        eprintln!("warning: some identities hold only under another convention");
    }
    if report.partial {
        eprintln!("warning: timeout reached; the report is partial");
    }
    Ok(())
}

/// Session whose convention is the one that conserves every generator,
/// unless one was forced.
fn validated_session<'a>(sys: &'a SystemDefinition, g: &Global) -> Result<Session<'a>, Failure> {
    let mut session = Session::new(sys, options(g)?);
    if g.convention.is_none() {
        if let Some(c) = conservation(&session).validating() {
            session.set_convention(c);
        }
    }
    Ok(session)
}

fn check_generators(sys: &SystemDefinition, names: &[String]) -> Result<(), Failure> {
    match names.iter().find(|n| sys.generator(n).is_none()) {
        Some(n) => Err(Failure::Usage(format!("`{n}` is not a generator of {}", sys.name))),
        None => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    g: &Global,
    system: &str,
    pair: Option<&[String]>,
    closure: Option<&[String]>,
    generator_degree: Option<u32>,
    parameter_degree: u32,
    basis: &[String],
    variant: Option<&str>,
) -> Outcome {
    let started = Instant::now();
    let sys = load_system(system, variant)?;
    check_generators(&sys, basis)?;
    let sym = |s: &String| Formal::sym(s);
    let (target, mut ansatz) = match (pair, closure) {
        (Some([a, b]), _) => {
            check_generators(&sys, &[a.clone(), b.clone()])?;
            let t = Formal::Pow(Box::new(Formal::bracket(sym(a), sym(b))), 2);
            (t, StructureAnsatz::new(default_pair_basis(&sys, a, b)))
        }
        (_, Some([i, j, k])) => {
            check_generators(&sys, &[i.clone(), j.clone(), k.clone()])?;
            let t = Formal::bracket(sym(i), Formal::bracket(sym(j), sym(k)));
            (t, StructureAnsatz::closure(&sys))
        }
        _ => return Err(Failure::Usage("give --pair A B or --closure I J K".into())),
    };
    if !basis.is_empty() {
        ansatz.basis = basis.to_vec();
    }
    if let Some(d) = generator_degree {
        ansatz.max_generator_degree = d;
    }
    ansatz.max_parameter_degree = parameter_degree;
    let session = validated_session(&sys, g)?;
    match fit_expression(&session, &target, &ansatz) {
        Ok(fit) => emit(g, &fit, started, |f: &FitResult| render::fit(f, pair.is_some())),
        Err(e @ (FitError::NoSolution { .. } | FitError::Degenerate)) => {
            let report = FitFailure {
                target: target.to_string(),
                basis: ansatz.basis.clone(),
                error: e.to_string(),
            };
            emit(g, &report, started, |r| format!("{}: {}\n", r.target, r.error))?;
            Err(Failure::Refuted)
        }
        Err(e) => Err(usage(e)),
    }
}

#[derive(Serialize)]
struct FitFailure {
    target: String,
    basis: Vec<String>,
    error: String,
}

#[derive(Serialize)]
pub struct IndependenceReport {
    pub system: String,
    pub convention: String,
    pub seed: u64,
    /// Rank of every function but the last.
    pub core: RankReport,
    pub all: RankReport,
    pub linear: LinearReport,
}

fn cmd_independence(g: &Global, system: &str, functions: &[String], variant: Option<&str>) -> Outcome {
    let started = Instant::now();
    let sys = load_system(system, variant)?;
    let names: Vec<String> = if functions.is_empty() {
        sys.generators.iter().map(|g| g.name.clone()).collect()
    } else {
        functions.to_vec()
    };
    if names.len() < 2 {
        return Err(Failure::Usage("need at least two functions".into()));
    }
    let session = validated_session(&sys, g)?;
    let core = check_functional_independence(&session, &names[..names.len() - 1]).map_err(usage)?;
    let all = check_functional_independence(&session, &names).map_err(usage)?;
    let linear = check_linear_independence(&session, &names).map_err(usage)?;
    let report = IndependenceReport {
        system: sys.name.clone(),
        convention: session.convention().to_string(),
        seed: g.seed,
        core,
        all,
        linear,
    };
    emit(g, &report, started, render::independence)
}

#[derive(Serialize)]
pub struct DynamicsReport {
    pub system: String,
    pub parameters: BTreeMap<String, f64>,
    pub start: PhasePoint,
    pub dt: f64,
    pub horizon: f64,
    pub tolerance: f64,
    pub drift: Vec<DriftReport>,
    pub within_tolerance: bool,
}

struct DynamicsArgs<'a> {
    system: &'a str,
    params: &'a [(String, f64)],
    start: &'a [f64],
    dt: f64,
    horizon: f64,
    tolerance: f64,
    margin: f64,
    dump: Option<&'a Path>,
    stride: usize,
    variant: Option<&'a str>,
}

fn cmd_dynamics(g: &Global, a: DynamicsArgs<'_>) -> Outcome {
    let started = Instant::now();
    let sys = load_system(a.system, a.variant)?;
    let mut params = dynamics::reference_parameters(&sys);
    for (k, v) in a.params {
        if !params.contains_key(k) {
            return Err(Failure::Usage(format!("{} has no parameter `{k}`", sys.name)));
        }
        params.insert(k.clone(), *v);
    }
    let start = match a.start {
        [] => REFERENCE_START,
        [x, y, z, px, py, pz] => PhasePoint::new([*x, *y, *z], [*px, *py, *pz]),
        _ => return Err(Failure::Usage("--start takes six numbers".into())),
    };
    if !(a.tolerance >= 0.0) || !(a.margin >= 0.0) {
        return Err(Failure::Usage("--tolerance and --margin must be non-negative".into()));
    }
    let mut ns = NumericSystem::new(&sys, &params).map_err(usage)?;
    ns.margin = a.margin;
    let drift = ns.drift(start, a.dt, a.horizon).map_err(usage)?;
    if let Some(path) = a.dump {
        let samples = ns.integrate(start, a.dt, a.horizon, a.stride).map_err(usage)?;
        let file = fs::File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        ns.write_csv(&samples, std::io::BufWriter::new(file))
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    let within = drift.iter().all(|d| d.drift <= a.tolerance);
    let report = DynamicsReport {
        system: sys.name.clone(),
        parameters: params,
        start,
        dt: a.dt,
        horizon: a.horizon,
        tolerance: a.tolerance,
        drift,
        within_tolerance: within,
    };
    emit(g, &report, started, render::dynamics)?;
    if within {
        Ok(())
    } else {
        Err(Failure::Refuted)
    }
}

#[derive(Serialize)]
struct ListEntry {
    name: String,
    parameters: Vec<String>,
    generators: Vec<String>,
    relations: usize,
    variants: usize,
}

fn cmd_list(g: &Global) -> Outcome {
    let entries: Vec<ListEntry> = BUILTIN_NAMES
        .iter()
        .map(|n| {
            let s = builtin_system(n).map_err(usage)?;
            Ok(ListEntry {
                name: s.name.clone(),
                parameters: s.parameters.clone(),
                generators: s.generators.iter().map(|g| g.name.clone()).collect(),
                relations: s.relations.len() + s.structures.len(),
                variants: s.variants.len(),
            })
        })
        .collect::<Result<_, Failure>>()?;
    emit(g, &entries, Instant::now(), |es| render::list(es.iter().map(|e| (&e.name, &e.parameters, &e.generators, e.relations, e.variants))))
}

fn cmd_dump(system: &str, source: bool) -> Outcome {
    if source {
        print!("{}", builtin_source(system).map_err(usage)?);
        return Ok(());
    }
    let sys = load_system(system, None)?;
    print!("{}", sys.serialize());
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.global.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(usage)?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Verify { system, only, variant } => cmd_verify(g, system, only, variant.as_deref()),
        Command::Fit {
            system,
            pair,
            closure,
            generator_degree,
            parameter_degree,
            basis,
            variant,
        } => cmd_fit(
            g,
            system,
            pair.as_deref(),
            closure.as_deref(),
            *generator_degree,
            *parameter_degree,
            basis,
            variant.as_deref(),
        ),
        Command::Independence { system, functions, variant } => {
            cmd_independence(g, system, functions, variant.as_deref())
        }
        Command::Dynamics {
            system,
            params,
            start,
            dt,
            horizon,
            tolerance,
            margin,
            dump,
            stride,
            variant,
        } => cmd_dynamics(
            g,
            DynamicsArgs {
                system,
                params,
                start,
                dt: *dt,
                horizon: *horizon,
                tolerance: *tolerance,
                margin: *margin,
                dump: dump.as_deref(),
                stride: *stride,
                variant: variant.as_deref(),
            },
        ),
        Command::List => cmd_list(g),
        Command::Dump { system, source } => cmd_dump(system, *source),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Refuted) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
