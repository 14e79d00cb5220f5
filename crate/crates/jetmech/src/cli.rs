//! Command-line surface.
//!
//! Exit codes: `0` success, `1` a check failed or an integration aborted,
//! `2` malformed input. The sampling seed defaults to `0`, can be set by the
//! `JETMECH_SEED` environment variable, and an explicit `--seed` flag wins.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use jetmech_core::mechanics::LagrangianSystem;
use jetmech_core::rng::SplitMix64;
use jetmech_core::scenarios::{self, Scenario};
use jetmech_core::simulate::{
    self, extended_route_field, hamiltonian_route_field, lagrangian_route_field, IntegrateError,
    IntegratorConfig,
};
use jetmech_core::space::SpacePoint;
use jetmech_core::submanifolds::{
    equality_check, poisson_lagrangian_check, presymplectic_lagrangian_check, EqualityVariant,
    ParamImmersion,
};
use jetmech_core::triples::{
    canonical_structure, lemma_l1_residual, lemma_l2_residual, verify_structure_map, MapId,
    StructureId,
};

use crate::config::{resolve_builtin, ScenarioConfig};
use crate::report;
use crate::trajectory_csv::write_trajectory;

/// Residual bound for the triple-compatibility lemmas; they hold to rounding
/// error, so this is not configurable.
const LEMMA_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(
    name = "jetmech",
    version,
    about = "Time-dependent mechanics on jet bundles: simulation and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a dynamical route and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Run a verification suite and print an aggregated JSON report.
    Verify(VerifyArgs),
    /// Print the Legendre images and regularity of one jet-space point.
    Legendre(LegendreArgs),
    /// Check one induced submanifold against its canonical structure.
    CheckSubmanifold(CheckSubmanifoldArgs),
}

#[derive(Args)]
struct ScenarioSelector {
    /// Built-in scenario name.
    #[arg(long)]
    scenario: Option<String>,
    /// Path to a scenario config (single JSON document).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fiber dimension for built-in scenarios.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Route {
    Lagrangian,
    Hamiltonian,
    Extended,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    selector: ScenarioSelector,
    /// Which dynamical field to integrate.
    #[arg(long, value_enum)]
    route: Route,
    #[arg(long)]
    t0: f64,
    #[arg(long)]
    t1: f64,
    #[arg(long)]
    step: f64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Initial point as a comma list (full coordinate tuple including t);
    /// defaults to the origin of the route's space at t0.
    #[arg(long)]
    x0: Option<String>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Suite {
    Maps,
    Submanifolds,
    Equivalence,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Fiber dimension for the structural-map checks.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Sample count per check.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Sampling seed (overrides JETMECH_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance for rank decisions and residual thresholds.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Restrict scenario-based suites to one scenario.
    #[arg(long)]
    scenario: Option<String>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LegendreArgs {
    #[command(flatten)]
    selector: ScenarioSelector,
    /// Jet-space point `t,q1..qn,v1..vn`.
    #[arg(long)]
    point: String,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SubmanifoldObject {
    /// Image of the section induced by dL in the cotangent quotient.
    Dl,
    /// Image of the section induced by the Hamiltonian section.
    Dh,
    /// Image of dF_h in the affine slice.
    Dfh,
}

#[derive(Args)]
struct CheckSubmanifoldArgs {
    #[command(flatten)]
    selector: ScenarioSelector,
    #[arg(long, value_enum)]
    object: SubmanifoldObject,
    /// Number of sampled parameter points.
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Legendre(args) => cmd_legendre(args),
        Command::CheckSubmanifold(args) => cmd_check_submanifold(args),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn effective_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("JETMECH_SEED") {
        Ok(text) => text
            .parse::<u64>()
            .map_err(|_| Failure::usage(format!("JETMECH_SEED is not a valid seed: '{text}'"))),
        Err(_) => Ok(0),
    }
}

fn load_scenario(selector: &ScenarioSelector) -> Result<Scenario, Failure> {
    match (&selector.scenario, &selector.config) {
        (Some(_), Some(_)) => Err(Failure::usage(
            "--scenario and --config are mutually exclusive",
        )),
        (None, None) => Err(Failure::usage("one of --scenario or --config is required")),
        (Some(name), None) => {
            let n = selector.n.unwrap_or(1);
            if n == 0 {
                return Err(Failure::usage("fiber dimension n must be >= 1"));
            }
            resolve_builtin(name, n).map_err(|e| Failure::usage(e.to_string()))
        }
        (None, Some(path)) => {
            if selector.n.is_some() {
                return Err(Failure::usage(
                    "--n applies to built-ins; config files carry their own n",
                ));
            }
            ScenarioConfig::load(path)
                .and_then(ScenarioConfig::into_scenario)
                .map_err(|e| Failure::usage(e.to_string()))
        }
    }
}

fn parse_point(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| Failure::usage(format!("malformed point '{text}': {e}")))
}

fn print_or_write(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    let scenario = load_scenario(&args.selector)?;
    let cfg = IntegratorConfig::new(args.t0, args.t1, args.step)
        .map_err(|e| Failure::usage(e.to_string()))?;

    enum FieldChoice {
        Lagrangian(LagrangianSystem),
        Hamiltonian(jetmech_core::mechanics::HamiltonianSystem),
        Extended(jetmech_core::mechanics::HamiltonianSystem),
    }

    let (space, choice) = match args.route {
        Route::Lagrangian => {
            let sys = scenario.lagrangian.clone().ok_or_else(|| {
                Failure::usage(format!("scenario '{}' has no Lagrangian", scenario.name))
            })?;
            (sys.jet_space(), FieldChoice::Lagrangian(sys))
        }
        Route::Hamiltonian => {
            let ham = scenario.hamiltonian_or_derived().ok_or_else(|| {
                Failure::usage(format!(
                    "scenario '{}' has no Hamiltonian description",
                    scenario.name
                ))
            })?;
            (ham.phase_space(), FieldChoice::Hamiltonian(ham))
        }
        Route::Extended => {
            let ham = scenario.hamiltonian_or_derived().ok_or_else(|| {
                Failure::usage(format!(
                    "scenario '{}' has no Hamiltonian description",
                    scenario.name
                ))
            })?;
            (
                jetmech_core::space::SpaceId::new(jetmech_core::space::SpaceTag::TStarM, ham.n()),
                FieldChoice::Extended(ham),
            )
        }
    };

    let coords = match &args.x0 {
        Some(text) => {
            let coords = parse_point(text)?;
            if coords.len() != space.dim() {
                return Err(Failure::usage(format!(
                    "--x0 has {} coordinates; the {:?} route needs {}",
                    coords.len(),
                    space.tag,
                    space.dim()
                )));
            }
            if (coords[0] - args.t0).abs() > 1e-12 * args.t0.abs().max(1.0) {
                return Err(Failure::usage("the t coordinate of --x0 must equal --t0"));
            }
            coords
        }
        None => {
            let mut zeros = vec![0.0; space.dim()];
            zeros[0] = args.t0;
            zeros
        }
    };
    let x0 = SpacePoint::new(space, coords).map_err(|e| Failure::usage(e.to_string()))?;

    let outcome = match &choice {
        FieldChoice::Lagrangian(sys) => simulate::integrate(lagrangian_route_field(sys), &x0, &cfg),
        FieldChoice::Hamiltonian(ham) => {
            simulate::integrate(hamiltonian_route_field(ham), &x0, &cfg)
        }
        FieldChoice::Extended(ham) => simulate::integrate(extended_route_field(ham), &x0, &cfg),
    };

    let write_csv = |path: &Path, traj, trailer: Option<String>| -> Result<(), Failure> {
        let mut file = fs::File::create(path)
            .map_err(|e| Failure::runtime(format!("cannot create {}: {e}", path.display())))?;
        write_trajectory(&mut file, traj)
            .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display())))?;
        if let Some(line) = trailer {
            writeln!(file, "{line}")
                .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    };

    match outcome {
        Ok(traj) => {
            write_csv(&args.out, &traj, None)?;
            Ok(0)
        }
        Err(IntegrateError::Invalid(e)) => Err(Failure::usage(e.to_string())),
        Err(IntegrateError::Aborted {
            partial,
            failed_at_step,
            source,
        }) => {
            write_csv(
                &args.out,
                &partial,
                Some(format!("# aborted at step {failed_at_step}: {source}")),
            )?;
            Err(Failure::runtime(format!(
                "integration aborted at step {failed_at_step}: {source}"
            )))
        }
    }
}

fn scenario_list(filter: &Option<String>, n: usize) -> Result<Vec<Scenario>, Failure> {
    match filter {
        Some(name) => {
            let sc = resolve_builtin(name, n).map_err(|e| Failure::usage(e.to_string()))?;
            Ok(vec![sc])
        }
        None => Ok(scenarios::regular_builtin(n)),
    }
}

fn dl_check(sc: &Scenario, samples: usize, seed: u64, tol: f64) -> Result<Option<Value>, Failure> {
    let Some(sys) = &sc.lagrangian else {
        return Ok(None);
    };
    let immersion = ParamImmersion::dl_image(sys);
    let lambda = canonical_structure(StructureId::LambdaTildeJ1Pi, sc.n);
    let mut rng = SplitMix64::new(seed);
    let params: Vec<Vec<f64>> = (0..samples)
        .map(|_| rng.sample_box(immersion.param_dim()))
        .collect();
    let report = poisson_lagrangian_check(&immersion, &lambda, &params, tol)
        .map_err(|e| Failure::runtime(e.to_string()))?;
    Ok(Some(report::submanifold_check(
        "dl_image", &sc.name, sc.n, &report,
    )))
}

fn dh_check(sc: &Scenario, samples: usize, seed: u64, tol: f64) -> Result<Option<Value>, Failure> {
    let Some(ham) = sc.hamiltonian_or_derived() else {
        return Ok(None);
    };
    let immersion = ParamImmersion::dh_image(&ham);
    let lambda = canonical_structure(StructureId::LambdaTildePMu, sc.n);
    let mut rng = SplitMix64::new(seed);
    let params: Vec<Vec<f64>> = (0..samples)
        .map(|_| rng.sample_box(immersion.param_dim()))
        .collect();
    let report = poisson_lagrangian_check(&immersion, &lambda, &params, tol)
        .map_err(|e| Failure::runtime(e.to_string()))?;
    Ok(Some(report::submanifold_check(
        "dh_image", &sc.name, sc.n, &report,
    )))
}

fn dfh_check(sc: &Scenario, samples: usize, seed: u64, tol: f64) -> Result<Option<Value>, Failure> {
    let Some(ham) = sc.hamiltonian_or_derived() else {
        return Ok(None);
    };
    let immersion = ParamImmersion::dfh_image(&ham);
    let omega = canonical_structure(StructureId::PhiVHat1, sc.n);
    let mut rng = SplitMix64::new(seed);
    let params: Vec<Vec<f64>> = (0..samples)
        .map(|_| rng.sample_box(immersion.param_dim()))
        .collect();
    let report = presymplectic_lagrangian_check(&immersion, &omega, &params, tol)
        .map_err(|e| Failure::runtime(e.to_string()))?;
    Ok(Some(report::submanifold_check(
        "dfh_image",
        &sc.name,
        sc.n,
        &report,
    )))
}

fn maps_suite(n: usize, samples: usize, seed: u64, tol: f64) -> Result<(Value, bool), Failure> {
    let mut entries = Vec::new();
    let mut pass = true;
    for id in [MapId::APi, MapId::BPi, MapId::ATilde, MapId::BTilde] {
        let report = verify_structure_map(id, n, samples, seed, tol)
            .map_err(|e| Failure::usage(e.to_string()))?;
        pass &= report.pass;
        entries.push(report::map_check(&report));
    }
    Ok((Value::Array(entries), pass))
}

fn submanifolds_suite(
    filter: &Option<String>,
    n: usize,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<(Value, bool), Failure> {
    let mut entries = Vec::new();
    let mut pass = true;
    for sc in scenario_list(filter, n)? {
        for entry in [
            dl_check(&sc, samples, seed, tol)?,
            dh_check(&sc, samples, seed, tol)?,
            dfh_check(&sc, samples, seed, tol)?,
        ]
        .into_iter()
        .flatten()
        {
            pass &= entry["pass"].as_bool().unwrap_or(false);
            entries.push(entry);
        }
    }
    Ok((Value::Array(entries), pass))
}

fn equivalence_suite(
    filter: &Option<String>,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<(Value, bool), Failure> {
    let mut entries = Vec::new();
    let mut pass = true;
    for sc in scenario_list(filter, n)? {
        let Some(sys) = &sc.lagrangian else {
            continue;
        };
        let restricted = equality_check(sys, EqualityVariant::Restricted, samples, seed)
            .map_err(|e| Failure::runtime(e.to_string()))?;
        let extended = equality_check(sys, EqualityVariant::Extended, samples, seed)
            .map_err(|e| Failure::runtime(e.to_string()))?;

        let mut rng = SplitMix64::new(seed);
        let mut l1_max = 0.0_f64;
        let mut l2_max = 0.0_f64;
        for _ in 0..samples {
            let coords = rng.sample_box(1 + 2 * sc.n);
            let j = SpacePoint::new(sys.jet_space(), coords)
                .map_err(|e| Failure::runtime(e.to_string()))?;
            l1_max = l1_max
                .max(lemma_l1_residual(sys, &j).map_err(|e| Failure::runtime(e.to_string()))?);
            l2_max = l2_max
                .max(lemma_l2_residual(sys, &j).map_err(|e| Failure::runtime(e.to_string()))?);
        }
        let lemmas_pass = l1_max <= LEMMA_TOL && l2_max <= LEMMA_TOL;
        let scenario_pass = restricted.pass && extended.pass && lemmas_pass;
        pass &= scenario_pass;
        entries.push(json!({
            "scenario": sc.name,
            "restricted": report::equality_check(&restricted),
            "extended": report::equality_check(&extended),
            "lemma_l1_max": l1_max,
            "lemma_l2_max": l2_max,
            "pass": scenario_pass,
        }));
    }
    Ok((Value::Array(entries), pass))
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    if args.tol <= 0.0 {
        return Err(Failure::usage("tolerance must be positive"));
    }
    if args.samples == 0 {
        return Err(Failure::usage("samples must be >= 1"));
    }
    if args.n == 0 {
        return Err(Failure::usage("fiber dimension n must be >= 1"));
    }
    let seed = effective_seed(args.seed)?;

    let (body, pass) = match args.suite {
        Suite::Maps => {
            let (maps, pass) = maps_suite(args.n, args.samples, seed, args.tol)?;
            (
                json!({ "suite": "maps", "seed": seed, "maps": maps, "pass": pass }),
                pass,
            )
        }
        Suite::Submanifolds => {
            let (checks, pass) =
                submanifolds_suite(&args.scenario, args.n, args.samples, seed, args.tol)?;
            (
                json!({ "suite": "submanifolds", "seed": seed, "checks": checks, "pass": pass }),
                pass,
            )
        }
        Suite::Equivalence => {
            let (checks, pass) = equivalence_suite(&args.scenario, args.n, args.samples, seed)?;
            (
                json!({ "suite": "equivalence", "seed": seed, "checks": checks, "pass": pass }),
                pass,
            )
        }
        Suite::All => {
            let (maps, maps_pass) = maps_suite(args.n, args.samples, seed, args.tol)?;
            let (subs, subs_pass) =
                submanifolds_suite(&args.scenario, args.n, args.samples, seed, args.tol)?;
            let (equiv, equiv_pass) =
                equivalence_suite(&args.scenario, args.n, args.samples, seed)?;
            let pass = maps_pass && subs_pass && equiv_pass;
            (
                json!({
                    "suite": "all",
                    "seed": seed,
                    "maps": maps,
                    "submanifolds": subs,
                    "equivalence": equiv,
                    "pass": pass,
                }),
                pass,
            )
        }
    };

    let text = serde_json::to_string_pretty(&body).expect("report serializes");
    print_or_write(&args.out, &text)?;
    Ok(if pass { 0 } else { 1 })
}

fn cmd_legendre(args: LegendreArgs) -> CmdResult {
    let scenario = load_scenario(&args.selector)?;
    let sys = scenario
        .lagrangian
        .ok_or_else(|| Failure::usage(format!("scenario '{}' has no Lagrangian", scenario.name)))?;
    let coords = parse_point(&args.point)?;
    if coords.len() != sys.jet_space().dim() {
        return Err(Failure::usage(format!(
            "point has {} coordinates; expected {} (t,q1..qn,v1..vn)",
            coords.len(),
            sys.jet_space().dim()
        )));
    }
    let j = SpacePoint::new(sys.jet_space(), coords).map_err(|e| Failure::usage(e.to_string()))?;
    let restricted = sys
        .restricted_legendre(&j)
        .map_err(|e| Failure::runtime(e.to_string()))?;
    let extended = sys
        .extended_legendre(&j)
        .map_err(|e| Failure::runtime(e.to_string()))?;
    let regularity = sys
        .regularity(&j, 1e-9)
        .map_err(|e| Failure::runtime(e.to_string()))?;
    let body = json!({
        "restricted": restricted.coords(),
        "extended": extended.coords(),
        "regular": regularity.regular,
    });
    println!(
        "{}",
        serde_json::to_string(&body).expect("report serializes")
    );
    Ok(0)
}

fn cmd_check_submanifold(args: CheckSubmanifoldArgs) -> CmdResult {
    if args.tol <= 0.0 {
        return Err(Failure::usage("tolerance must be positive"));
    }
    if args.points == 0 {
        return Err(Failure::usage("points must be >= 1"));
    }
    let seed = effective_seed(args.seed)?;
    let scenario = load_scenario(&args.selector)?;
    let entry = match args.object {
        SubmanifoldObject::Dl => dl_check(&scenario, args.points, seed, args.tol)?,
        SubmanifoldObject::Dh => dh_check(&scenario, args.points, seed, args.tol)?,
        SubmanifoldObject::Dfh => dfh_check(&scenario, args.points, seed, args.tol)?,
    };
    let entry = entry.ok_or_else(|| {
        Failure::usage(format!(
            "scenario '{}' does not provide the system this object needs",
            scenario.name
        ))
    })?;
    let pass = entry["pass"].as_bool().unwrap_or(false);
    println!(
        "{}",
        serde_json::to_string_pretty(&entry).expect("report serializes")
    );
    Ok(if pass { 0 } else { 1 })
}
