//! Command-line entry point: configure systems, run simulations, evaluate
//! residual reports, run the theorem verifier and the bracket selftest.
//!
//! Exit codes: 0 on success, 1 on verification failure (an INCONSISTENT
//! verdict, a residual above tolerance, or a numerical failure), 2 on usage
//! or configuration errors. All randomness flows from a single 64-bit seed
//! recorded in every JSON artifact; identical configuration and seed produce
//! byte-identical outputs.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    diagnostics, integrate, write_trajectory_csv, DriftReport, IntegratorChoice, Method, State,
};
use crate::error::Error;
use crate::hj::{
    verify_equivalence, verify_equivalence_canonical, BodySection, CanonicalSection, PiMode,
    ResidualReport, DEFAULT_CANONICAL_STEP, DEFAULT_GROUP_STEP,
};
use crate::lie::{Algebra, DualVector};
use crate::poisson::selftest;
use crate::sampling::indexed_rng;
use crate::systems::{
    harmonic_oscillator, heavy_top_system, rigid_body_system, HeavyTopParams, LpSystem,
    RigidBodyParams, SystemSpec,
};

const CONFIG_SCHEMA_VERSION: u32 = 1;
const DEFAULT_SEED: u64 = 7;

// ---------------------------------------------------------------------------
// Argument surface.

#[derive(Parser)]
#[command(
    name = "coadjoint",
    version,
    about = "Lie-Poisson dynamics and Hamilton-Jacobi residual verification"
)]
struct Cli {
    /// JSON configuration file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a system and write a trajectory CSV plus a diagnostics JSON.
    Simulate(SimulateArgs),
    /// Evaluate residual reports for a candidate section.
    CheckHj(SectionRunArgs),
    /// Run the equivalence verifier on a candidate section.
    VerifyTheorem(SectionRunArgs),
    /// Run the bracket invariant suite and print pass/fail lines.
    BracketSelftest(SelftestArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemKindArg {
    RigidBody,
    HeavyTop,
    Canonical,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    #[value(alias = "rk4")]
    ExplicitRk4,
    #[value(alias = "midpoint")]
    ImplicitMidpoint,
    #[value(alias = "splitting")]
    CoadjointSplitting,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::ExplicitRk4 => Method::ExplicitRk4,
            MethodArg::ImplicitMidpoint => Method::ImplicitMidpoint,
            MethodArg::CoadjointSplitting => Method::CoadjointSplitting,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SectionKindArg {
    ConstantMomentum,
    BodyConstant,
    ScaledInertiaFamily,
    Exact,
    Perturbed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PiModeArg {
    /// Base section when the candidate has one, its own value otherwise.
    Auto,
    Section,
    Base,
    Fixed,
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long, value_enum)]
    system: Option<SystemKindArg>,
    /// Principal moments of inertia, comma separated.
    #[arg(long)]
    inertia: Option<String>,
    /// Composed gravitational coefficient m*g*h (heavy top).
    #[arg(long)]
    mgh: Option<f64>,
    /// Unit body axis to the center of mass (heavy top), comma separated.
    #[arg(long)]
    chi: Option<String>,
    /// Phase-space dimension n for canonical systems.
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Initial body momentum, comma separated.
    #[arg(long)]
    pi0: Option<String>,
    /// Initial advected vector (heavy top), comma separated.
    #[arg(long)]
    gamma0: Option<String>,
    /// Initial coordinates (canonical), comma separated.
    #[arg(long)]
    q0: Option<String>,
    /// Initial momenta (canonical), comma separated.
    #[arg(long)]
    p0: Option<String>,
    #[arg(long, value_enum)]
    integrator: Option<MethodArg>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Co-evolve the group element and record the spatial momentum.
    #[arg(long)]
    with_group: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectory CSV path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Diagnostics JSON path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct SectionRunArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, value_enum)]
    section: Option<SectionKindArg>,
    /// Momentum level mu, comma separated (3 components on so*(3), 6 on se*(3)).
    #[arg(long)]
    mu: Option<String>,
    /// Constant body value for body-constant sections.
    #[arg(long)]
    mu0: Option<String>,
    /// Scale of the inertia-scaled family.
    #[arg(long)]
    k: Option<f64>,
    /// Perturbation amplitude.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Seed of the perturbation shape (independent of the sampling seed).
    #[arg(long)]
    perturb_seed: Option<u64>,
    /// Base section of a perturbed section.
    #[arg(long, value_enum)]
    base: Option<SectionKindArg>,
    /// Potential W(q1..qn) generating an exact canonical section.
    #[arg(long)]
    w_expr: Option<String>,
    /// Energy level of the built-in oscillator-action potential.
    #[arg(long)]
    energy: Option<f64>,
    /// Half-width of the canonical evaluation grid.
    #[arg(long)]
    qmax: Option<f64>,
    /// Number of canonical grid points.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    pi_mode: Option<PiModeArg>,
    /// Fixed momentum for --pi-mode fixed, comma separated.
    #[arg(long)]
    pi_fixed: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report JSON path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Optional JSON report path.
    #[arg(long)]
    json: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Configuration file.

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    schema_version: Option<u32>,
    seed: Option<u64>,
    system: Option<SystemConfig>,
    integrator: Option<IntegratorConfig>,
    state0: Option<StateConfig>,
    steps: Option<usize>,
    with_group: Option<bool>,
    section: Option<SectionConfig>,
    samples: Option<usize>,
    tol: Option<f64>,
    pi_mode: Option<String>,
    output: Option<OutputConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemConfig {
    kind: Option<String>,
    inertia: Option<Vec<f64>>,
    mgh: Option<f64>,
    mass: Option<f64>,
    gravity: Option<f64>,
    length: Option<f64>,
    chi: Option<Vec<f64>>,
    dim: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegratorConfig {
    method: Option<String>,
    dt: Option<f64>,
    newton_tol: Option<f64>,
    newton_max_iter: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateConfig {
    pi: Option<Vec<f64>>,
    gamma: Option<Vec<f64>>,
    q: Option<Vec<f64>>,
    p: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SectionConfig {
    kind: Option<String>,
    mu: Option<Vec<f64>>,
    mu0: Option<Vec<f64>>,
    k: Option<f64>,
    amplitude: Option<f64>,
    perturb_seed: Option<u64>,
    base: Option<String>,
    w_expr: Option<String>,
    energy: Option<f64>,
    qmax: Option<f64>,
    grid: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputConfig {
    csv: Option<PathBuf>,
    json: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Failure handling: usage errors exit 2, run failures exit 1.

enum Failure {
    Usage(String),
    Run(String),
}

type RunResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> RunResult<T> {
    Err(Failure::Usage(msg.into()))
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match &e {
            Error::InvalidParameter(_) | Error::AlgebraMismatch { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Run(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Run(format!("i/o error: {e}"))
    }
}

// ---------------------------------------------------------------------------
// Entry points.

/// Parses the process arguments and runs; returns the exit code.
pub fn main_entry() -> i32 {
    run_from(std::env::args())
}

/// Runs the CLI on an explicit argument list; returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };

    let config = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(f) => return report_failure(f),
    };

    let outcome = match &cli.command {
        Command::Simulate(args) => run_simulate(args, &config),
        Command::CheckHj(args) => run_section_command(args, &config, false),
        Command::VerifyTheorem(args) => run_section_command(args, &config, true),
        Command::BracketSelftest(args) => run_selftest(args, &config),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => report_failure(f),
    }
}

fn report_failure(f: Failure) -> i32 {
    match f {
        Failure::Usage(msg) => {
            eprintln!("error: {msg}");
            2
        }
        Failure::Run(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn load_config(path: Option<&Path>) -> RunResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let config: FileConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))?;
    if let Some(v) = config.schema_version {
        if v != CONFIG_SCHEMA_VERSION {
            return usage(format!(
                "unsupported config schema_version {v} (expected {CONFIG_SCHEMA_VERSION})"
            ));
        }
    }
    Ok(config)
}

// ---------------------------------------------------------------------------
// Shared parsing helpers.

fn parse_floats(label: &str, s: &str) -> RunResult<Vec<f64>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("cannot parse {label} component {part:?}")))
        })
        .collect()
}

fn to_vector3(label: &str, v: &[f64]) -> RunResult<Vector3<f64>> {
    if v.len() != 3 {
        return usage(format!(
            "{label} needs exactly 3 components, got {}",
            v.len()
        ));
    }
    Ok(Vector3::new(v[0], v[1], v[2]))
}

fn resolve_vec3(
    label: &str,
    flag: Option<&String>,
    file: Option<&Vec<f64>>,
    default: Vector3<f64>,
) -> RunResult<Vector3<f64>> {
    if let Some(s) = flag {
        return to_vector3(label, &parse_floats(label, s)?);
    }
    if let Some(v) = file {
        return to_vector3(label, v);
    }
    Ok(default)
}

fn parse_dual(label: &str, algebra: Algebra, v: &[f64]) -> RunResult<DualVector> {
    if v.len() != algebra.dim() {
        return usage(format!(
            "{label} needs {} components on {}, got {}",
            algebra.dim(),
            algebra.name(),
            v.len()
        ));
    }
    Ok(DualVector::from_slice(algebra, v))
}

fn resolve_dual(
    label: &str,
    algebra: Algebra,
    flag: Option<&String>,
    file: Option<&Vec<f64>>,
    default: DualVector,
) -> RunResult<DualVector> {
    if let Some(s) = flag {
        return parse_dual(label, algebra, &parse_floats(label, s)?);
    }
    if let Some(v) = file {
        return parse_dual(label, algebra, v);
    }
    Ok(default)
}

fn write_text(path: &Path, text: &str) -> RunResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

fn to_pretty_json<T: Serialize>(value: &T) -> RunResult<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::Run(format!("serialization failure: {e}")))
}

// ---------------------------------------------------------------------------
// System resolution.

enum ResolvedSystem {
    RigidBody {
        system: LpSystem,
        inertia: Vector3<f64>,
    },
    HeavyTop {
        system: LpSystem,
    },
    Canonical {
        dim: usize,
    },
}

fn system_kind(args: &SystemArgs, config: &FileConfig) -> RunResult<SystemKindArg> {
    if let Some(kind) = args.system {
        return Ok(kind);
    }
    let from_file = config.system.as_ref().and_then(|s| s.kind.as_deref());
    match from_file {
        Some("rigid-body") => Ok(SystemKindArg::RigidBody),
        Some("heavy-top") => Ok(SystemKindArg::HeavyTop),
        Some("canonical") => Ok(SystemKindArg::Canonical),
        Some(other) => usage(format!("unknown system kind {other:?} in config")),
        None => usage("no system given (use --system or a config file)"),
    }
}

fn resolve_system(args: &SystemArgs, config: &FileConfig) -> RunResult<ResolvedSystem> {
    let file_sys = config.system.as_ref();
    match system_kind(args, config)? {
        SystemKindArg::RigidBody => {
            let inertia = resolve_vec3(
                "inertia",
                args.inertia.as_ref(),
                file_sys.and_then(|s| s.inertia.as_ref()),
                Vector3::new(1.0, 2.0, 3.0),
            )?;
            let params = RigidBodyParams::new(inertia)?;
            Ok(ResolvedSystem::RigidBody {
                system: rigid_body_system(&params),
                inertia,
            })
        }
        SystemKindArg::HeavyTop => {
            let inertia = resolve_vec3(
                "inertia",
                args.inertia.as_ref(),
                file_sys.and_then(|s| s.inertia.as_ref()),
                Vector3::new(1.0, 2.0, 3.0),
            )?;
            let chi = resolve_vec3(
                "chi",
                args.chi.as_ref(),
                file_sys.and_then(|s| s.chi.as_ref()),
                Vector3::new(0.0, 0.0, 1.0),
            )?;
            let params = match (args.mgh, file_sys) {
                (Some(mgh), _) => HeavyTopParams::from_mgh(inertia, mgh, chi)?,
                (None, Some(s)) => {
                    if let (Some(m), Some(g), Some(l)) = (s.mass, s.gravity, s.length) {
                        HeavyTopParams::new(inertia, m, g, l, chi)?
                    } else {
                        HeavyTopParams::from_mgh(inertia, s.mgh.unwrap_or(1.0), chi)?
                    }
                }
                (None, None) => HeavyTopParams::from_mgh(inertia, 1.0, chi)?,
            };
            Ok(ResolvedSystem::HeavyTop {
                system: heavy_top_system(&params),
            })
        }
        SystemKindArg::Canonical => {
            let dim = args.dim.or(file_sys.and_then(|s| s.dim)).unwrap_or(1);
            if dim == 0 {
                return usage("canonical dimension must be at least 1");
            }
            Ok(ResolvedSystem::Canonical { dim })
        }
    }
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Serialize)]
struct SimulateArtifact {
    schema_version: u32,
    seed: u64,
    system: String,
    integrator: String,
    dt: f64,
    steps: usize,
    with_group: bool,
    diagnostics: DriftReport,
}

fn run_simulate(args: &SimulateArgs, config: &FileConfig) -> RunResult<i32> {
    let file_integrator = config.integrator.as_ref();
    let method: Method = match (
        args.integrator,
        file_integrator.and_then(|i| i.method.as_deref()),
    ) {
        (Some(m), _) => m.into(),
        (None, Some("explicit-rk4")) | (None, Some("rk4")) => Method::ExplicitRk4,
        (None, Some("implicit-midpoint")) | (None, Some("midpoint")) => Method::ImplicitMidpoint,
        (None, Some("coadjoint-splitting")) | (None, Some("splitting")) => {
            Method::CoadjointSplitting
        }
        (None, Some(other)) => return usage(format!("unknown integrator {other:?} in config")),
        (None, None) => Method::ExplicitRk4,
    };
    let dt = args
        .dt
        .or(file_integrator.and_then(|i| i.dt))
        .unwrap_or(1e-3);
    let mut choice = IntegratorChoice::new(method, dt)?;
    if let Some(t) = file_integrator.and_then(|i| i.newton_tol) {
        choice.newton_tol = t;
    }
    if let Some(n) = file_integrator.and_then(|i| i.newton_max_iter) {
        choice.newton_max_iter = n;
    }
    let steps = args.steps.or(config.steps).unwrap_or(1000);
    let with_group = args.with_group || config.with_group.unwrap_or(false);
    let seed = args.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let file_state = config.state0.as_ref();

    let (system, state0) = match resolve_system(&args.system, config)? {
        ResolvedSystem::RigidBody { system, .. } => {
            let pi0 = resolve_vec3(
                "pi0",
                args.pi0.as_ref(),
                file_state.and_then(|s| s.pi.as_ref()),
                Vector3::new(1.0, 0.0, 0.0),
            )?;
            (
                SystemSpec::LiePoisson(system),
                State::LiePoisson(DualVector::so3(pi0)),
            )
        }
        ResolvedSystem::HeavyTop { system, .. } => {
            let pi0 = resolve_vec3(
                "pi0",
                args.pi0.as_ref(),
                file_state.and_then(|s| s.pi.as_ref()),
                Vector3::new(1.0, 0.0, 0.0),
            )?;
            let gamma0 = resolve_vec3(
                "gamma0",
                args.gamma0.as_ref(),
                file_state.and_then(|s| s.gamma.as_ref()),
                Vector3::new(0.0, 0.0, 1.0),
            )?;
            (
                SystemSpec::LiePoisson(system),
                State::LiePoisson(DualVector::se3(pi0, gamma0)),
            )
        }
        ResolvedSystem::Canonical { dim } => {
            let parse_list = |label: &str,
                              flag: Option<&String>,
                              file: Option<&Vec<f64>>,
                              default: f64|
             -> RunResult<Vec<f64>> {
                let values = if let Some(s) = flag {
                    parse_floats(label, s)?
                } else if let Some(v) = file {
                    v.clone()
                } else {
                    vec![default; dim]
                };
                if values.len() != dim {
                    return usage(format!(
                        "{label} needs {dim} components, got {}",
                        values.len()
                    ));
                }
                Ok(values)
            };
            let q0 = parse_list(
                "q0",
                args.q0.as_ref(),
                file_state.and_then(|s| s.q.as_ref()),
                1.0,
            )?;
            let p0 = parse_list(
                "p0",
                args.p0.as_ref(),
                file_state.and_then(|s| s.p.as_ref()),
                0.0,
            )?;
            (
                SystemSpec::Canonical(harmonic_oscillator(dim)?),
                State::Canonical { q: q0, p: p0 },
            )
        }
    };

    let trajectory = integrate(&system, &state0, &choice, steps, with_group)?;
    let report = diagnostics(&trajectory, &system)?;

    let csv_path = args
        .csv
        .clone()
        .or(config.output.as_ref().and_then(|o| o.csv.clone()))
        .unwrap_or_else(|| PathBuf::from("trajectory.csv"));
    let json_path = args
        .json
        .clone()
        .or(config.output.as_ref().and_then(|o| o.json.clone()))
        .unwrap_or_else(|| PathBuf::from("diagnostics.json"));

    let mut csv = Vec::new();
    write_trajectory_csv(&trajectory, &mut csv)?;
    write_text(&csv_path, std::str::from_utf8(&csv).expect("csv is utf-8"))?;

    let artifact = SimulateArtifact {
        schema_version: CONFIG_SCHEMA_VERSION,
        seed,
        system: system.label().to_string(),
        integrator: method.name().to_string(),
        dt,
        steps,
        with_group,
        diagnostics: report,
    };
    write_text(&json_path, &to_pretty_json(&artifact)?)?;

    println!(
        "wrote {} ({} rows) and {}",
        csv_path.display(),
        trajectory.times.len(),
        json_path.display()
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// check-hj / verify-theorem

fn section_kind_from(name: &str) -> RunResult<SectionKindArg> {
    match name {
        "constant-momentum" => Ok(SectionKindArg::ConstantMomentum),
        "body-constant" => Ok(SectionKindArg::BodyConstant),
        "scaled-inertia-family" => Ok(SectionKindArg::ScaledInertiaFamily),
        "exact" => Ok(SectionKindArg::Exact),
        "perturbed" => Ok(SectionKindArg::Perturbed),
        other => usage(format!("unknown section kind {other:?}")),
    }
}

struct SectionParams {
    kind: SectionKindArg,
    mu: DualVector,
    mu0: DualVector,
    k: f64,
    amplitude: f64,
    perturb_seed: u64,
    base: Option<SectionKindArg>,
}

fn resolve_section_params(
    args: &SectionRunArgs,
    config: &FileConfig,
    algebra: Algebra,
) -> RunResult<SectionParams> {
    let file = config.section.as_ref();
    let kind = match (args.section, file.and_then(|s| s.kind.as_deref())) {
        (Some(k), _) => k,
        (None, Some(name)) => section_kind_from(name)?,
        (None, None) => SectionKindArg::ConstantMomentum,
    };
    let default_mu = match algebra {
        Algebra::So3 => DualVector::so3(Vector3::new(0.0, 0.0, 1.0)),
        Algebra::Se3 => DualVector::se3(Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.0, 0.0, 1.0)),
    };
    let mu = resolve_dual(
        "mu",
        algebra,
        args.mu.as_ref(),
        file.and_then(|s| s.mu.as_ref()),
        default_mu,
    )?;
    let mu0 = resolve_dual(
        "mu0",
        algebra,
        args.mu0.as_ref(),
        file.and_then(|s| s.mu0.as_ref()),
        mu,
    )?;
    let base = match (args.base, file.and_then(|s| s.base.as_deref())) {
        (Some(b), _) => Some(b),
        (None, Some(name)) => Some(section_kind_from(name)?),
        (None, None) => None,
    };
    Ok(SectionParams {
        kind,
        mu,
        mu0,
        k: args.k.or(file.and_then(|s| s.k)).unwrap_or(1.0),
        amplitude: args
            .amplitude
            .or(file.and_then(|s| s.amplitude))
            .unwrap_or(0.1),
        perturb_seed: args
            .perturb_seed
            .or(file.and_then(|s| s.perturb_seed))
            .unwrap_or(0),
        base,
    })
}

fn build_group_section(
    params: &SectionParams,
    inertia: Option<Vector3<f64>>,
    kind_override: Option<SectionKindArg>,
) -> RunResult<BodySection> {
    let kind = kind_override.unwrap_or(params.kind);
    match kind {
        SectionKindArg::ConstantMomentum => Ok(BodySection::from_momentum(&params.mu)),
        SectionKindArg::BodyConstant => Ok(BodySection::constant(&params.mu0)),
        SectionKindArg::ScaledInertiaFamily => {
            let inertia = inertia.ok_or_else(|| {
                Failure::Usage("the scaled-inertia family needs a rigid body".to_string())
            })?;
            Ok(BodySection::scaled_inertia(inertia, params.k, &params.mu)?)
        }
        SectionKindArg::Perturbed => {
            let base_kind = params.base.unwrap_or(SectionKindArg::ConstantMomentum);
            if base_kind == SectionKindArg::Perturbed {
                return usage("a perturbed section cannot use a perturbed base");
            }
            let base = build_group_section(params, inertia, Some(base_kind))?;
            Ok(BodySection::perturbed(
                &base,
                params.amplitude,
                params.perturb_seed,
            ))
        }
        SectionKindArg::Exact => {
            usage("exact (potential-generated) sections live on canonical systems")
        }
    }
}

fn build_canonical_section(
    args: &SectionRunArgs,
    config: &FileConfig,
    dim: usize,
    energy: f64,
    kind: SectionKindArg,
    params: &SectionParams,
) -> RunResult<CanonicalSection> {
    let file = config.section.as_ref();
    match kind {
        SectionKindArg::Exact => {
            let w_expr = args.w_expr.clone().or(file.and_then(|s| s.w_expr.clone()));
            match w_expr {
                Some(src) => {
                    let expr: meval::Expr = src
                        .parse()
                        .map_err(|e| Failure::Usage(format!("invalid W expression: {e}")))?;
                    let names: Vec<String> = (1..=dim).map(|i| format!("q{i}")).collect();
                    let w = move |q: &[f64]| -> f64 {
                        let mut ctx = meval::Context::new();
                        for (name, value) in names.iter().zip(q) {
                            ctx.var(name.clone(), *value);
                        }
                        expr.eval_with_context(&ctx).unwrap_or(f64::NAN)
                    };
                    let section =
                        CanonicalSection::from_potential(dim, "exact", w, DEFAULT_CANONICAL_STEP);
                    // probe once so a broken expression is a config error
                    section
                        .eval(&vec![0.0; dim])
                        .map_err(|e| Failure::Usage(format!("W expression probe failed: {e}")))?;
                    Ok(section)
                }
                None => {
                    // oscillator action: dW/dq_i = sqrt(2E - q_i^2) per coordinate
                    if energy <= 0.0 {
                        return usage("energy must be positive for the oscillator action");
                    }
                    let two_e = 2.0 * energy;
                    Ok(CanonicalSection::from_potential(
                        dim,
                        "exact",
                        move |q: &[f64]| {
                            q.iter()
                                .map(|qi| {
                                    0.5 * (qi * (two_e - qi * qi).sqrt()
                                        + two_e * (qi / two_e.sqrt()).asin())
                                })
                                .sum()
                        },
                        DEFAULT_CANONICAL_STEP,
                    ))
                }
            }
        }
        SectionKindArg::Perturbed => {
            let base_kind = params.base.unwrap_or(SectionKindArg::Exact);
            if base_kind != SectionKindArg::Exact {
                return usage("canonical perturbed sections take an exact base");
            }
            let base = build_canonical_section(args, config, dim, energy, base_kind, params)?;
            Ok(CanonicalSection::perturbed(
                &base,
                params.amplitude,
                params.perturb_seed,
            ))
        }
        _ => usage("canonical systems take exact or perturbed sections"),
    }
}

fn run_section_command(
    args: &SectionRunArgs,
    config: &FileConfig,
    verify_mode: bool,
) -> RunResult<i32> {
    let seed = args.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let samples = args.samples.or(config.samples).unwrap_or(100);
    let tol = args.tol.or(config.tol).unwrap_or(1e-5);
    let default_json = if verify_mode {
        "verify-report.json"
    } else {
        "hj-report.json"
    };
    let json_path = args
        .json
        .clone()
        .or(config.output.as_ref().and_then(|o| o.json.clone()))
        .unwrap_or_else(|| PathBuf::from(default_json));

    let report: ResidualReport = match resolve_system(&args.system, config)? {
        ResolvedSystem::RigidBody { system, inertia } => {
            let params = resolve_section_params(args, config, Algebra::So3)?;
            let section = build_group_section(&params, Some(inertia), None)?;
            let pi_mode = resolve_pi_mode(args, config, &section, verify_mode)?;
            verify_equivalence(
                &system,
                &section,
                &params.mu,
                samples,
                tol,
                seed,
                pi_mode,
                DEFAULT_GROUP_STEP,
            )?
        }
        ResolvedSystem::HeavyTop { system, .. } => {
            let params = resolve_section_params(args, config, Algebra::Se3)?;
            let section = build_group_section(&params, None, None)?;
            let pi_mode = resolve_pi_mode(args, config, &section, verify_mode)?;
            verify_equivalence(
                &system,
                &section,
                &params.mu,
                samples,
                tol,
                seed,
                pi_mode,
                DEFAULT_GROUP_STEP,
            )?
        }
        ResolvedSystem::Canonical { dim } => {
            let file = config.section.as_ref();
            let params = resolve_section_params(args, config, Algebra::So3)?;
            let energy = args.energy.or(file.and_then(|s| s.energy)).unwrap_or(0.5);
            let qmax = args.qmax.or(file.and_then(|s| s.qmax)).unwrap_or(0.9);
            let grid = args.grid.or(file.and_then(|s| s.grid)).unwrap_or(samples);
            if grid == 0 {
                return usage("grid must have at least one point");
            }
            let kind = match (args.section, file.and_then(|s| s.kind.as_deref())) {
                (Some(k), _) => k,
                (None, Some(name)) => section_kind_from(name)?,
                (None, None) => SectionKindArg::Exact,
            };
            let section = build_canonical_section(args, config, dim, energy, kind, &params)?;
            let points = canonical_grid(dim, qmax, grid, seed);
            let sys = harmonic_oscillator(dim)?;
            verify_equivalence_canonical(
                &sys,
                &section,
                &points,
                tol,
                seed,
                DEFAULT_CANONICAL_STEP,
            )?
        }
    };

    write_text(&json_path, &to_pretty_json(&report)?)?;
    let ok = if verify_mode {
        report.is_consistent()
    } else {
        report.hj_max <= tol
    };
    if verify_mode {
        println!(
            "verify-theorem: verdict {} (hj_max {:.3e}, relatedness_max {:.3e}) -> {}",
            report.verdict,
            report.hj_max,
            report.relatedness_max,
            json_path.display()
        );
    } else {
        println!(
            "check-hj: hj_max {:.3e} (tol {:.0e}) {} -> {}",
            report.hj_max,
            tol,
            if ok { "PASS" } else { "FAIL" },
            json_path.display()
        );
    }
    Ok(if ok { 0 } else { 1 })
}

fn resolve_pi_mode(
    args: &SectionRunArgs,
    config: &FileConfig,
    section: &BodySection,
    verify_mode: bool,
) -> RunResult<PiMode> {
    let from_file = match config.pi_mode.as_deref() {
        None => None,
        Some("auto") => Some(PiModeArg::Auto),
        Some("section") => Some(PiModeArg::Section),
        Some("base") => Some(PiModeArg::Base),
        Some("fixed") => Some(PiModeArg::Fixed),
        Some(other) => return usage(format!("unknown pi_mode {other:?} in config")),
    };
    // verify-theorem evaluates the residual equations at the section's own
    // value by default; check-hj follows the section's natural pairing.
    let default_mode = if verify_mode {
        PiModeArg::Section
    } else {
        PiModeArg::Auto
    };
    let mode = args.pi_mode.or(from_file).unwrap_or(default_mode);
    Ok(match mode {
        PiModeArg::Section => PiMode::SectionValue,
        PiModeArg::Base => PiMode::BaseSection,
        PiModeArg::Auto => {
            if section.base_momentum().is_some() {
                PiMode::BaseSection
            } else {
                PiMode::SectionValue
            }
        }
        PiModeArg::Fixed => {
            let raw = args
                .pi_fixed
                .as_ref()
                .ok_or_else(|| Failure::Usage("--pi-mode fixed needs --pi-fixed".to_string()))?;
            let values = parse_floats("pi-fixed", raw)?;
            PiMode::Fixed(parse_dual("pi-fixed", section.algebra(), &values)?)
        }
    })
}

fn canonical_grid(dim: usize, qmax: f64, points: usize, seed: u64) -> Vec<Vec<f64>> {
    if dim == 1 {
        if points == 1 {
            return vec![vec![0.0]];
        }
        (0..points)
            .map(|k| vec![-qmax + 2.0 * qmax * k as f64 / (points - 1) as f64])
            .collect()
    } else {
        (0..points)
            .map(|k| {
                let mut rng = indexed_rng(seed, k as u64);
                (0..dim)
                    .map(|_| rand::Rng::gen_range(&mut rng, -qmax..qmax))
                    .collect()
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// bracket-selftest

fn run_selftest(args: &SelftestArgs, config: &FileConfig) -> RunResult<i32> {
    let seed = args.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    let report = selftest::run(seed)?;
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    println!(
        "bracket selftest (seed {seed}, {} instances per property per algebra)",
        report.instances
    );
    println!(
        "antisymmetry max defect: {:.3e}  (tol {:.0e})  {}",
        report.antisymmetry_max,
        report.antisymmetry_tol,
        verdict(report.antisymmetry_max <= report.antisymmetry_tol)
    );
    println!(
        "leibniz max defect:      {:.3e}  (tol {:.0e})  {}",
        report.leibniz_max,
        report.leibniz_tol,
        verdict(report.leibniz_max <= report.leibniz_tol)
    );
    println!(
        "jacobi max defect:       {:.3e}  (tol {:.0e})  {}",
        report.jacobi_max,
        report.jacobi_tol,
        verdict(report.jacobi_max <= report.jacobi_tol)
    );
    println!(
        "closed-form agreement:   {:.3e}  (tol {:.0e})  {}",
        report.closed_form_max,
        report.closed_form_tol,
        verdict(report.closed_form_max <= report.closed_form_tol)
    );
    println!("overall: {}", verdict(report.pass));
    if let Some(path) = &args.json {
        write_text(path, &to_pretty_json(&report)?)?;
    }
    Ok(if report.pass { 0 } else { 1 })
}
