//! The batch front end behind the `partint` binary.
//!
//! Six commands cover the toolkit: `simulate` integrates a system and
//! writes a trajectory table; `verify-integral` and `verify-involution`
//! run the zero-set conservation checks; `compare-reduction` integrates
//! the Cartesian and squared-distance representations of an n-body system
//! side by side; `bracket` evaluates a Poisson bracket exactly or at a
//! point; `catalog` lists the built-in systems.
//!
//! # Configuration
//!
//! Every run is described by flags, by a config file (`--config run.ini`,
//! format in [`config`]), or both — flags override file keys one by one,
//! so a config file is a complete, diff-friendly experiment record.
//!
//! # Output
//!
//! Trajectories are tab-separated tables; verification commands print a
//! human-readable report ending in a `#machine` block of `key=value`
//! lines. With `--output FILE` the content goes to the file instead of
//! stdout; relative paths land in `--out-dir`, else `$PARTINT_OUT_DIR`,
//! else the working directory. Identical configuration and seed produce
//! byte-identical output.
//!
//! # Exit codes
//!
//! * 0 — success (for verifications: the claim held)
//! * 1 — validation error: malformed config, unknown model or variable,
//!   initial data violating a precondition
//! * 2 — runtime error: the integration or evaluation itself failed
//! * 3 — negative verdict: the verification ran and the claim failed

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dynamics::DynamicsError;
use crate::poisson::PoissonError;
use crate::reduction::ReductionError;

pub mod config;

mod commands;
mod render;
mod resolve;

use config::ConfigFile;

/// Failure of a run, classified for the exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The request never validated: bad config, unknown names, data that
    /// violates a documented precondition. Exit code 1.
    #[error("{0}")]
    Validation(String),
    /// The computation itself failed underway. Exit code 2.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

/// What a successful run produced.
#[derive(Debug)]
pub struct RunOutput {
    /// 0, or 3 for a negative verification verdict.
    pub exit_code: i32,
    /// Report text for stdout; empty when everything went to files.
    pub text: String,
    /// Files written, in write order.
    pub files: Vec<PathBuf>,
}

impl RunOutput {
    fn stdout(exit_code: i32, text: String) -> RunOutput {
        RunOutput {
            exit_code,
            text,
            files: Vec::new(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "partint",
    version,
    about = "Hamiltonian toolkit for integrals conserved on their own zero sets"
)]
pub struct Cli {
    /// Config file; command-line flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory for relative output paths (default: $PARTINT_OUT_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate a system and write the trajectory table
    Simulate(SimulateArgs),
    /// Check whether a function is conserved on its own zero set
    VerifyIntegral(VerifyIntegralArgs),
    /// Check a family's pairwise brackets on its joint zero set
    VerifyInvolution(VerifyInvolutionArgs),
    /// Integrate Cartesian and squared-distance n-body charts side by side
    CompareReduction(CompareReductionArgs),
    /// Poisson bracket of two functions, exact or at a point
    Bracket(BracketArgs),
    /// List the built-in systems and their charts
    Catalog(CatalogArgs),
}

/// Model selection, shared by every command that needs a system.
#[derive(Args, Clone, Debug, Default)]
pub struct ModelOpts {
    /// Catalog id or alias: central-force (hc2), central-force-cartesian
    /// (hc), magnetic-pair (Hmf), nbody (HN), rho (HRNrho), volume (vol-Nn)
    #[arg(long)]
    pub model: Option<String>,
    /// Body count for the n-body family
    #[arg(long = "N", alias = "n")]
    pub n: Option<usize>,
    /// Ambient dimension of the Cartesian n-body chart
    #[arg(long)]
    pub dim: Option<usize>,
    /// Particle mass of the central force
    #[arg(long)]
    pub mass: Option<f64>,
    /// Comma-separated body masses
    #[arg(long)]
    pub masses: Option<String>,
    /// Charge of the magnetic pair
    #[arg(long)]
    pub charge: Option<f64>,
    /// Field strength of the magnetic pair
    #[arg(long)]
    pub field: Option<f64>,
    /// Potential expression (variables are model-specific; see `catalog`)
    #[arg(long)]
    pub potential: Option<String>,
}

/// Integrator selection, shared by `simulate` and `compare-reduction`.
#[derive(Args, Clone, Debug, Default)]
pub struct IntegratorOpts {
    /// implicit-midpoint, strang-split, or rk4-reference
    #[arg(long)]
    pub scheme: Option<String>,
    /// Step size
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of steps
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelOpts,
    #[command(flatten)]
    pub integrator: IntegratorOpts,
    /// Initial coordinate value `name=value` (repeatable)
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
    /// Draw unset initial coordinates from the model's sampling box
    #[arg(long)]
    pub sample_initial: bool,
    /// Extra observable column `name=expr` (repeatable)
    #[arg(long = "observable", value_name = "NAME=EXPR")]
    pub observables: Vec<String>,
    /// Output file (stdout when omitted)
    #[arg(long, short = 'o')]
    pub output: Option<String>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct VerifyIntegralArgs {
    #[command(flatten)]
    pub model: ModelOpts,
    /// The candidate function: named energy, observable, or expression
    #[arg(long)]
    pub f: Option<String>,
    /// Energy to bracket against; the model's own energy when omitted
    #[arg(long = "H")]
    pub energy: Option<String>,
    /// Zero-set sample count
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output file (stdout when omitted)
    #[arg(long, short = 'o')]
    pub output: Option<String>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct VerifyInvolutionArgs {
    #[command(flatten)]
    pub model: ModelOpts,
    /// Family member (repeatable); the energy joins automatically
    #[arg(long)]
    pub f: Vec<String>,
    /// Energy the family flows under; the model's own when omitted
    #[arg(long = "H")]
    pub energy: Option<String>,
    /// Joint zero-set sample count
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output file (stdout when omitted)
    #[arg(long, short = 'o')]
    pub output: Option<String>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct CompareReductionArgs {
    #[command(flatten)]
    pub model: ModelOpts,
    /// Content-route potential in the V1.. symbols; adds the content leg
    #[arg(long)]
    pub volume_potential: Option<String>,
    #[command(flatten)]
    pub integrator: IntegratorOpts,
    /// Initial Cartesian coordinate value `name=value` (repeatable)
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
    /// Output file (stdout when omitted)
    #[arg(long, short = 'o')]
    pub output: Option<String>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct BracketArgs {
    /// Chart owner: catalog id or alias
    #[arg(long)]
    pub chart: Option<String>,
    /// First function
    #[arg(long)]
    pub f: Option<String>,
    /// Second function
    #[arg(long)]
    pub g: Option<String>,
    /// Exact polynomial bracket instead of a pointwise value
    #[arg(long)]
    pub symbolic: bool,
    /// Evaluation point `name=value` (repeatable)
    #[arg(long = "at", value_name = "NAME=VALUE")]
    pub at: Vec<String>,
    /// Output file (stdout when omitted)
    #[arg(long, short = 'o')]
    pub output: Option<String>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct CatalogArgs {
    /// Output file (stdout when omitted)
    #[arg(long, short = 'o')]
    pub output: Option<String>,
}

/// Run a parsed command line to completion.
pub fn execute(cli: Cli) -> Result<RunOutput, CliError> {
    let file = match &cli.config {
        Some(path) => Some(ConfigFile::load(path)?),
        None => None,
    };
    let cfg = file.as_ref();
    let seed = match cli.seed {
        Some(s) => s,
        None => config::pick_parsed(None, cfg, "run", "seed")?.unwrap_or(42),
    };
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("PARTINT_OUT_DIR").map(PathBuf::from));
    let command = match cli.command {
        Some(c) => c,
        None => command_from_config(cfg)?,
    };
    let out_dir = out_dir.as_deref();
    match &command {
        Command::Simulate(args) => commands::simulate(args, cfg, seed, out_dir),
        Command::VerifyIntegral(args) => commands::verify_integral(args, cfg, seed, out_dir),
        Command::VerifyInvolution(args) => commands::verify_involution(args, cfg, seed, out_dir),
        Command::CompareReduction(args) => commands::compare_reduction(args, cfg, out_dir),
        Command::Bracket(args) => commands::bracket(args, cfg, out_dir),
        Command::Catalog(args) => commands::catalog(args, cfg, out_dir),
    }
}

/// Fall back to `[run] command` when no subcommand was given.
fn command_from_config(cfg: Option<&ConfigFile>) -> Result<Command, CliError> {
    let Some(slug) = cfg.and_then(|c| c.get("run", "command")) else {
        return Err(CliError::Validation(
            "no command: pass a subcommand or set [run] command in the config".to_string(),
        ));
    };
    match slug {
        "simulate" => Ok(Command::Simulate(SimulateArgs::default())),
        "verify-integral" => Ok(Command::VerifyIntegral(VerifyIntegralArgs::default())),
        "verify-involution" => Ok(Command::VerifyInvolution(VerifyInvolutionArgs::default())),
        "compare-reduction" => Ok(Command::CompareReduction(CompareReductionArgs::default())),
        "bracket" => Ok(Command::Bracket(BracketArgs::default())),
        "catalog" => Ok(Command::Catalog(CatalogArgs::default())),
        other => Err(CliError::Validation(format!(
            "[run] command: unknown command `{other}`"
        ))),
    }
}

/// Write `text` to the chosen output, or hand it back for stdout.
fn deliver(
    text: String,
    exit_code: i32,
    output: Option<&str>,
    out_dir: Option<&Path>,
) -> Result<RunOutput, CliError> {
    let Some(rel) = output else {
        return Ok(RunOutput::stdout(exit_code, text));
    };
    let path = resolve_out_path(rel, out_dir);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::Runtime(format!("cannot create `{}`: {e}", parent.display()))
            })?;
        }
    }
    std::fs::write(&path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write `{}`: {e}", path.display())))?;
    Ok(RunOutput {
        exit_code,
        text: String::new(),
        files: vec![path],
    })
}

fn resolve_out_path(output: &str, out_dir: Option<&Path>) -> PathBuf {
    let path = PathBuf::from(output);
    match out_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path,
    }
}

/// Exit-code classification of verification-layer failures: problems with
/// the request or its data validate (1), failures of the computation run (2).
fn classify_reduction(e: ReductionError) -> CliError {
    match e {
        ReductionError::PreconditionViolation(_)
        | ReductionError::NotAMomentumCoordinate(_)
        | ReductionError::NonCyclicCoordinate { .. }
        | ReductionError::InvalidInput(_)
        | ReductionError::RankDeficient { .. }
        | ReductionError::MomentumMatchResidual { .. }
        | ReductionError::Model(_) => CliError::Validation(e.to_string()),
        ReductionError::Poisson(ref p) => match p {
            PoissonError::Eval(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        },
        ReductionError::SamplerFailure { .. }
        | ReductionError::DegenerateGradient
        | ReductionError::Eval(_)
        | ReductionError::Dynamics(_) => CliError::Runtime(e.to_string()),
    }
}

/// Same split for the integrator: setup problems validate, the flow
/// leaving its domain or a stalled solver is a runtime failure.
fn classify_dynamics(e: DynamicsError) -> CliError {
    match e {
        DynamicsError::InvalidSpec(_) | DynamicsError::SeparabilityViolation { .. } => {
            CliError::Validation(e.to_string())
        }
        DynamicsError::Chart(ref p) => match p {
            PoissonError::Eval(_) | PoissonError::NonFinite { .. } => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        },
        DynamicsError::NonConvergence { .. } | DynamicsError::Domain(_) => {
            CliError::Runtime(e.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_outputs_land_in_the_output_directory() {
        let dir = Path::new("/runs");
        assert_eq!(
            resolve_out_path("a/t.tsv", Some(dir)),
            PathBuf::from("/runs/a/t.tsv")
        );
        assert_eq!(
            resolve_out_path("/abs/t.tsv", Some(dir)),
            PathBuf::from("/abs/t.tsv")
        );
        assert_eq!(resolve_out_path("t.tsv", None), PathBuf::from("t.tsv"));
    }

    #[test]
    fn config_supplies_the_command_when_no_subcommand_is_given() {
        let cfg = ConfigFile::parse("[run]\ncommand = catalog\n").unwrap();
        assert!(matches!(
            command_from_config(Some(&cfg)).unwrap(),
            Command::Catalog(_)
        ));
        let err = command_from_config(None).unwrap_err();
        assert!(err.to_string().contains("pass a subcommand"), "{err}");
        let cfg = ConfigFile::parse("[run]\ncommand = plot\n").unwrap();
        let err = command_from_config(Some(&cfg)).unwrap_err();
        assert!(err.to_string().contains("unknown command `plot`"), "{err}");
    }

    #[test]
    fn verdict_failures_and_data_problems_split_into_exit_codes() {
        let validation = classify_reduction(ReductionError::PreconditionViolation(
            "angular momentum".into(),
        ));
        assert_eq!(validation.exit_code(), 1);
        let runtime = classify_reduction(ReductionError::DegenerateGradient);
        assert_eq!(runtime.exit_code(), 2);
        let runtime = classify_dynamics(DynamicsError::Domain("pole".into()));
        assert_eq!(runtime.exit_code(), 2);
        let validation = classify_dynamics(DynamicsError::InvalidSpec("dt".into()));
        assert_eq!(validation.exit_code(), 1);
    }

    // The command-line surface stays parseable; clap catches conflicting
    // definitions only when the parser is actually built.
    #[test]
    fn command_line_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn spec_example_flags_parse() {
        let cli = Cli::try_parse_from([
            "partint",
            "verify-integral",
            "--model",
            "central-force",
            "--f",
            "prho",
            "--H",
            "G",
        ])
        .unwrap();
        match cli.command {
            Some(Command::VerifyIntegral(args)) => {
                assert_eq!(args.model.model.as_deref(), Some("central-force"));
                assert_eq!(args.f.as_deref(), Some("prho"));
                assert_eq!(args.energy.as_deref(), Some("G"));
            }
            other => panic!("parsed into {other:?}"),
        }
        let cli = Cli::try_parse_from([
            "partint",
            "bracket",
            "--chart",
            "central-force",
            "--f",
            "prho",
            "--g",
            "K",
            "--symbolic",
        ])
        .unwrap();
        match cli.command {
            Some(Command::Bracket(args)) => assert!(args.symbolic),
            other => panic!("parsed into {other:?}"),
        }
    }
}
