//! The `wfsound` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wfsound_core::generators::{chain, expand_weights, gen_dnf_net, gen_family, DnfFormula, Family};
use wfsound_core::io::{load_file, save_json, Designation};
use wfsound_core::reductions::reduce_fixpoint;
use wfsound_core::{Net, NetError};
use wfsound_smt::{SmtError, SolverConfig};

use crate::bench::{run_bench_suite, BenchError, BenchParams, Suite};
use crate::pipelines::{analyze, AnalysisError, AnalysisOptions};
use crate::verdict::{Outcome, Property};

pub const EXIT_SOUND: i32 = 0;
pub const EXIT_UNSOUND: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INPUT: i32 = 65;
pub const EXIT_SOLVER: i32 = 70;

#[derive(Parser, Debug)]
#[command(
    name = "wfsound",
    version,
    about = "Generalised and structural soundness of workflow nets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide or semi-decide a soundness property of a net.
    Analyze(AnalyzeArgs),
    /// Write a generated net as JSON.
    Generate(GenerateArgs),
    /// Apply the reduction rules until none applies.
    Reduce {
        net: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Write the applied rule steps as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Replace arc weights by the unit-weight gadget.
    Expand {
        net: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run a benchmark suite and write a CSV of timings.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PropertyArg {
    GenSound,
    StructSound,
    ContSound,
    IntBounded,
    QuasiSound,
    KSound,
    /// Exact decision for free-choice nets.
    FreeChoice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// SMT solver executable (default: z3 on PATH).
    #[arg(long)]
    solver: Option<PathBuf>,
    /// Write every solver transcript into this directory.
    #[arg(long)]
    dump_smt: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long, value_enum)]
    property: PropertyArg,
    /// k for quasi-sound and k-sound.
    #[arg(long, default_value_t = 1)]
    k: u64,
    /// Apply the reduction rules before the continuous check.
    #[arg(long)]
    reduce: bool,
    #[command(flatten)]
    solver: SolverArgs,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Initial place, overriding detection.
    #[arg(long)]
    initial: Option<String>,
    /// Final place, overriding detection.
    #[arg(long = "final")]
    final_place: Option<String>,
    /// Net in native JSON or PNML (.pnml, .xml).
    net: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Nc,
    Sound,
    Nquasi,
    Nsound,
    Dnf,
    Chain,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    c: Option<u64>,
    /// Formula for the dnf family, e.g. "x1 & !x2 | x2".
    #[arg(long)]
    dnf: Option<String>,
    /// Nets to chain, in order.
    #[arg(long, num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    expand_weights: bool,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    suite: String,
    /// Largest family parameter, formula count or chain length.
    #[arg(long)]
    max_c: Option<u64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Per-instance budget in seconds.
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    #[arg(long)]
    reduce: bool,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

/// A failure with its exit code.
struct Failure(i32, String);

impl From<NetError> for Failure {
    fn from(e: NetError) -> Self {
        Failure(EXIT_INPUT, e.to_string())
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        let code = if e.is_input_error() { EXIT_INPUT } else { EXIT_SOLVER };
        Failure(code, e.to_string())
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, message.into())
}

fn solver_config(args: &SolverArgs) -> SolverConfig {
    let mut config = match &args.solver {
        Some(path) => SolverConfig::with_path(path),
        None => SolverConfig::default(),
    };
    config.dump_dir = args.dump_smt.clone();
    config
}

fn seconds(value: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(value).map_err(|_| usage(format!("invalid timeout {value}")))
}

fn load(path: &Path, designation: &Designation) -> Result<Net, Failure> {
    Ok(load_file(path, None, designation)?)
}

fn analyze_command(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let designation = Designation {
        initial: args.initial.clone(),
        final_place: args.final_place.clone(),
    };
    let net = load(&args.net, &designation)?;
    let property = match args.property {
        PropertyArg::GenSound => Property::GenSound,
        PropertyArg::StructSound => Property::StructSound,
        PropertyArg::ContSound => Property::ContSound,
        PropertyArg::IntBounded => Property::IntBounded,
        PropertyArg::QuasiSound => Property::QuasiSound { k: args.k },
        PropertyArg::KSound => Property::KSound { k: args.k },
        PropertyArg::FreeChoice => Property::FreeChoiceSound,
    };
    if args.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let mut opts = AnalysisOptions {
        reduce: args.reduce,
        timeout: args.timeout.map(seconds).transpose()?,
        ..Default::default()
    };
    opts.smt.solver = solver_config(&args.solver);
    if let Some(t) = opts.timeout {
        opts.smt.solver.timeout = t;
    }
    let verdict = match analyze(&net, property, &opts) {
        Ok(v) => v,
        Err(AnalysisError::Smt(SmtError::Spawn { path, source })) => {
            return Err(Failure(
                EXIT_SOLVER,
                format!("solver unavailable: cannot start `{path}`: {source}"),
            ))
        }
        Err(e) => return Err(e.into()),
    };
    let text = match args.format {
        OutputFormat::Json => verdict.to_json(),
        OutputFormat::Text => verdict.text_line(),
    };
    let _ = writeln!(out, "{text}");
    Ok(match verdict.outcome {
        Outcome::Sound => EXIT_SOUND,
        Outcome::Unsound => EXIT_UNSOUND,
        Outcome::Unknown => EXIT_UNKNOWN,
    })
}

fn generate_command(args: &GenerateArgs) -> Result<i32, Failure> {
    let need_c = || args.c.ok_or_else(|| usage("--c is required for this family"));
    let net = match args.family {
        FamilyArg::Nc => gen_family(Family::Nc, need_c()?)?,
        FamilyArg::Sound => gen_family(Family::Sound, need_c()?)?,
        FamilyArg::Nquasi => gen_family(Family::NQuasi, need_c()?)?,
        FamilyArg::Nsound => gen_family(Family::NSound, need_c()?)?,
        FamilyArg::Dnf => {
            let text = args
                .dnf
                .as_deref()
                .ok_or_else(|| usage("--dnf is required for the dnf family"))?;
            let phi = DnfFormula::parse(text).map_err(|e| usage(format!("bad formula: {e}")))?;
            gen_dnf_net(&phi)?
        }
        FamilyArg::Chain => {
            if args.inputs.is_empty() {
                return Err(usage("--inputs is required for the chain family"));
            }
            let nets = args
                .inputs
                .iter()
                .map(|p| load(p, &Designation::default()))
                .collect::<Result<Vec<_>, _>>()?;
            chain(&nets)?
        }
    };
    let net = if args.expand_weights { expand_weights(&net) } else { net };
    save_json(&net, &args.out)?;
    Ok(0)
}

fn reduce_command(net: &Path, out: &Path, trace: Option<&Path>) -> Result<i32, Failure> {
    let net = load(net, &Designation::default())?;
    let (reduced, steps) = reduce_fixpoint(&net)?;
    save_json(&reduced, out)?;
    if let Some(path) = trace {
        let text = serde_json::to_string_pretty(&steps).expect("traces serialize");
        std::fs::write(path, text).map_err(|e| Failure(EXIT_INPUT, format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(0)
}

fn expand_command(net: &Path, out: &Path) -> Result<i32, Failure> {
    let net = load(net, &Designation::default())?;
    save_json(&expand_weights(&net), out)?;
    Ok(0)
}

fn bench_command(args: &BenchArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let suite: Suite = args.suite.parse().map_err(usage)?;
    let mut params = BenchParams {
        workers: args.workers,
        timeout: seconds(args.timeout)?,
        ..Default::default()
    };
    params.analysis.reduce = args.reduce;
    params.analysis.smt.solver = solver_config(&args.solver);
    let rows = run_bench_suite(suite, args.max_c, &params, &args.out).map_err(|e| match e {
        BenchError::Net(e) => Failure::from(e),
        BenchError::Csv { .. } => Failure(EXIT_INPUT, e.to_string()),
    })?;
    let timeouts = rows.iter().filter(|r| r.timeout).count();
    let _ = writeln!(
        out,
        "{} rows, {timeouts} timeouts, written to {}",
        rows.len(),
        args.out.display()
    );
    Ok(0)
}

/// Parses `argv` (including the program name), runs the command and
/// returns the exit code. Results go to `out`, diagnostics to `err`.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Analyze(args) => analyze_command(args, out),
        Command::Generate(args) => generate_command(args),
        Command::Reduce { net, out, trace } => reduce_command(net, out, trace.as_deref()),
        Command::Expand { net, out } => expand_command(net, out),
        Command::Bench(args) => bench_command(args, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}
