use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cheeger_cli::error::{CliError, EXIT_OK};
use cheeger_cli::fuzz::{run_fuzz, FuzzConfig};
use cheeger_cli::pipeline::{run_analyze, run_generate, run_verify, Options};
use cheeger_core::io::parse_graph_tsv;
use cheeger_core::{ChainSpec, Family, Tolerances, DEFAULT_MAX_EXACT_N};

/// Spectral and conductance analysis of reversible Markov chains.
#[derive(Parser)]
#[command(name = "cheeger", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full report: stationary distribution, spectrum, conductance, certificate.
    Analyze(InputArgs),
    /// Certificate slacks only; exits 3 on a violation.
    Verify(InputArgs),
    /// Emit chain JSON for a named family.
    Generate(GenerateArgs),
    /// Certify a seeded corpus of random reversible chains.
    Fuzz(FuzzArgs),
}

#[derive(Args)]
struct AnalysisFlags {
    #[arg(long, default_value_t = 1e-9)]
    tol_stochastic: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol_stationary: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_balance: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_eig: f64,
    /// Largest n for exhaustive conductance.
    #[arg(long, default_value_t = DEFAULT_MAX_EXACT_N)]
    max_exact_n: usize,
    /// Use the eigenvector sweep cut instead of enumeration (not rigorous).
    #[arg(long)]
    sweep_only: bool,
    /// Include eigenvectors in the report.
    #[arg(long)]
    full: bool,
    /// Laziness for a random walk read from a graph TSV.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
}

impl AnalysisFlags {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            stochastic: self.tol_stochastic,
            stationary: self.tol_stationary,
            balance: self.tol_balance,
            eig: self.tol_eig,
        }
    }

    fn options(&self) -> Options {
        Options {
            tol: self.tolerances(),
            max_exact_n: self.max_exact_n,
            sweep_only: self.sweep_only,
            full: self.full,
            alpha: self.alpha,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Chain JSON or weighted-graph TSV; `-` or omitted reads stdin.
    input: Option<PathBuf>,
    #[command(flatten)]
    flags: AnalysisFlags,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum FamilyName {
    TwoState,
    Complete,
    Cycle,
    Path,
    Hypercube,
    Graph,
    Metropolis,
    Random,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    #[arg(long)]
    n: Option<usize>,
    /// two_state: leave probability of state 0.
    #[arg(long)]
    a: Option<f64>,
    /// two_state: leave probability of state 1.
    #[arg(long)]
    b: Option<f64>,
    /// hypercube dimension.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Laziness `alpha` in `alpha I + (1 - alpha) P`.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// random: fraction of state pairs joined by an edge.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// graph, metropolis: weighted edge TSV.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// metropolis: comma-separated target weights.
    #[arg(long, value_delimiter = ',')]
    target: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-9)]
    tol_stochastic: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_balance: f64,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Directory receiving the worst-slack chains as JSON.
    #[arg(long)]
    emit_witnesses: Option<PathBuf>,
    #[command(flatten)]
    flags: AnalysisFlags,
}

fn read_input(path: Option<&PathBuf>) -> Result<(String, String), CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map(|t| (t, p.display().to_string()))
            .map_err(|e| CliError::io(format!("{}: {e}", p.display()))),
        _ => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| CliError::io(format!("stdin: {e}")))?;
            Ok((text, "stdin".into()))
        }
    }
}

fn require<T>(v: Option<T>, flag: &str, family: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::invalid("ValidationError", format!("--{flag} is required for {family}")))
}

fn graph_edges(args: &GenerateArgs, family: &str) -> Result<Vec<cheeger_core::WeightedEdge>, CliError> {
    let path = require(args.graph.as_ref(), "graph", family)?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    Ok(parse_graph_tsv(&text)?)
}

fn family(args: &GenerateArgs) -> Result<Family, CliError> {
    let n = |name| require(args.n, "n", name);
    Ok(match args.family {
        FamilyName::TwoState => Family::TwoState {
            a: require(args.a, "a", "two_state")?,
            b: require(args.b, "b", "two_state")?,
        },
        FamilyName::Complete => Family::Complete { n: n("complete")? },
        FamilyName::Cycle => Family::Cycle { n: n("cycle")? },
        FamilyName::Path => Family::Path { n: n("path")? },
        FamilyName::Hypercube => Family::Hypercube {
            d: require(args.d, "d", "hypercube")?,
        },
        FamilyName::Graph => Family::WalkOnGraph {
            edges: graph_edges(args, "graph")?,
        },
        FamilyName::Metropolis => Family::Metropolis {
            target: require(args.target.clone(), "target", "metropolis")?,
            proposal: graph_edges(args, "metropolis")?,
        },
        FamilyName::Random => Family::RandomReversible {
            n: n("random")?,
            density: args.density,
            seed: args.seed,
        },
    })
}

fn emit(value: &impl Serialize) {
    print_stdout(&serde_json::to_string_pretty(value).expect("reports serialize"));
}

// A closed pipe on stdout is not an error worth a panic.
fn print_stdout(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let (text, source) = read_input(args.input.as_ref())?;
            let (report, code) = run_analyze(&text, &source, &args.flags.options())?;
            eprintln!("analyzed {source}: n = {}", report.chain.n);
            emit(&report);
            Ok(code)
        }
        Command::Verify(args) => {
            let (text, source) = read_input(args.input.as_ref())?;
            let (report, code) = run_verify(&text, &source, &args.flags.options())?;
            eprintln!("{source}: {}", report.status);
            for v in &report.violations {
                eprintln!("  {v}");
            }
            emit(&report);
            Ok(code)
        }
        Command::Generate(args) => {
            let spec = ChainSpec::new(family(&args)?).lazy(args.alpha);
            let tol = Tolerances {
                stochastic: args.tol_stochastic,
                balance: args.tol_balance,
                ..Tolerances::default()
            };
            let file = run_generate(&spec, &tol)?;
            eprintln!("generated chain with n = {}", file.n);
            print_stdout(&file.to_json());
            Ok(EXIT_OK)
        }
        Command::Fuzz(args) => {
            let cfg = FuzzConfig {
                count: args.count,
                n_min: args.n_min,
                n_max: args.n_max,
                seed: args.seed,
            };
            let summary = run_fuzz(&cfg, &args.flags.options(), args.emit_witnesses.as_deref())?;
            eprintln!(
                "fuzz: {} chains, {} eigenvalues certified, {} failing chains, {} errors",
                summary.chains_tested,
                summary.eigenvalues_certified,
                summary.failed_chains,
                summary.errors.len()
            );
            emit(&summary);
            Ok(summary.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            emit(&e.to_json());
            e.exit_code
        }
    };
    ExitCode::from(code as u8)
}
