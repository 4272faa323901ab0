use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod bench;
mod instance;
mod runner;

use runner::{Algorithm, Params};

#[derive(Parser)]
#[command(
    name = "congest-minor",
    version,
    about = "Distributed graph algorithms on minor-free networks, simulated in CONGEST"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it as an edge list or JSON.
    Gen(GenArgs),
    /// Expander decomposition with independent verification.
    Decompose(RunArgs),
    /// (1−ε)-approximate maximum weight matching.
    Mwm(RunArgs),
    /// Maximum independent set.
    Mis(RunArgs),
    /// Maximum cardinality matching on planar graphs.
    Mcm(RunArgs),
    /// Correlation clustering.
    Cc(RunArgs),
    /// One-sided property test (forest or planar).
    Proptest(RunArgs),
    /// Low-diameter decomposition.
    Ldd(RunArgs),
    /// Decomposition certificates plus, on weighted graphs, the matching invariants.
    Verify(RunArgs),
    /// Sweep an algorithm over instances and seeds.
    Bench(bench::BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Family: grid W H | cycle N | path N | tree N | planar N | star K | gadget T I J
    family: String,
    params: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random integer weights in 1..=W.
    #[arg(long)]
    weights: Option<u64>,
    /// Output path; `.json` selects JSON, anything else an edge list. Stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct RunArgs {
    /// Graph file (`.json` or edge list).
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    params: Params,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Ok(false) when an invariant check failed.
fn dispatch(cmd: Command) -> anyhow::Result<bool> {
    let (alg, args) = match cmd {
        Command::Gen(a) => return generate(a).map(|_| true),
        Command::Bench(a) => return bench::run(a),
        Command::Decompose(a) => (Algorithm::Decompose, a),
        Command::Mwm(a) => (Algorithm::Mwm, a),
        Command::Mis(a) => (Algorithm::Mis, a),
        Command::Mcm(a) => (Algorithm::Mcm, a),
        Command::Cc(a) => (Algorithm::Cc, a),
        Command::Proptest(a) => (Algorithm::Proptest, a),
        Command::Ldd(a) => (Algorithm::Ldd, a),
        Command::Verify(a) => (Algorithm::Verify, a),
    };
    let g = instance::load(&args.graph)?;
    let report = runner::run(alg, &g, &args.params)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string(&report)?)?;
    Ok(report.invariants.ok)
}

fn generate(a: GenArgs) -> anyhow::Result<()> {
    let fam = instance::family(&a.family, &a.params)?;
    let g = instance::build(&fam, a.seed, a.weights)?;
    match a.out {
        Some(path) => {
            let text = if path.extension().is_some_and(|x| x == "json") { g.to_json() } else { g.to_edge_list() };
            std::fs::write(&path, text)?;
        }
        None => print!("{}", g.to_edge_list()),
    }
    Ok(())
}
