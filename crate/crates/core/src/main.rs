//! `wdvv`: deterministic verification reports for the trigonometric WDVV
//! system and the exact coupling-constant table audit.

use clap::{Args, Parser, Subcommand};
use wdvv::cli::{parse_multiplicities, parse_selector, run, CliError, Command, RunConfig};

/// Worker-thread count override (default: all cores).
const THREADS_ENV: &str = "WDVV_THREADS";

#[derive(Parser)]
#[command(
    name = "wdvv",
    version,
    about = "Exact root-system coupling constants and WDVV verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Audit the printed c table against the exact oracle
    Table(CommonArgs),
    /// Verify the WDVV equations at sampled chamber points
    Verify(CommonArgs),
    /// Check the fiber-wise Dunkl identity
    Dunkl(CommonArgs),
    /// Adjudicate the gamma factor under both hypotheses
    GammaScan(CommonArgs),
    /// Report c as a polynomial in the orbit multiplicities
    Cpoly(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// System selector like "B2", or "all"
    #[arg(long, default_value = "all")]
    system: String,
    /// Number of sampled chamber points
    #[arg(long, default_value_t = 10)]
    samples: usize,
    /// RNG seed for chamber sampling
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Minimum chamber margin for sampled points
    #[arg(long, default_value_t = 0.2)]
    margin: f64,
    /// Residual tolerance
    #[arg(long = "tol", default_value_t = 1e-9)]
    tol: f64,
    /// Gamma hypothesis: half, full, or scan
    #[arg(long, default_value = "scan")]
    gamma_hypothesis: String,
    /// Per-orbit multiplicities, e.g. "short=2,long=3/2"
    #[arg(long)]
    k: Option<String>,
    /// Output format: json, csv, or md
    #[arg(long, default_value = "json")]
    format: String,
}

fn build_config(command: Command, args: &CommonArgs) -> Result<RunConfig, CliError> {
    Ok(RunConfig {
        command,
        selector: args.system.clone(),
        systems: parse_selector(&args.system)?,
        samples: args.samples,
        seed: args.seed,
        margin: args.margin,
        tolerance: args.tol,
        hypothesis: args.gamma_hypothesis.parse().map_err(CliError::Usage)?,
        multiplicities: match &args.k {
            Some(s) => parse_multiplicities(s)?,
            None => Vec::new(),
        },
        format: args.format.parse().map_err(CliError::Usage)?,
    })
}

fn main() {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        match value.parse::<usize>() {
            Ok(n) if n >= 1 => {
                // a failure here means a pool already exists; keep going
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("wdvv: {THREADS_ENV} must be a positive integer (got {value:?})");
                std::process::exit(2);
            }
        }
    }
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::Table(a) => (Command::Table, a),
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Dunkl(a) => (Command::Dunkl, a),
        Cmd::GammaScan(a) => (Command::GammaScan, a),
        Cmd::Cpoly(a) => (Command::Cpoly, a),
    };
    let outcome = build_config(command, args).and_then(|config| run(&config));
    match outcome {
        Ok(out) => {
            print!("{}", out.report);
            std::process::exit(out.exit_code);
        }
        Err(e) => {
            eprintln!("wdvv: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
