//! `squarepack`: build, check, verify and render square packings.
//!
//! Exit codes: 0 success, 1 violations found, 2 runtime failure, 64 usage.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "squarepack",
    version,
    about = "Near-perfect square packings at desk scale"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pack squares f(n)^-t for n0 <= n < nmax into the target square.
    Pack(PackArgs),
    /// Lower bounds for M and N0 (AP or prime families).
    Bounds(BoundsArgs),
    /// Evaluate the ten packing conditions at n0.
    CheckConditions(ConditionArgs),
    /// Verify a placement manifest.
    Verify(VerifyArgs),
    /// Render a placement manifest as SVG.
    Render(RenderArgs),
    /// Finite-range checks of the prime bounds and prime-sum estimates.
    Lemmas(LemmaArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Family specifier: ap:q=<real>,r=<real> | prime | twinprime:cprime=<real> | powerlog:a=<real>,b=<real>
    #[arg(long, default_value = "ap:q=1,r=0")]
    family: String,
    /// Exponent t in (1/2, 1); a fraction such as 2/3 is accepted.
    #[arg(long, value_parser = parse_real)]
    t: f64,
    /// Lattice scale M.
    #[arg(long = "M", short = 'M')]
    m: u64,
    /// First index n0.
    #[arg(long)]
    n0: u64,
    #[arg(long, value_enum, default_value = "double")]
    precision: PrecisionArg,
}

#[derive(Args, Debug)]
struct PackArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Stop once every index below nmax is placed.
    #[arg(long)]
    nmax: u64,
    /// Fail as soon as the weighted-perimeter budget is exceeded.
    #[arg(long)]
    strict_budget: bool,
    /// Manifest output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG output path.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// ap:q=<real>,r=<real> or prime.
    #[arg(long, default_value = "ap:q=1,r=0")]
    family: String,
    /// Values of t (comma separated or repeated).
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    t: Vec<f64>,
    /// Print the published N0 table next to the computed values.
    #[arg(long)]
    table1: bool,
    /// Gap exponent for the prime family.
    #[arg(long, default_value_t = squarepack_core::conditions::DEFAULT_THETA)]
    theta: f64,
    /// Index from which the gap hypothesis is assumed.
    #[arg(long, default_value_t = 1.0)]
    n_theta: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ConditionArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Manifest to verify.
    manifest: Option<PathBuf>,
    /// Tolerance as a multiple of f(n0)^-t.
    #[arg(long, default_value_t = squarepack_core::verifier::DEFAULT_TOLERANCE_SCALE)]
    tolerance_scale: f64,
    /// Instead of a manifest, compare the sweep against brute force on
    /// random instances.
    #[arg(long, conflicts_with = "manifest")]
    self_test: bool,
    /// Seed for --self-test.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of --self-test instances.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Manifest to render.
    manifest: PathBuf,
    /// SVG output path.
    #[arg(long)]
    svg: PathBuf,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    /// Check prime bounds for all primes up to this value.
    #[arg(long, default_value_t = 100_000_000)]
    limit: u64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.55, 0.75, 0.9])]
    t: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1_000u64, 10_000, 100_000, 1_000_000])]
    x: Vec<u64>,
    #[arg(long)]
    json: bool,
}

/// A decimal or a fraction `p/q`.
fn parse_real(s: &str) -> Result<f64, String> {
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    match s.split_once('/') {
        Some((p, q)) => Ok(parse(p)? / parse(q)?),
        None => parse(s),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(commands::EXIT_USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Pack(a) => commands::pack(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::CheckConditions(a) => commands::check_conditions(a),
        Command::Verify(a) => commands::verify(a),
        Command::Render(a) => commands::render(a),
        Command::Lemmas(a) => commands::lemmas(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
