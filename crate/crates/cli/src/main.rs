//! `quadgauss` command-line front end.
//!
//! Exit codes: 0 success, 1 malformed input or invalid parameters, 2 result
//! below the counting floor, 3 exact filter exhausted, 4 densifier mistake
//! budget exhausted, 5 validation failure.

mod commands;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Gaussian volumes, conditional samples and hard instances for degree-2
/// polynomial threshold functions.
#[derive(Parser, Debug)]
#[command(name = "quadgauss", version, about)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command.
#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Accuracy parameter in (0, 1]. Defaults to 0.05, or 0.1 for densify.
    #[arg(long, global = true, value_parser = parse_real)]
    pub eps: Option<f64>,
    /// Grid step, a power of two such as 2^-8 or 0.00390625.
    #[arg(long, global = true, value_parser = parse_real, default_value = "2^-8")]
    pub tau: f64,
    /// Truncation radius B (a multiple of tau); default is derived from n and eps.
    #[arg(long = "trunc-B", global = true, value_parser = parse_real)]
    pub trunc_b: Option<f64>,
    /// Coefficient rounding granularity, a power of two.
    #[arg(long, global = true, value_parser = parse_real, default_value = "2^-20")]
    pub gamma: f64,
    /// Random seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of samples to draw.
    #[arg(long, global = true, default_value_t = 1)]
    pub samples: usize,
    /// Resample until the original polynomial is nonnegative.
    #[arg(long, global = true)]
    pub filter: bool,
    /// Emit samples as one JSON document instead of plain text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Instance file (JSON).
    #[arg(long, global = true)]
    pub instance: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate Pr[p(G) ≥ 0] for G ~ N(0, I).
    Count,
    /// Draw points from N(0, I) conditioned on p ≥ 0.
    Sample,
    /// Generate a Subset-Sum hard instance with its radii and solutions.
    Geninstance(GenArgs),
    /// Run the densifier against a planted target and validate the result.
    Densify(DensifyArgs),
    /// Check the shipped corpus against closed forms and invariants.
    Validate,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantArg {
    Cube01,
    Pm1,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Vertex encoding; required unless --instance is given.
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Target sum.
    #[arg(long)]
    pub w0: Option<u64>,
    /// Comma-separated nonnegative weights.
    #[arg(long, value_delimiter = ',')]
    pub w: Vec<u64>,
    /// Penalty constant c (at least 1).
    #[arg(long, default_value_t = quadgauss::hardness::DEFAULT_C)]
    pub c: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LearnerArg {
    Ellipsoid,
    Perceptron,
}

#[derive(Args, Debug)]
pub struct DensifyArgs {
    /// Mistake budget M.
    #[arg(long, default_value_t = 64)]
    pub budget: usize,
    /// Failure probability delta in (0, 1].
    #[arg(long, value_parser = parse_real, default_value = "0.1")]
    pub delta: f64,
    /// Target density; defaults to 1/(8M).
    #[arg(long, value_parser = parse_real)]
    pub density_gamma: Option<f64>,
    /// Online halfspace learner driving the loop.
    #[arg(long, value_enum, default_value = "ellipsoid")]
    pub learner: LearnerArg,
    /// Monte Carlo draws for each validation measurement.
    #[arg(long, default_value_t = 100_000)]
    pub validation_samples: usize,
    /// Write the transcript as JSON lines to this file.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
}

/// Accepts decimal numbers and powers of two written `2^k`.
fn parse_real(s: &str) -> Result<f64, String> {
    let v = match s.strip_prefix("2^") {
        Some(exp) => exp.parse::<i32>().map(|k| 2f64.powi(k)).map_err(|e| format!("bad exponent in {s}: {e}"))?,
        None => s.parse::<f64>().map_err(|e| format!("bad number {s}: {e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} is not finite"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Count => commands::count(&cli.global),
        Command::Sample => commands::sample(&cli.global),
        Command::Geninstance(args) => commands::geninstance(&cli.global, args),
        Command::Densify(args) => commands::densify(&cli.global, args),
        Command::Validate => validate::run(&cli.global),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(fail) => {
            eprintln!("error: {}", fail.message);
            ExitCode::from(fail.code)
        }
    }
}
