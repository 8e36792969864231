//! `brw`: reproducible runs of the branching-random-walk pipelines.
//!
//! Exit codes: 0 success, 2 usage or invalid parameters, 3 a resource guard
//! was hit, 4 a numeric procedure failed.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

use report::Format;

#[derive(Parser, Debug)]
#[command(
    name = "brw",
    version,
    about = "Branching random walks with geometric steps",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Contraction ratio in (0, 1); excludes --minpoly.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Minimal polynomial of 1/lambda, ascending integer coefficients ("-1,-1,1" is x^2-x-1).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub minpoly: Option<String>,
    /// Digit values, comma separated.
    #[arg(long, global = true, allow_hyphen_values = true, default_value = "0,1")]
    pub digits: String,
    /// Digit probabilities, comma separated (default uniform).
    #[arg(long, global = true)]
    pub probs: Option<String>,
    /// Tree arity.
    #[arg(long, global = true, default_value_t = 2)]
    pub arity: usize,
    /// Seed of the label oracle.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Output format (each subcommand has its own default).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON object of flag values, e.g. {"subcommand": "simulate", "lambda": 0.7, "depth": 12}.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Histogram of depth-n leaf values. CSV: bin,lo,hi,count
    Simulate(commands::SimulateArgs),
    /// Atoms of mu_n (one tree) or nu_n. CSV: x,weight
    Atoms(commands::AtomsArgs),
    /// Seed-average of binned mu_n against binned nu_n. CSV: bin,lo,hi,mean_mu,nu
    Expectation(commands::ExpectationArgs),
    /// Fourier transform of nu on a grid. CSV: t,re,im,abs,truncation_error
    Spectrum(commands::SpectrumArgs),
    /// E|mu_n_hat(t)|^2 with optional Monte-Carlo and shell bound. CSV: t,expected,mc,mc_stderr,bound,in_range
    Moments(commands::MomentsArgs),
    /// Truncated Sobolev integrals of nu. CSV: gamma,t_max,value,converged,last_decade_fraction
    Sobolev(commands::SobolevArgs),
    /// Pisot/Garsia classification of --minpoly. JSON
    Classify,
    /// Value of one digit string. JSON
    Digitsum(commands::DigitsumArgs),
    /// Distinct words and values seen from the root. CSV: n,word_count,distinct_values
    Words(commands::WordsArgs),
    /// Survival of the critical binary Galton-Watson cluster. CSV: n,probability,stderr
    Gw(commands::GwArgs),
    /// Base-lambda expansions of a point.
    Expansions(commands::ExpansionsArgs),
    /// Covering condition and its constant. JSON
    Cover(commands::CoverArgs),
    /// Gaps of the level-n support cover. CSV: level,alpha,beta,width
    Gaps(commands::GapsArgs),
    /// Separation of level-n digit sums. CSV: n,min_gap,normalized_gap,distinct
    Separation(commands::SeparationArgs),
    /// Maximal-vertex probe near a rational point. JSON
    Probe(commands::ProbeArgs),
}

fn main() -> ExitCode {
    let names: Vec<String> = Cli::command()
        .get_subcommands()
        .map(|s| s.get_name().to_string())
        .collect();
    let args = match config::expand_args(std::env::args_os().collect(), &names) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.common.threads {
        if n == 0
            || rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .is_err()
        {
            eprintln!("error: could not start {n} worker threads");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
