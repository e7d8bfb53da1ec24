//! `tmlab`: run catalog machines, profile resource growth, build crossing
//! NFAs, search for Karp witnesses and splice computations.
//!
//! Exit status is 0 on success, 1 on usage or input errors and 2 when an
//! experiment finds a violation or disagreement.

mod commands;
mod config;
mod report;
mod select;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "tmlab",
    version,
    about = "Crossing-sequence laboratory for one-tape Turing machines"
)]
struct Cli {
    /// Config file; defaults to ./lab.toml when present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one computation and report its resources.
    Run(RunArgs),
    /// Measure a resource over a list of input lengths and write CSV.
    Profile(ProfileArgs),
    /// Ratio-check an existing profile CSV against a growth shape.
    Check(CheckFileArgs),
    /// Build the crossing-sequence NFA and compare it with the machine.
    Nfa(NfaArgs),
    /// Minimal consistent unary DFA sizes against the Karp bound.
    Karp(KarpArgs),
    /// Cut two computations at matching crossing sequences and paste.
    Splice(SpliceArgs),
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Catalog name or machine file.
    #[arg(long)]
    machine: String,
    /// Unary input length.
    #[arg(long, conflicts_with = "input")]
    n: Option<usize>,
    /// Input word; `a^5` repeats a letter.
    #[arg(long)]
    input: Option<String>,
    /// Guess script file resolving nondeterministic choices.
    #[arg(long, conflicts_with = "oracle_script")]
    script: Option<PathBuf>,
    /// Use the catalog's witness script for a^n.
    #[arg(long)]
    oracle_script: bool,
    #[arg(long)]
    fuel: Option<u64>,
    /// Print the crossing-sequence length at every boundary.
    #[arg(long)]
    crossings: bool,
}

#[derive(Args, Debug, Default)]
pub struct ProfileArgs {
    /// Named experiment from the config file.
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    machine: Option<String>,
    /// Lengths: `64,128`, `1..100` or `2^6..2^12`.
    #[arg(long)]
    n: Option<String>,
    /// time or crossing.
    #[arg(long)]
    resource: Option<String>,
    /// strong, accept or weak.
    #[arg(long)]
    measure: Option<String>,
    /// Measure the catalog's witness computation instead of enumerating.
    #[arg(long)]
    oracle_script: bool,
    #[arg(long)]
    fuel: Option<u64>,
    #[arg(long)]
    max_branches: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a gnuplot script for the CSV here.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[command(flatten)]
    check: CheckArgs,
}

#[derive(Args, Debug, Default, Clone)]
pub struct CheckArgs {
    /// Growth shape to check against: 1, n, nlogn, nloglogn or loglogn.
    #[arg(long)]
    check: Option<String>,
    /// Fit the scale at this length (default: the smallest).
    #[arg(long, conflicts_with = "fit_upto")]
    fit_at: Option<usize>,
    /// Fit an affine envelope over all lengths up to this one.
    #[arg(long)]
    fit_upto: Option<usize>,
    #[arg(long)]
    slack: Option<f64>,
    /// Require value/n to increase strictly.
    #[arg(long)]
    increasing: bool,
}

#[derive(Args, Debug)]
pub struct CheckFileArgs {
    /// Profile CSV to read.
    csv: PathBuf,
    #[command(flatten)]
    check: CheckArgs,
}

#[derive(Args, Debug)]
pub struct NfaArgs {
    #[arg(long)]
    machine: String,
    /// Crossing-sequence length bound; defaults to the catalog's value.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 12)]
    max_len: usize,
    /// Write the NFA in text form here.
    #[arg(long)]
    export: Option<PathBuf>,
    /// Treat a disagreement as the expected result.
    #[arg(long)]
    expect_disagreement: bool,
    #[arg(long)]
    fuel: Option<u64>,
    #[arg(long)]
    max_branches: Option<usize>,
}

#[derive(Args, Debug)]
pub struct KarpArgs {
    /// L0, LAM or coLAM.
    #[arg(long, required_unless_present = "bits")]
    language: Option<String>,
    /// Read membership bits (one 0/1 per line, n = 0 first) instead.
    #[arg(long, conflicts_with = "language")]
    bits: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    n_max: usize,
    /// Only print witness rows.
    #[arg(long)]
    witnesses_only: bool,
    /// Fail unless at least this many witnesses are found.
    #[arg(long)]
    min_witnesses: Option<usize>,
    /// Also write the table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpliceArgs {
    #[arg(long)]
    machine: String,
    /// Word run by the first computation, which supplies the suffix.
    #[arg(long)]
    input1: String,
    #[arg(long)]
    b1: usize,
    /// Word run by the second computation, which supplies the prefix.
    #[arg(long)]
    input2: String,
    #[arg(long)]
    b2: usize,
    #[arg(long)]
    script1: Option<PathBuf>,
    #[arg(long)]
    script2: Option<PathBuf>,
    /// Use catalog witness scripts for both (unary inputs).
    #[arg(long, conflicts_with_all = ["script1", "script2"])]
    oracle_script: bool,
    #[arg(long)]
    fuel: Option<u64>,
}

/// What a command concluded, as opposed to failing to run.
pub enum Status {
    Ok,
    Failed(String),
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
    let result = config::LabConfig::load(cli.config.as_deref()).and_then(|cfg| match cli.command {
        Command::Run(a) => commands::run(&cfg, a),
        Command::Profile(a) => commands::profile(&cfg, a),
        Command::Check(a) => commands::check_file(&cfg, a),
        Command::Nfa(a) => commands::nfa(&cfg, a),
        Command::Karp(a) => commands::karp(a),
        Command::Splice(a) => commands::splice(&cfg, a),
    });
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed(why)) => {
            eprintln!("tmlab: {why}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("tmlab: {e:#}");
            ExitCode::from(1)
        }
    }
}
