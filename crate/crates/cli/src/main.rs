use std::io::Write;

use clap::{Parser, ValueEnum};
use formred_cli::{run, Command, JobConfig, OutputMode};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Covariant,
    Reduce,
    Classify,
    Bounds,
    Selftest,
}

/// Reduce binary forms and check the bounds around their covariant point.
#[derive(Debug, Parser)]
#[command(name = "formred", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// JSON file, `-` for stdin, or an inline JSON object.
    input: Option<String>,
    /// Cluster radius; defaults to the largest value below every threshold.
    #[arg(long)]
    eps: Option<f64>,
    /// Covariant solver tolerance, scaled by the degree.
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    /// Iteration cap for both the root finder and the covariant solver.
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Reduction iteration limit.
    #[arg(long, default_value_t = 64)]
    max_steps: usize,
    /// Sweep seed for selftest.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Sweep size for selftest.
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// Use translations and inversions only.
    #[arg(long)]
    classic: bool,
    /// Print JSON.
    #[arg(long, conflicts_with = "plain")]
    json: bool,
    /// Print `key value` lines with 15 significant digits (default).
    #[arg(long)]
    plain: bool,
}

fn main() {
    let a = Args::parse();
    let command = match a.command {
        Cmd::Covariant => Command::Covariant,
        Cmd::Reduce => Command::Reduce,
        Cmd::Classify => Command::Classify,
        Cmd::Bounds => Command::Bounds,
        Cmd::Selftest => Command::Selftest,
    };
    let cfg = JobConfig {
        command,
        input: a.input,
        eps: a.eps,
        tol: a.tol,
        max_iter: a.max_iter,
        max_steps: a.max_steps,
        seed: a.seed,
        count: a.count,
        classic: a.classic,
        output: if a.json { OutputMode::Json } else { OutputMode::Plain },
    };
    let out = run(&cfg);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(out.code);
}
