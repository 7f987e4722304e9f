use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pairsolve::commands::{cmd_gen, cmd_profile, cmd_solve, cmd_verify, Output, SolveFlags, EXIT_ERROR};

/// Non-singular zeros of pairs of additive forms of degree p^tau (p - 1).
#[derive(Parser)]
#[command(name = "pairsolve", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance and print a solution file.
    Solve {
        instance: PathBuf,
        /// Precision N of the printed residues.
        #[arg(long, short = 'n', default_value_t = 6)]
        precision: u32,
        /// Cross-check with the independent subset-sum search.
        #[arg(long)]
        oracle: bool,
        /// Print the strategy log to stderr.
        #[arg(long)]
        log: bool,
        /// Accepted for compatibility; normalisation never uses randomness.
        #[arg(long)]
        seedless_normalise: bool,
        /// Fail instead of falling back when an excluded case is reached.
        #[arg(long)]
        strict: bool,
        /// Print a JSON document instead of the line format.
        #[arg(long)]
        json: bool,
        /// Write the solution here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print a pseudo-random instance.
    Gen {
        #[arg(long, default_value_t = 5)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        tau: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// s = 2k^2 + slack.
        #[arg(long, default_value_t = 1)]
        slack: usize,
        /// any, uniform, or a branch key such as r=-1 or few-level0.
        #[arg(long, default_value = "any")]
        hint: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check a solution file against an instance.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Print the level profile and the branch the solver would take.
    Profile { instance: PathBuf },
}

fn emit(out: Output, to: Option<PathBuf>) -> ExitCode {
    let mut code = out.code;
    match to {
        Some(path) if code == 0 => {
            if let Err(e) = std::fs::write(&path, &out.stdout) {
                eprintln!("error: {}: {e}", path.display());
                code = EXIT_ERROR;
            }
        }
        _ => print!("{}", out.stdout),
    }
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Solve { instance, precision, oracle, log, seedless_normalise: _, strict, json, output } => {
            let flags = SolveFlags { precision, oracle, log, strict, json };
            emit(cmd_solve(&instance, &flags), output)
        }
        Cmd::Gen { p, tau, seed, slack, hint, output } => emit(cmd_gen(p, tau, seed, slack, &hint), output),
        Cmd::Verify { instance, solution } => emit(cmd_verify(&instance, &solution), None),
        Cmd::Profile { instance } => emit(cmd_profile(&instance), None),
    }
}
