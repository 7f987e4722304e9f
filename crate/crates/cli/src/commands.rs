//! The four subcommands, as functions from inputs to captured output and an
//! exit code.

use std::fmt::Write as _;
use std::path::Path;

use padic_pairs::forms::{check_proper, is_degenerate};
use padic_pairs::gen::{generate, Hint};
use padic_pairs::oracle::dp_nonsingular_search;
use padic_pairs::solver::{dispatch_preview, solve, verify_certificate, verify_nonsingular, Route, SolveOptions};
use padic_pairs::{derive_params, Error, FormPair};
use serde_json::json;

use crate::io::{parse_instance, parse_solution, write_instance, write_solution, SolutionFile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_OUT_OF_SCOPE: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;
pub const EXIT_VERIFY_FAILED: u8 = 4;

/// Captured result of one command.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Output {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn fail(code: u8, msg: impl Into<String>) -> Output {
        let mut stderr = msg.into();
        stderr.push('\n');
        Output { code, stdout: String::new(), stderr }
    }

    fn from_error(e: &Error) -> Output {
        Output::fail(exit_code(e), format!("error: {e}"))
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::OutsideHypotheses(_) | Error::InsufficientVariables { .. } => EXIT_OUT_OF_SCOPE,
        Error::Degenerate(_) => EXIT_DEGENERATE,
        Error::Verification { .. } => EXIT_VERIFY_FAILED,
        _ => EXIT_ERROR,
    }
}

fn read(path: &Path) -> Result<String, Output> {
    std::fs::read_to_string(path).map_err(|e| Output::fail(EXIT_ERROR, format!("error: {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<FormPair, Output> {
    let text = read(path)?;
    parse_instance(&text).map_err(|e| {
        let mut out = Output::from_error(&e);
        out.stderr = format!("{}: {}", path.display(), out.stderr);
        out
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveFlags {
    pub precision: u32,
    pub oracle: bool,
    pub log: bool,
    pub strict: bool,
    pub json: bool,
}

pub fn cmd_solve(instance: &Path, flags: &SolveFlags) -> Output {
    match load_instance(instance) {
        Ok(pair) => solve_pair(&pair, flags),
        Err(out) => out,
    }
}

pub fn solve_pair(pair: &FormPair, flags: &SolveFlags) -> Output {
    if is_degenerate(pair) {
        return Output::fail(EXIT_DEGENERATE, "error: degenerate pair: theta vanishes");
    }
    let opts = SolveOptions { precision: flags.precision, strict: flags.strict, force_branch: None };
    let sol = match solve(pair, &opts) {
        Ok(sol) => sol,
        Err(e) => {
            let mut out = Output::from_error(&e);
            if flags.log {
                if let Error::Unreachable { log, .. } | Error::InternalContradiction { log, .. } = &e {
                    out.stderr = log.iter().map(|l| format!("{l}\n")).collect::<String>() + &out.stderr;
                }
            }
            return out;
        }
    };
    let file = SolutionFile {
        p: pair.params.p,
        tau: pair.params.tau,
        precision: sol.precision,
        x: sol.assignment.clone(),
        pair: sol.nonsingular_pair,
    };
    let stdout = if flags.json {
        let doc = json!({
            "p": file.p,
            "tau": file.tau,
            "precision": file.precision,
            "x": file.x.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "nonsingular": [file.pair.0 + 1, file.pair.1 + 1],
            "det_valuation": sol.det_valuation,
            "branch": sol.branch.key(),
            "route": match sol.route { Route::Recipe => "recipe", Route::Fallback => "fallback" },
            "strategy_log": sol.strategy_log,
        });
        serde_json::to_string_pretty(&doc).unwrap() + "\n"
    } else {
        write_solution(&file)
    };
    let mut out = Output { stdout, ..Default::default() };
    if flags.log {
        for l in &sol.strategy_log {
            writeln!(out.stderr, "{l}").unwrap();
        }
        writeln!(out.stderr, "lift residual valuations: {:?}", sol.lift_trace).unwrap();
    }
    if flags.oracle {
        let gamma = pair.params.gamma;
        match dp_nonsingular_search(pair, gamma) {
            Err(e @ Error::CapacityExceeded(_)) => writeln!(out.stderr, "oracle: skipped ({e})").unwrap(),
            Err(e) => return Output::from_error(&e),
            Ok(r) => {
                let own = verify_nonsingular(pair, &sol.assignment, gamma);
                let theirs = r.witness.as_ref().map(|w| verify_nonsingular(pair, w, gamma));
                match (own, theirs) {
                    (Ok(_), Some(Ok(_))) => writeln!(
                        out.stderr,
                        "oracle: agrees, both zeros are non-singular modulo p^{gamma} ({} states explored)",
                        r.states_explored
                    )
                    .unwrap(),
                    (own, theirs) => {
                        out.code = EXIT_ERROR;
                        writeln!(out.stderr, "oracle: disagreement (solver {own:?}, oracle {theirs:?})").unwrap();
                    }
                }
            }
        }
    }
    out
}

pub fn cmd_gen(p: u64, tau: u32, seed: u64, slack: usize, hint: &str) -> Output {
    let Some(h) = Hint::parse(hint) else {
        return Output::fail(EXIT_ERROR, format!("error: unknown hint {hint:?}"));
    };
    let params = match derive_params(p, tau) {
        Ok(pr) => pr,
        Err(e) => return Output::from_error(&e),
    };
    match generate(&params, seed, slack, h) {
        Ok(g) => {
            let comments = vec![
                format!("generated: p = {p}, tau = {tau}, seed = {seed}, slack = {slack}, hint = {hint}"),
                format!("aimed at: {}", g.branch.label()),
            ];
            Output { code: EXIT_OK, stdout: write_instance(&g.pair, &comments), stderr: String::new() }
        }
        Err(e) => Output::from_error(&e),
    }
}

pub fn cmd_verify(instance: &Path, solution: &Path) -> Output {
    let pair = match load_instance(instance) {
        Ok(p) => p,
        Err(out) => return out,
    };
    let text = match read(solution) {
        Ok(t) => t,
        Err(out) => return out,
    };
    let sol = match parse_solution(&text) {
        Ok(s) => s,
        Err(e) => return Output::from_error(&e),
    };
    verify_pair(&pair, &sol)
}

pub fn verify_pair(pair: &FormPair, sol: &SolutionFile) -> Output {
    if (sol.p, sol.tau) != (pair.params.p, pair.params.tau) {
        return Output::fail(
            EXIT_VERIFY_FAILED,
            format!("verification failed (header): solution is for p = {}, tau = {}", sol.p, sol.tau),
        );
    }
    match verify_certificate(pair, &sol.x, sol.precision, sol.pair) {
        Ok(e) => Output {
            code: EXIT_OK,
            stdout: format!(
                "ok: both forms vanish modulo {}^{}, pair ({}, {}) has determinant valuation {e}\n",
                sol.p,
                sol.precision,
                sol.pair.0 + 1,
                sol.pair.1 + 1
            ),
            stderr: String::new(),
        },
        Err(e) => Output::from_error(&e),
    }
}

pub fn cmd_profile(instance: &Path) -> Output {
    match load_instance(instance) {
        Ok(pair) => profile_pair(&pair),
        Err(out) => out,
    }
}

pub fn profile_pair(pair: &FormPair) -> Output {
    if is_degenerate(pair) {
        return Output::fail(EXIT_DEGENERATE, "error: degenerate pair: theta vanishes");
    }
    let (branch, prof, frame) = match dispatch_preview(pair) {
        Ok(v) => v,
        Err(e) => return Output::from_error(&e),
    };
    let params = pair.params;
    let mut o = String::new();
    writeln!(o, "p = {}, tau = {}, k = {}, s = {}", params.p, params.tau, params.k, pair.s()).unwrap();
    if frame.steps.is_empty() {
        writeln!(o, "normalisation: already normalised").unwrap();
    } else {
        for st in &frame.steps {
            writeln!(o, "normalisation: {st}").unwrap();
        }
    }
    let head: String = (0..=params.p).map(|c| format!(" {:>6}", format!("I_{c}"))).collect();
    writeln!(o, "{:>5} {:>6} {:>6}{head}", "level", "m_l", "q_l").unwrap();
    for l in 0..prof.m.len() {
        let counts: String = (0..=params.p as u32).map(|c| format!(" {:>6}", prof.i(l, c))).collect();
        writeln!(o, "{l:>5} {:>6} {:>6}{counts}", prof.m(l), prof.q(l)).unwrap();
    }
    writeln!(o, "sum m_l = {}", prof.m.iter().sum::<usize>()).unwrap();
    writeln!(o, "r = {}", prof.r).unwrap();
    match check_proper(&frame.pair) {
        Ok(rep) if rep.proper => writeln!(o, "proper: yes").unwrap(),
        Ok(rep) => writeln!(o, "proper: no ({})", rep.failures.join("; ")).unwrap(),
        Err(e) => return Output::from_error(&e),
    }
    writeln!(o, "branch: {} [{}]", branch.label(), branch.key()).unwrap();
    Output { code: EXIT_OK, stdout: o, stderr: String::new() }
}
