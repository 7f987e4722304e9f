//! Line-based instance and solution files.
//!
//! Instance: a `p tau` header, then one `a b` line per variable.
//! Solution: a `p tau N` header, one residue per line, then
//! `nonsingular i j` with 1-based indices. Blank lines and anything after
//! `#` are ignored in both.

use std::fmt::Write as _;

use num_bigint::BigInt;
use padic_pairs::{derive_params, Error, FormPair, Params, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionFile {
    pub p: u64,
    pub tau: u32,
    pub precision: u32,
    pub x: Vec<BigInt>,
    /// 0-based.
    pub pair: (usize, usize),
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn fields<'a, const N: usize>(line: usize, body: &'a str, what: &str) -> Result<[&'a str; N]> {
    let parts: Vec<&str> = body.split_whitespace().collect();
    match <[&str; N]>::try_from(parts) {
        Ok(a) => Ok(a),
        Err(v) => parse_err(line, format!("expected {what} ({N} fields), found {} fields", v.len())),
    }
}

fn num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse().or_else(|_| parse_err(line, format!("{what}: cannot parse {tok:?}")))
}

fn header(line: usize, p: &str, tau: &str) -> Result<Params> {
    let p: u64 = num(line, p, "p")?;
    let tau: u32 = num(line, tau, "tau")?;
    derive_params(p, tau)
}

pub fn parse_instance(text: &str) -> Result<FormPair> {
    let mut lines = content_lines(text);
    let Some((ln, head)) = lines.next() else {
        return parse_err(1, "empty instance: expected a \"p tau\" header");
    };
    let [p, tau] = fields::<2>(ln, head, "header \"p tau\"")?;
    let params = header(ln, p, tau)?;
    let mut coeffs = Vec::new();
    for (ln, body) in lines {
        let [a, b] = fields::<2>(ln, body, "coefficients \"a b\"")?;
        coeffs.push((num::<BigInt>(ln, a, "a")?, num::<BigInt>(ln, b, "b")?));
    }
    if coeffs.is_empty() {
        return parse_err(ln, "instance has no variables");
    }
    FormPair::new(params, coeffs)
}

pub fn write_instance(pair: &FormPair, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        writeln!(out, "# {c}").unwrap();
    }
    writeln!(out, "{} {}", pair.params.p, pair.params.tau).unwrap();
    for (a, b) in pair.a.iter().zip(&pair.b) {
        writeln!(out, "{a} {b}").unwrap();
    }
    out
}

pub fn parse_solution(text: &str) -> Result<SolutionFile> {
    let lines: Vec<(usize, &str)> = content_lines(text).collect();
    let Some(&(ln, head)) = lines.first() else {
        return parse_err(1, "empty solution: expected a \"p tau N\" header");
    };
    let [p, tau, n] = fields::<3>(ln, head, "header \"p tau N\"")?;
    let p: u64 = num(ln, p, "p")?;
    let tau: u32 = num(ln, tau, "tau")?;
    let precision: u32 = num(ln, n, "N")?;
    let Some(&(fl, foot)) = lines.last().filter(|_| lines.len() >= 2) else {
        return parse_err(ln, "missing \"nonsingular i j\" footer");
    };
    let [kw, i, j] = fields::<3>(fl, foot, "footer \"nonsingular i j\"")?;
    if kw != "nonsingular" {
        return parse_err(fl, format!("expected \"nonsingular i j\", found {foot:?}"));
    }
    let i: usize = num(fl, i, "i")?;
    let j: usize = num(fl, j, "j")?;
    if i == 0 || j == 0 {
        return parse_err(fl, "indices are 1-based");
    }
    let mut x = Vec::new();
    for &(ln, body) in &lines[1..lines.len() - 1] {
        let [v] = fields::<1>(ln, body, "a value")?;
        x.push(num::<BigInt>(ln, v, "x")?);
    }
    Ok(SolutionFile { p, tau, precision, x, pair: (i - 1, j - 1) })
}

pub fn write_solution(sol: &SolutionFile) -> String {
    let mut out = String::new();
    writeln!(out, "{} {} {}", sol.p, sol.tau, sol.precision).unwrap();
    for v in &sol.x {
        writeln!(out, "{v}").unwrap();
    }
    writeln!(out, "nonsingular {} {}", sol.pair.0 + 1, sol.pair.1 + 1).unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_round_trip() {
        let text = "# tiny\n5 1\n\n3 -7\n  100000000000000000000000 1 # big\n";
        let pair = parse_instance(text).unwrap();
        assert_eq!(pair.s(), 2);
        assert_eq!(pair.a[1].to_string(), "100000000000000000000000");
        assert_eq!(parse_instance(&write_instance(&pair, &[])).unwrap(), pair);
    }

    #[test]
    fn malformed_header() {
        assert!(matches!(parse_instance("5\n1 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_instance("5 x\n1 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_instance("5 1\n1 2 3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_instance("3 1\n1 2\n"), Err(Error::OutsideHypotheses(_))));
    }

    #[test]
    fn solution_round_trip() {
        let sol = SolutionFile { p: 5, tau: 1, precision: 6, x: vec![1.into(), 0.into(), 15624.into()], pair: (0, 2) };
        let text = write_solution(&sol);
        assert!(text.ends_with("nonsingular 1 3\n"));
        assert_eq!(parse_solution(&text).unwrap(), sol);
        assert!(parse_solution("5 1 6\n1\n").is_err());
        assert!(parse_solution("5 1 6\n1\nnonsingular 0 1\n").is_err());
    }
}
