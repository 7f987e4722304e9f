//! Independent searches used to cross-check the solver and the zero-sum
//! routines. Nothing here touches the contraction engine.
//!
//! Every unit `y` satisfies `y^k = 1 mod p^(tau+1)`, so up to that modulus a
//! solution of the pair is a subset of variables set to 1.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forms::FormPair;
use crate::zerosum::{bounded_pair_subset, olson_subset, subset_zero_p_not_p2};

/// Largest `p^(2e)` the search tables accept.
pub const STATE_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub found: bool,
    /// 0/1 assignment when found.
    pub witness: Option<Vec<BigInt>>,
    pub states_explored: u64,
}

impl OracleResult {
    fn from_subset(s: usize, subset: Option<Vec<usize>>, states_explored: u64) -> OracleResult {
        let witness = subset.map(|idx| {
            let mut x = vec![BigInt::from(0); s];
            for i in idx {
                x[i] = BigInt::from(1);
            }
            x
        });
        OracleResult { found: witness.is_some(), witness, states_explored }
    }
}

/// Direction of a level-0 coefficient vector modulo `p`, or `None` if both
/// coefficients are divisible by `p`.
fn direction(p: u64, a: &BigInt, b: &BigInt) -> Option<u64> {
    let pb = BigInt::from(p);
    let a = a.mod_floor(&pb).to_u64().unwrap();
    let b = b.mod_floor(&pb).to_u64().unwrap();
    if a != 0 {
        let inv = (1..p).find(|&t| a * t % p == 1).unwrap();
        Some(b * inv % p)
    } else if b != 0 {
        Some(p)
    } else {
        None
    }
}

struct Reduced {
    m: u64,
    a: Vec<u64>,
    b: Vec<u64>,
    dir: Vec<Option<u64>>,
}

fn reduce(pair: &FormPair, modulus_exp: u32) -> Result<Reduced> {
    let params = pair.params;
    if modulus_exp == 0 || modulus_exp > params.gamma {
        return Err(Error::OutsideHypotheses(format!(
            "0/1 assignments are exact only up to p^{}, asked for p^{modulus_exp}",
            params.gamma
        )));
    }
    let m = params.pu(modulus_exp);
    if (m as u128) * (m as u128) > STATE_CAP as u128 {
        return Err(Error::CapacityExceeded(format!("{}^{} residue pairs", params.p, 2 * modulus_exp)));
    }
    let mb = BigInt::from(m);
    let red = |v: &BigInt| v.mod_floor(&mb).to_u64().unwrap();
    Ok(Reduced {
        m,
        a: pair.a.iter().map(red).collect(),
        b: pair.b.iter().map(red).collect(),
        dir: pair.a.iter().zip(&pair.b).map(|(a, b)| direction(params.p, a, b)).collect(),
    })
}

/// A 0/1 assignment with both sums divisible by `p^modulus_exp` whose
/// support holds two level-0 variables of different directions mod `p`.
///
/// Forward reachability over `(Z/p^e)^2` times a diversity tag (no level-0
/// variable yet, one direction seen, two seen), with a parent per state.
pub fn dp_nonsingular_search(pair: &FormPair, modulus_exp: u32) -> Result<OracleResult> {
    let r = reduce(pair, modulus_exp)?;
    let p = pair.params.p;
    let m = r.m as usize;
    let tags = p as usize + 3;
    let diverse = tags - 1;
    let n_states = m * m * tags;
    let enc = |x: usize, y: usize, t: usize| (t * m + y) * m + x;
    let target = enc(0, 0, diverse);
    const NONE: u32 = u32::MAX;
    // parent[state] = (item, previous state)
    let mut parent = vec![(NONE, NONE); n_states];
    let mut reached = vec![false; n_states];
    let start = enc(0, 0, 0);
    reached[start] = true;
    let mut order = vec![start];
    let mut explored = 1u64;
    for i in 0..pair.s() {
        if reached[target] || order.len() == n_states {
            break;
        }
        let (ai, bi) = (r.a[i] as usize, r.b[i] as usize);
        let known = order.len();
        for k in 0..known {
            let st = order[k];
            let (x, y, t) = (st % m, st / m % m, st / (m * m));
            let nt = match (r.dir[i], t) {
                (None, t) => t,
                (Some(d), 0) => d as usize + 1,
                (Some(d), t) if t == diverse || t == d as usize + 1 => t,
                (Some(_), _) => diverse,
            };
            let next = enc((x + ai) % m, (y + bi) % m, nt);
            explored += 1;
            if !reached[next] {
                reached[next] = true;
                parent[next] = (i as u32, st as u32);
                order.push(next);
            }
        }
    }
    let subset = reached[target].then(|| {
        let mut idx = Vec::new();
        let mut st = target;
        while st != start {
            let (i, prev) = parent[st];
            idx.push(i as usize);
            st = prev as usize;
        }
        idx.reverse();
        idx
    });
    Ok(OracleResult::from_subset(pair.s(), subset, explored))
}

/// Plain enumeration of all `2^s` subsets in Gray-code order.
pub fn exhaustive_small_search(pair: &FormPair, modulus_exp: u32, max_s: usize) -> Result<OracleResult> {
    let s = pair.s();
    if s > max_s || max_s > 24 {
        return Err(Error::CapacityExceeded(format!("exhaustive search over {s} variables (limit {})", max_s.min(24))));
    }
    let r = reduce(pair, modulus_exp)?;
    let m = r.m;
    let (mut x, mut y) = (0u64, 0u64);
    let mut mask = 0u32;
    let mut explored = 0u64;
    for g in 1u32..(1 << s) {
        let bit = g.trailing_zeros() as usize;
        mask ^= 1 << bit;
        if mask >> bit & 1 == 1 {
            x = (x + r.a[bit]) % m;
            y = (y + r.b[bit]) % m;
        } else {
            x = (x + m - r.a[bit]) % m;
            y = (y + m - r.b[bit]) % m;
        }
        explored += 1;
        if x != 0 || y != 0 {
            continue;
        }
        let mut dirs = (0..s).filter(|&i| mask >> i & 1 == 1).filter_map(|i| r.dir[i]);
        let Some(d0) = dirs.next() else { continue };
        if dirs.any(|d| d != d0) {
            let subset = (0..s).filter(|&i| mask >> i & 1 == 1).collect();
            return Ok(OracleResult::from_subset(s, Some(subset), explored));
        }
    }
    Ok(OracleResult::from_subset(s, None, explored))
}

/// Zero-sum statements the probe can check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    /// `np - n + 1` vectors of `(Z/p)^n` have a nonempty zero-sum subset.
    Olson { n: u32 },
    /// `3p - 2` pairs have a zero-sum subset of size at most `p`.
    BoundedPair,
    /// `3p - 2` units have a subset of size at most `p` summing to a
    /// multiple of `p` but not of `p^2`.
    ValuationOne,
    /// Same as [`Probe::ValuationOne`] with nine units, for `p = 5` only.
    ValuationOneNine,
}

impl Probe {
    /// Sequence length at which the statement applies.
    pub fn threshold(self, p: u64) -> usize {
        let p = p as usize;
        match self {
            Probe::Olson { n } => n as usize * (p - 1) + 1,
            Probe::BoundedPair | Probe::ValuationOne => 3 * p - 2,
            Probe::ValuationOneNine => 9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Probe::Olson { .. } => "zero-sum in (Z/p)^n",
            Probe::BoundedPair => "bounded zero-sum pair",
            Probe::ValuationOne => "valuation-one subset sum",
            Probe::ValuationOneNine => "valuation-one subset sum from nine units",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeReport {
    pub probe: Probe,
    pub p: u64,
    /// Inputs tried at the threshold.
    pub trials: u64,
    pub failures: u64,
    /// Witnesses that passed the independent re-check.
    pub verified: u64,
    /// A sequence one shorter than the threshold with no witness, when one
    /// is known, and whether exhaustive search confirmed it.
    pub counterexample: Option<(Vec<Vec<i64>>, bool)>,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.verified == self.trials && self.counterexample.as_ref().is_none_or(|c| c.1)
    }
}

/// Runs `probe` on random inputs at the threshold. `Olson` with `p^n` small
/// enough enumerates every multiset instead, ignoring `trials`.
pub fn lemma_bound_probe(probe: Probe, p: u64, trials: u64, seed: u64) -> Result<ProbeReport> {
    if !crate::padic::is_prime(p) {
        return Err(Error::OutsideHypotheses(format!("{p} is not prime")));
    }
    if probe == Probe::ValuationOneNine && p != 5 {
        return Err(Error::OutsideHypotheses("the nine-unit statement is for p = 5".into()));
    }
    if matches!(probe, Probe::ValuationOne | Probe::BoundedPair) && p < 5 {
        return Err(Error::OutsideHypotheses("needs p >= 5".into()));
    }
    let len = probe.threshold(p);
    let mut report = ProbeReport { probe, p, trials: 0, failures: 0, verified: 0, counterexample: None };
    let record = |report: &mut ProbeReport, seq: &[Vec<i64>]| {
        report.trials += 1;
        match witness(probe, p, seq) {
            Some(idx) if check(probe, p, seq, &idx) => report.verified += 1,
            Some(_) => {}
            None => report.failures += 1,
        }
    };
    match probe {
        Probe::Olson { n } if (p as usize).pow(n) <= 16 => {
            let elems: Vec<Vec<i64>> = (0..(p as usize).pow(n)).map(|e| digits(e, p, n)).collect();
            for ms in multisets(elems.len(), len) {
                let seq: Vec<Vec<i64>> = ms.iter().map(|&e| elems[e].clone()).collect();
                record(&mut report, &seq);
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..trials {
                let seq = random_sequence(probe, p, len, &mut rng);
                record(&mut report, &seq);
            }
        }
    }
    if let Some(ce) = known_counterexample(probe, p) {
        let confirmed = brute_force(probe, p, &ce).is_none();
        report.counterexample = Some((ce, confirmed));
    }
    Ok(report)
}

fn digits(e: usize, p: u64, n: u32) -> Vec<i64> {
    (0..n).map(|i| (e / (p as usize).pow(i) % p as usize) as i64).collect()
}

/// Non-decreasing sequences of length `len` over `0..n`.
fn multisets(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(n: usize, len: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for e in from..n {
            cur.push(e);
            rec(n, len, e, cur, out);
            cur.pop();
        }
    }
    rec(n, len, 0, &mut cur, &mut out);
    out
}

fn random_sequence(probe: Probe, p: u64, len: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let pi = p as i64;
    let unit = |rng: &mut ChaCha8Rng| loop {
        let d = rng.gen_range(1..pi * pi);
        if d % pi != 0 {
            break d;
        }
    };
    (0..len)
        .map(|_| match probe {
            Probe::Olson { n } => (0..n).map(|_| rng.gen_range(0..pi)).collect(),
            Probe::BoundedPair => vec![rng.gen_range(0..pi), rng.gen_range(0..pi)],
            Probe::ValuationOne | Probe::ValuationOneNine => vec![unit(rng)],
        })
        .collect()
}

fn witness(probe: Probe, p: u64, seq: &[Vec<i64>]) -> Option<Vec<usize>> {
    let col = |j: usize| seq.iter().map(|v| v[j]).collect::<Vec<i64>>();
    let w = match probe {
        Probe::Olson { .. } => olson_subset(seq, p),
        Probe::BoundedPair => bounded_pair_subset(&col(0), &col(1), p),
        Probe::ValuationOne | Probe::ValuationOneNine => subset_zero_p_not_p2(&col(0), p),
    };
    w.ok().map(|w| w.indices)
}

/// Re-checks a witness from scratch.
fn check(probe: Probe, p: u64, seq: &[Vec<i64>], idx: &[usize]) -> bool {
    let pi = p as i64;
    let mut seen = idx.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if idx.is_empty() || seen.len() != idx.len() || idx.iter().any(|&i| i >= seq.len()) {
        return false;
    }
    let sum = |j: usize| idx.iter().map(|&i| seq[i][j]).sum::<i64>();
    match probe {
        Probe::Olson { n } => (0..n as usize).all(|j| sum(j) % pi == 0),
        Probe::BoundedPair => idx.len() <= p as usize && sum(0) % pi == 0 && sum(1) % pi == 0,
        Probe::ValuationOne | Probe::ValuationOneNine => {
            idx.len() <= p as usize && sum(0) % pi == 0 && sum(0) % (pi * pi) != 0
        }
    }
}

/// Any witness by plain subset enumeration, for short sequences.
fn brute_force(probe: Probe, p: u64, seq: &[Vec<i64>]) -> Option<Vec<usize>> {
    let n = seq.len();
    assert!(n <= 24);
    (1u32..1 << n)
        .map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect::<Vec<usize>>())
        .find(|idx| check(probe, p, seq, idx))
}

fn known_counterexample(probe: Probe, p: u64) -> Option<Vec<Vec<i64>>> {
    let pi = p as i64;
    match probe {
        Probe::Olson { n } => {
            // p - 1 copies of each unit vector
            let mut v = Vec::new();
            for j in 0..n as usize {
                let mut e = vec![0; n as usize];
                e[j] = 1;
                v.extend(std::iter::repeat_n(e, p as usize - 1));
            }
            Some(v)
        }
        Probe::BoundedPair => {
            // p - 1 copies each of (1, 0), (0, 1) and (1, 1)
            let mut v = Vec::new();
            for e in [vec![1, 0], vec![0, 1], vec![1, 1]] {
                v.extend(std::iter::repeat_n(e, p as usize - 1));
            }
            (3 * (pi - 1) <= 24).then_some(v)
        }
        Probe::ValuationOne | Probe::ValuationOneNine => None,
    }
}
