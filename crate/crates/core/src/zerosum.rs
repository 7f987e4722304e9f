//! Zero-sum subset searches over small abelian groups.
//!
//! Every search goes through [`lex_smallest_subset`], a dynamic program over
//! an encoded state space with a backward feasibility table, so witnesses are
//! the lexicographically smallest index sets.

use crate::error::{Error, Result};
use crate::padic::Params;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetWitness {
    pub indices: Vec<usize>,
    pub sums: Vec<i64>,
}

struct BitTable {
    words: usize,
    bits: Vec<u64>,
}

impl BitTable {
    fn new(rows: usize, cols: usize) -> BitTable {
        let words = cols.div_ceil(64);
        BitTable { words, bits: vec![0; rows * words] }
    }

    fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    fn set(&mut self, r: usize, c: usize) {
        self.bits[r * self.words + c / 64] |= 1 << (c % 64);
    }
}

/// Lexicographically smallest nonempty index set whose state, started at
/// `start` and advanced with `step`, is accepted. `step` returns `None` for
/// forbidden transitions. The start state must not be accepting.
pub fn lex_smallest_subset(
    n_items: usize,
    n_states: usize,
    start: usize,
    step: impl Fn(usize, usize) -> Option<usize>,
    accept: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    // feas[i][st]: some subset of items i.. takes st to an accepting state
    let mut feas = BitTable::new(n_items + 1, n_states);
    for st in 0..n_states {
        if accept(st) {
            feas.set(n_items, st);
        }
    }
    for i in (0..n_items).rev() {
        for st in 0..n_states {
            let ok = feas.get(i + 1, st) || step(st, i).is_some_and(|t| feas.get(i + 1, t));
            if ok {
                feas.set(i, st);
            }
        }
    }
    if !feas.get(0, start) {
        return None;
    }
    let mut chosen = Vec::new();
    let mut st = start;
    let mut pos = 0;
    while chosen.is_empty() || !accept(st) {
        let mut next = None;
        for j in pos..n_items {
            if let Some(t) = step(st, j) {
                if feas.get(j + 1, t) {
                    next = Some((j, t));
                    break;
                }
            }
        }
        let (j, t) = next?;
        chosen.push(j);
        st = t;
        pos = j + 1;
    }
    Some(chosen)
}

fn modulus(p: u64, e: u32) -> i64 {
    (p as i64).pow(e)
}

/// A solution of `sum c_i x_i^k = 0` with `x_1` a unit. Units contribute
/// `c_i` and zeros nothing, so this is a subset sum forced to contain index 0.
pub fn forced_element_solution(c: &[i64], params: &Params, modulus_exp: u32) -> Result<Vec<u64>> {
    let p = params.p;
    if c.len() < p as usize {
        return Err(Error::InsufficientVariables { needed: p as usize, got: c.len() });
    }
    if c.iter().any(|&x| x.rem_euclid(p as i64) == 0) {
        return Err(Error::OutsideHypotheses("coefficients must be coprime to p".into()));
    }
    let m = modulus(p, modulus_exp);
    let n_states = 2 * m as usize;
    // state = 2 * sum + (index 0 taken)
    let step = |st: usize, i: usize| {
        let (sum, taken) = ((st / 2) as i64, st % 2);
        if i != 0 && taken == 0 {
            return None;
        }
        let t = (sum + c[i]).rem_euclid(m);
        Some(2 * t as usize + 1)
    };
    let idx = lex_smallest_subset(c.len(), n_states, 0, step, |st| st == 1)
        .ok_or_else(|| Error::NotFound(format!("no subset through the first index sums to 0 mod p^{modulus_exp}")))?;
    let mut x = vec![0u64; c.len()];
    for i in idx {
        x[i] = 1;
    }
    Ok(x)
}

/// Nonempty `J` with `sum_J v_j = 0` componentwise mod `p`.
pub fn olson_subset(vectors: &[Vec<i64>], p: u64) -> Result<SubsetWitness> {
    let n = vectors.first().map(|v| v.len()).unwrap_or(0);
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::OutsideHypotheses("vectors of unequal length".into()));
    }
    let pi = p as i64;
    let group = (p as usize)
        .checked_pow(n as u32)
        .filter(|&g| g <= 1 << 24)
        .ok_or_else(|| Error::CapacityExceeded(format!("group of order {p}^{n} too large")))?;
    let enc: Vec<usize> = vectors
        .iter()
        .map(|v| v.iter().rev().fold(0usize, |acc, &x| acc * p as usize + x.rem_euclid(pi) as usize))
        .collect();
    let add = |a: usize, b: usize| {
        let (mut a, mut b, mut out, mut w) = (a, b, 0, 1);
        for _ in 0..n {
            out += ((a % p as usize + b % p as usize) % p as usize) * w;
            a /= p as usize;
            b /= p as usize;
            w *= p as usize;
        }
        out
    };
    // state = 2 * group element + nonempty
    let step = |st: usize, i: usize| Some(2 * add(st / 2, enc[i]) + 1);
    let idx = lex_smallest_subset(vectors.len(), 2 * group, 0, step, |st| st == 1)
        .ok_or_else(|| Error::NotFound("no zero-sum subset".into()))?;
    let mut sums = vec![0i64; n];
    for &i in &idx {
        for (s, x) in sums.iter_mut().zip(&vectors[i]) {
            *s = (*s + x).rem_euclid(pi);
        }
    }
    Ok(SubsetWitness { indices: idx, sums })
}

/// Nonempty `J`, `|J| <= p`, with both `sum_J a` and `sum_J b` divisible by `p`.
pub fn bounded_pair_subset(a: &[i64], b: &[i64], p: u64) -> Result<SubsetWitness> {
    if a.len() != b.len() {
        return Err(Error::OutsideHypotheses("sequences of unequal length".into()));
    }
    let pu = p as usize;
    let pi = p as i64;
    let n_states = pu * pu * (pu + 1);
    let enc = |x: usize, y: usize, sz: usize| (sz * pu + y) * pu + x;
    let step = |st: usize, i: usize| {
        let (x, y, sz) = (st % pu, st / pu % pu, st / (pu * pu));
        if sz == pu {
            return None;
        }
        let nx = (x as i64 + a[i]).rem_euclid(pi) as usize;
        let ny = (y as i64 + b[i]).rem_euclid(pi) as usize;
        Some(enc(nx, ny, sz + 1))
    };
    let accept = |st: usize| st.is_multiple_of(pu * pu) && st / (pu * pu) >= 1;
    let idx = lex_smallest_subset(a.len(), n_states, 0, step, accept)
        .ok_or_else(|| Error::NotFound("no bounded zero-sum subset".into()))?;
    let sa = idx.iter().map(|&i| a[i]).sum::<i64>().rem_euclid(pi);
    let sb = idx.iter().map(|&i| b[i]).sum::<i64>().rem_euclid(pi);
    Ok(SubsetWitness { indices: idx, sums: vec![sa, sb] })
}

/// Nonempty `J`, `|J| <= p`, with `sum_J d` divisible by `p` but not `p^2`.
pub fn subset_zero_p_not_p2(d: &[i64], p: u64) -> Result<SubsetWitness> {
    let pu = p as usize;
    let pi = p as i64;
    let p2 = pi * pi;
    if d.iter().any(|&x| x.rem_euclid(pi) == 0) {
        return Err(Error::OutsideHypotheses("entries must be coprime to p".into()));
    }
    let n_states = (pu * pu) * (pu + 1);
    let step = |st: usize, i: usize| {
        let (sum, sz) = (st % (pu * pu), st / (pu * pu));
        if sz == pu {
            return None;
        }
        let t = (sum as i64 + d[i]).rem_euclid(p2) as usize;
        Some((sz + 1) * pu * pu + t)
    };
    let accept = |st: usize| {
        let (sum, sz) = (st % (pu * pu), st / (pu * pu));
        sz >= 1 && sum % pu == 0 && sum != 0
    };
    let idx = lex_smallest_subset(d.len(), n_states, 0, step, accept)
        .ok_or_else(|| Error::NotFound("no subset with sum of valuation exactly 1".into()))?;
    let s = idx.iter().map(|&i| d[i]).sum::<i64>().rem_euclid(p2);
    Ok(SubsetWitness { indices: idx, sums: vec![s] })
}
