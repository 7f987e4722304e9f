//! Stand-alone checks of candidate solutions. Nothing here uses the
//! contraction engine.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::forms::FormPair;
use crate::padic::{pow_p, valuation, Valuation};

fn fail<T>(check: &'static str, detail: impl Into<String>) -> Result<T> {
    Err(Error::Verification { check, detail: detail.into() })
}

/// `(f(x), g(x))` reduced modulo `p^e`.
pub fn residuals_mod(pair: &FormPair, x: &[BigInt], e: u32) -> (BigInt, BigInt) {
    let m = pow_p(pair.params.p, e);
    let k = BigInt::from(pair.params.k);
    let mut ra = BigInt::zero();
    let mut rb = BigInt::zero();
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        let xk = xi.mod_floor(&m).modpow(&k, &m);
        if xk.is_zero() {
            continue;
        }
        ra += &pair.a[i] * &xk;
        rb += &pair.b[i] * &xk;
    }
    (ra.mod_floor(&m), rb.mod_floor(&m))
}

/// Valuation of the residual pair, capped at `cap`.
pub fn residual_valuation(pair: &FormPair, x: &[BigInt], cap: u32) -> u32 {
    let (ra, rb) = residuals_mod(pair, x, cap);
    let p = pair.params.p;
    let v = valuation(&ra, p).min(valuation(&rb, p));
    match v {
        Valuation::Infinite => cap,
        Valuation::Finite(v) => (v as u32).min(cap),
    }
}

/// Valuation of `det (a_i x_i^k, a_j x_j^k; b_i x_i^k, b_j x_j^k)`.
pub fn pair_det_valuation(pair: &FormPair, x: &[BigInt], i: usize, j: usize) -> Valuation {
    let p = pair.params.p;
    let k = pair.params.k;
    let det = &pair.a[i] * &pair.b[j] - &pair.a[j] * &pair.b[i];
    match (valuation(&det, p), valuation(&x[i], p), valuation(&x[j], p)) {
        (Valuation::Finite(d), Valuation::Finite(vi), Valuation::Finite(vj)) => {
            Valuation::Finite(d + k * (vi + vj))
        }
        _ => Valuation::Infinite,
    }
}

fn check_nontrivial(pair: &FormPair, x: &[BigInt]) -> Result<()> {
    if x.len() != pair.s() {
        return fail("shape", format!("{} values for {} variables", x.len(), pair.s()));
    }
    let p = BigInt::from(pair.params.p);
    if x.iter().all(|v| v.mod_floor(&p).is_zero()) {
        return fail("triviality", "every value is divisible by p");
    }
    Ok(())
}

fn check_congruences(pair: &FormPair, x: &[BigInt], e: u32) -> Result<()> {
    let (ra, rb) = residuals_mod(pair, x, e);
    if !ra.is_zero() {
        return fail("congruence", format!("first form is {ra} modulo p^{e}"));
    }
    if !rb.is_zero() {
        return fail("congruence", format!("second form is {rb} modulo p^{e}"));
    }
    Ok(())
}

/// Check the congruences modulo `p^modulus_exp` and return a pair `(i, j)`
/// whose `2x2` matrix `(a_i x_i, a_j x_j; b_i x_i, b_j x_j)` is invertible
/// modulo `p`.
pub fn verify_nonsingular(pair: &FormPair, x: &[BigInt], modulus_exp: u32) -> Result<(usize, usize)> {
    check_nontrivial(pair, x)?;
    check_congruences(pair, x, modulus_exp)?;
    let p = pair.params.p as i64;
    let pb = BigInt::from(p);
    let mut first: Option<(usize, i64, i64)> = None;
    for (i, xi) in x.iter().enumerate() {
        if xi.mod_floor(&pb).is_zero() {
            continue;
        }
        let a = pair.a[i].mod_floor(&pb).to_i64().unwrap();
        let b = pair.b[i].mod_floor(&pb).to_i64().unwrap();
        if a == 0 && b == 0 {
            continue;
        }
        match first {
            None => first = Some((i, a, b)),
            Some((j, a0, b0)) => {
                if (a0 * b - a * b0).rem_euclid(p) != 0 {
                    return Ok((j, i));
                }
            }
        }
    }
    fail("rank", "no pair of support variables has a unit determinant")
}

/// Check a certificate with pair `(i, j)` at precision `n`. The pair may
/// have a determinant of valuation `E > 0` provided `n >= E + tau + 1`;
/// returns `E`.
pub fn verify_certificate(pair: &FormPair, x: &[BigInt], n: u32, (i, j): (usize, usize)) -> Result<u64> {
    check_nontrivial(pair, x)?;
    if i >= pair.s() || j >= pair.s() || i == j {
        return fail("pair", format!("invalid pair ({}, {})", i + 1, j + 1));
    }
    check_congruences(pair, x, n)?;
    let e = match pair_det_valuation(pair, x, i, j) {
        Valuation::Finite(e) => e,
        Valuation::Infinite => return fail("rank", "the pair has a vanishing determinant"),
    };
    let gamma = pair.params.gamma as u64;
    if (n as u64) < e + gamma {
        return fail("rank", format!("determinant valuation {e} needs precision {}, have {n}", e + gamma));
    }
    Ok(e)
}

/// Pair of support variables with the smallest determinant valuation.
pub fn best_pair(pair: &FormPair, x: &[BigInt]) -> Option<(usize, usize, u64)> {
    if let Ok((i, j)) = unit_pair(pair, x) {
        return Some((i, j, 0));
    }
    let support: Vec<usize> = (0..x.len()).filter(|&i| !x[i].is_zero()).collect();
    let mut best: Option<(usize, usize, u64)> = None;
    for (a, &i) in support.iter().enumerate() {
        for &j in &support[a + 1..] {
            if let Valuation::Finite(e) = pair_det_valuation(pair, x, i, j) {
                if best.is_none_or(|b| e < b.2) {
                    best = Some((i, j, e));
                }
            }
        }
    }
    best
}

fn unit_pair(pair: &FormPair, x: &[BigInt]) -> Result<(usize, usize)> {
    let p = pair.params.p;
    let mut with_unit: Option<(usize, usize)> = None;
    let support: Vec<usize> =
        (0..x.len()).filter(|&i| !x[i].is_zero() && valuation(&x[i], p) == Valuation::Finite(0)).collect();
    'outer: for (a, &i) in support.iter().enumerate() {
        for &j in &support[a + 1..] {
            if pair_det_valuation(pair, x, i, j) == Valuation::Finite(0) {
                with_unit = Some((i, j));
                break 'outer;
            }
        }
        if a > 64 {
            break;
        }
    }
    with_unit.ok_or(Error::NotFound("no unit pair".into()))
}
