//! Exact modular arithmetic modulo powers of p, valuations, and k-th roots of
//! principal units.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The arithmetic frame `k = p^tau (p - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Params {
    pub p: u64,
    pub tau: u32,
    pub k: u64,
    pub gamma: u32,
    pub delta: u64,
    pub k0: u64,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn derive_params(p: u64, tau: u32) -> Result<Params> {
    if p < 5 {
        return Err(Error::OutsideHypotheses(format!("p = {p} must be at least 5")));
    }
    if !is_prime(p) {
        return Err(Error::OutsideHypotheses(format!("p = {p} is not prime")));
    }
    if tau < 1 {
        return Err(Error::OutsideHypotheses("tau must be at least 1".into()));
    }
    let pt = p
        .checked_pow(tau)
        .and_then(|v| v.checked_mul(p - 1))
        .ok_or_else(|| Error::OutsideHypotheses(format!("k = {p}^{tau}({p}-1) overflows")))?;
    Ok(Params { p, tau, k: pt, gamma: tau + 1, delta: p - 1, k0: 1 })
}

impl Params {
    pub fn new(p: u64, tau: u32) -> Result<Params> {
        derive_params(p, tau)
    }

    /// `p^e` as a machine integer; panics on overflow.
    pub fn pu(&self, e: u32) -> u64 {
        self.p.checked_pow(e).expect("p^e overflows u64")
    }

    pub fn pi(&self, e: u32) -> i64 {
        self.pu(e) as i64
    }

    pub fn pbig(&self, e: u32) -> BigInt {
        pow_p(self.p, e)
    }

    /// Smallest admissible number of variables, `2k^2 + 1`.
    pub fn s_min(&self) -> usize {
        (2 * self.k * self.k + 1) as usize
    }

    /// Davenport-style threshold from which a colour is zero-representing.
    pub fn zero_rep_threshold(&self) -> usize {
        (self.pu(self.gamma) + self.pu(self.gamma - 1) - 1) as usize
    }
}

pub fn pow_p(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// A p-adic valuation; `Infinite` is the valuation of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(u64),
    Infinite,
}

impl Valuation {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    pub fn finite(&self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(*v),
            Valuation::Infinite => None,
        }
    }

    pub fn at_least(&self, e: u64) -> bool {
        match self {
            Valuation::Finite(v) => *v >= e,
            Valuation::Infinite => true,
        }
    }
}

impl Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a.saturating_add(b)),
            _ => Valuation::Infinite,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

pub fn valuation(n: &BigInt, p: u64) -> Valuation {
    if n.is_zero() {
        return Valuation::Infinite;
    }
    let pb = BigInt::from(p);
    let mut m = n.abs();
    let mut v = 0;
    // strip p^8 at a time first; most coefficients in practice are large powers
    let p8 = num_traits::pow(pb.clone(), 8);
    loop {
        let (q, r) = m.div_rem(&p8);
        if !r.is_zero() {
            break;
        }
        m = q;
        v += 8;
    }
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        m = q;
        v += 1;
    }
    Valuation::Finite(v)
}

pub fn valuation_i64(n: i64, p: u64) -> Valuation {
    if n == 0 {
        return Valuation::Infinite;
    }
    let p = p as i64;
    let mut m = n;
    let mut v = 0;
    while m % p == 0 {
        m /= p;
        v += 1;
    }
    Valuation::Finite(v)
}

/// Non-negative remainder of `n` modulo `m`.
pub fn modp(n: &BigInt, m: &BigInt) -> BigInt {
    n.mod_floor(m)
}

pub fn mod_u64(n: &BigInt, m: u64) -> u64 {
    n.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits")
}

pub fn mod_i64(n: i64, m: i64) -> i64 {
    n.rem_euclid(m)
}

/// Inverse of `a` modulo `m` for machine-sized moduli.
pub fn inv_mod_i64(a: i64, m: i64) -> Option<i64> {
    let e = a.rem_euclid(m).extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m))
}

pub fn inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// A residue modulo `p^exp`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Residue {
    pub value: BigInt,
    pub p: u64,
    pub exp: u32,
}

impl Residue {
    pub fn new(value: BigInt, p: u64, exp: u32) -> Residue {
        let m = pow_p(p, exp);
        Residue { value: value.mod_floor(&m), p, exp }
    }

    pub fn modulus(&self) -> BigInt {
        pow_p(self.p, self.exp)
    }
}

pub fn pow_mod(base: &BigInt, exp: u64, p: u64, modulus_exp: u32) -> Residue {
    let m = pow_p(p, modulus_exp);
    let b = base.mod_floor(&m);
    let value = b.modpow(&BigInt::from(exp), &m);
    Residue { value, p, exp: modulus_exp }
}

pub fn pow_mod_big(base: &BigInt, exp: &BigUint, m: &BigInt) -> BigInt {
    base.mod_floor(m).modpow(&BigInt::from(exp.clone()), m)
}

/// A unit `u` with `u^k = target (mod p^precision)`, built digit by digit from
/// `u = 1` through twists `u <- u (1 + t p^(m - tau))`.
pub fn kth_root_of(target: &Residue, params: &Params, precision: u32) -> Result<Residue> {
    let p = params.p;
    let tau = params.tau;
    if precision < tau + 1 {
        return Err(Error::NoRoot(format!(
            "precision {precision} below tau + 1 = {}",
            tau + 1
        )));
    }
    let check_exp = (tau + 1).min(target.exp);
    let m1 = pow_p(p, check_exp);
    if !(target.value.mod_floor(&m1) - BigInt::one()).mod_floor(&m1).is_zero() || target.exp < tau + 1 {
        return Err(Error::NoRoot(format!(
            "target {} is not 1 modulo {}^{}",
            target.value,
            p,
            tau + 1
        )));
    }
    let modn = pow_p(p, precision);
    let t = target.value.mod_floor(&modn);
    let k = BigInt::from(params.k);
    let pb = BigInt::from(p);
    let dinv = inv_mod_i64((params.delta * params.k0) as i64, p as i64).expect("delta is a unit");
    let mut u = BigInt::one();
    let mut m = tau + 1;
    while m < precision {
        let uk = u.modpow(&k, &modn);
        let ukinv = inv_mod(&uk, &modn).expect("unit");
        let q = (&t * ukinv).mod_floor(&modn);
        let pm = pow_p(p, m);
        let diff = (&q - BigInt::one()).mod_floor(&modn);
        debug_assert!(diff.mod_floor(&pm).is_zero());
        let digit = (&diff / &pm).mod_floor(&pb).to_i64().unwrap();
        if digit != 0 {
            let tt = (digit * dinv).rem_euclid(p as i64);
            let twist = BigInt::one() + BigInt::from(tt) * pow_p(p, m - tau);
            u = (u * twist).mod_floor(&modn);
        }
        m += 1;
    }
    Ok(Residue { value: u, p, exp: precision })
}
