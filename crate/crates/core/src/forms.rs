//! Coefficient pairs, their level/colour/nuance classification, profiles,
//! p-equivalence transforms and the normalisation descent.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::{inv_mod_i64, pow_p, valuation, Params, Valuation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormPair {
    pub params: Params,
    pub a: Vec<BigInt>,
    pub b: Vec<BigInt>,
}

impl FormPair {
    pub fn new(params: Params, coeffs: Vec<(BigInt, BigInt)>) -> Result<FormPair> {
        if coeffs.is_empty() {
            return Err(Error::OutsideHypotheses("a pair needs at least one variable".into()));
        }
        let (a, b) = coeffs.into_iter().unzip();
        Ok(FormPair { params, a, b })
    }

    pub fn from_i64(params: Params, coeffs: &[(i64, i64)]) -> Result<FormPair> {
        FormPair::new(params, coeffs.iter().map(|&(x, y)| (BigInt::from(x), BigInt::from(y))).collect())
    }

    pub fn s(&self) -> usize {
        self.a.len()
    }

    pub fn coeff(&self, i: usize) -> (&BigInt, &BigInt) {
        (&self.a[i], &self.b[i])
    }
}

/// Level, level vector and colour data of one variable (0-based `index`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableInfo {
    pub index: usize,
    pub level: u32,
    pub level_vector: (BigInt, BigInt),
    pub colour: u32,
    pub nuance: u32,
    pub corresponding: i64,
}

/// Colour, nuance and corresponding integer of a primitive vector given
/// modulo `p^2`. Colour `p` uses the representative `(0, 1)`.
pub fn classify_mod_p2(p: i64, a2: i64, b2: i64) -> Option<(u32, u32, i64)> {
    let p2 = p * p;
    let a2 = a2.rem_euclid(p2);
    let b2 = b2.rem_euclid(p2);
    if a2 % p == 0 && b2 % p == 0 {
        return None;
    }
    if b2 % p == 0 {
        let c = a2;
        let cinv = inv_mod_i64(c, p2)?;
        let mu = ((b2 / p) * cinv).rem_euclid(p);
        return Some((0, mu as u32, c));
    }
    let binv = inv_mod_i64(b2 % p, p).unwrap();
    let nu_hat = (a2 % p * binv).rem_euclid(p);
    let colour = if nu_hat == 0 { p } else { nu_hat };
    let c = b2;
    let cinv = inv_mod_i64(c, p2)?;
    let r = (a2 * cinv - nu_hat).rem_euclid(p2);
    debug_assert_eq!(r % p, 0);
    Some((colour as u32, (r / p) as u32, c))
}

/// Basis vector `e_nu + mu e^nu` modulo `p^2` (colour `p` represented by `(0,1)`).
pub fn nuance_vector(p: i64, colour: u32, mu: u32) -> (i64, i64) {
    let p2 = p * p;
    let mu = mu as i64;
    if colour == 0 {
        (1, (mu * p) % p2)
    } else {
        let nu_hat = (colour as i64) % p;
        ((nu_hat + mu * p) % p2, 1)
    }
}

pub fn classify_vector(params: &Params, a: &BigInt, b: &BigInt, index: usize) -> Result<VariableInfo> {
    let p = params.p;
    let va = valuation(a, p);
    let vb = valuation(b, p);
    let level = match va.min(vb) {
        Valuation::Infinite => {
            return Err(Error::Degenerate(format!("variable {} has coefficients (0, 0)", index + 1)))
        }
        Valuation::Finite(l) => l as u32,
    };
    let pl = pow_p(p, level);
    let at = a / &pl;
    let bt = b / &pl;
    let p2 = BigInt::from(p * p);
    let a2 = at.mod_floor(&p2).to_i64().unwrap();
    let b2 = bt.mod_floor(&p2).to_i64().unwrap();
    let (colour, nuance, corresponding) =
        classify_mod_p2(p as i64, a2, b2).expect("level vector is primitive");
    Ok(VariableInfo { index, level, level_vector: (at, bt), colour, nuance, corresponding })
}

pub fn classify_variable(pair: &FormPair, i: usize) -> Result<VariableInfo> {
    classify_vector(&pair.params, &pair.a[i], &pair.b[i], i)
}

pub fn classify_all(pair: &FormPair) -> Result<Vec<VariableInfo>> {
    (0..pair.s()).map(|i| classify_variable(pair, i)).collect()
}

/// Counting statistics of a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelProfile {
    pub p: u32,
    pub s: usize,
    /// `m[l]`: variables at level `l`.
    pub m: Vec<usize>,
    /// `colour_counts[l][nu]`: `I_nu^l`.
    pub colour_counts: Vec<Vec<usize>>,
    /// `nuance0[nu][mu]`: `I_{nu mu}^0`.
    pub nuance0: Vec<Vec<usize>>,
    pub imax: Vec<usize>,
    pub q: Vec<usize>,
    pub r: i64,
}

impl LevelProfile {
    pub fn m(&self, l: usize) -> usize {
        self.m.get(l).copied().unwrap_or(0)
    }

    pub fn q(&self, l: usize) -> usize {
        self.q.get(l).copied().unwrap_or(0)
    }

    pub fn imax(&self, l: usize) -> usize {
        self.imax.get(l).copied().unwrap_or(0)
    }

    pub fn i(&self, l: usize, nu: u32) -> usize {
        self.colour_counts.get(l).map(|c| c[nu as usize]).unwrap_or(0)
    }

    pub fn i00(&self) -> usize {
        self.nuance0[0][0]
    }

    /// A colour attaining `I_max^l`, preferring the smallest.
    pub fn argmax_colour(&self, l: usize) -> u32 {
        argmax_pref(self.colour_counts.get(l).map(|v| v.as_slice()).unwrap_or(&[]), &[])
    }

    pub fn r_in_range(&self) -> bool {
        self.r >= -1 && self.r < self.p as i64
    }

    pub fn max_level(&self) -> usize {
        self.m.len().saturating_sub(1)
    }
}

fn argmax_pref(v: &[usize], prefer: &[u32]) -> u32 {
    let Some(&mx) = v.iter().max() else { return 0 };
    for &c in prefer {
        if v.get(c as usize) == Some(&mx) {
            return c;
        }
    }
    v.iter().position(|&x| x == mx).unwrap() as u32
}

pub fn r_of_q0(params: &Params, q0: usize) -> i64 {
    let pt1 = params.pi(params.tau + 1);
    let pt = params.pi(params.tau);
    Integer::div_floor(&(q0 as i64 - pt1), &pt)
}

pub fn profile_of(params: &Params, infos: &[VariableInfo]) -> LevelProfile {
    let p = params.p as usize;
    let maxl = infos.iter().map(|v| v.level as usize).max().unwrap_or(0);
    let mut m = vec![0; maxl + 1];
    let mut colour_counts = vec![vec![0; p + 1]; maxl + 1];
    let mut nuance0 = vec![vec![0; p]; p + 1];
    for v in infos {
        let l = v.level as usize;
        m[l] += 1;
        colour_counts[l][v.colour as usize] += 1;
        if l == 0 {
            nuance0[v.colour as usize][v.nuance as usize] += 1;
        }
    }
    let imax: Vec<usize> = colour_counts.iter().map(|c| *c.iter().max().unwrap()).collect();
    let q: Vec<usize> = m.iter().zip(&imax).map(|(a, b)| a - b).collect();
    let r = r_of_q0(params, q[0]);
    LevelProfile { p: params.p as u32, s: infos.len(), m, colour_counts, nuance0, imax, q, r }
}

pub fn compute_profile(pair: &FormPair) -> Result<LevelProfile> {
    let infos = classify_all(pair)?;
    Ok(profile_of(&pair.params, &infos))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetStats {
    pub counts: Vec<usize>,
    pub imax: usize,
    pub q: usize,
}

pub fn set_stats(params: &Params, pool: &[VariableInfo], set: &[usize]) -> Result<SetStats> {
    let mut counts = vec![0; params.p as usize + 1];
    let mut level = None;
    for &i in set {
        let v = pool
            .iter()
            .find(|v| v.index == i)
            .ok_or_else(|| Error::InvalidContraction(format!("index {i} not in pool")))?;
        match level {
            None => level = Some(v.level),
            Some(l) if l != v.level => {
                return Err(Error::InvalidContraction("set mixes levels".into()));
            }
            _ => {}
        }
        counts[v.colour as usize] += 1;
    }
    Ok(stats_from_counts(counts))
}

pub fn stats_from_counts(counts: Vec<usize>) -> SetStats {
    let imax = counts.iter().copied().max().unwrap_or(0);
    let total: usize = counts.iter().sum();
    SetStats { counts, imax, q: total - imax }
}

/// `v_p` of the product of all ordered minors `a_i b_j - a_j b_i`, `i != j`.
pub fn theta_valuation(pair: &FormPair) -> Valuation {
    let p = pair.params.p;
    let s = pair.s();
    let mut infos = Vec::with_capacity(s);
    for i in 0..s {
        match classify_variable(pair, i) {
            Ok(v) => infos.push(v),
            Err(_) => return Valuation::Infinite,
        }
    }
    if s < 2 {
        return Valuation::Finite(0);
    }
    let level_sum: u64 = infos.iter().map(|v| v.level as u64).sum();
    // minors of primitive vectors: valuation = agreement depth of projective slopes
    let mut bound = BigInt::one();
    for v in &infos {
        let m = v.level_vector.0.abs().max(v.level_vector.1.abs());
        if m > bound {
            bound = m;
        }
    }
    let bound = &bound * &bound * 2u32;
    let pb = BigInt::from(p);
    let mut e = 1u32;
    let mut pe = pb.clone();
    while pe <= bound {
        pe *= &pb;
        e += 1;
    }
    let mut keys: Vec<(u8, Vec<u8>)> = Vec::with_capacity(s);
    for v in &infos {
        let (at, bt) = &v.level_vector;
        let (chart, num, den) = if !(at.mod_floor(&pb)).is_zero() { (0u8, bt, at) } else { (1u8, at, bt) };
        let inv = crate::padic::inv_mod(den, &pe).expect("unit");
        let mut slope = (num * inv).mod_floor(&pe);
        let mut digits = Vec::with_capacity(e as usize);
        for _ in 0..e {
            let (q, r) = slope.div_rem(&pb);
            digits.push(r.to_u8().unwrap());
            slope = q;
        }
        keys.push((chart, digits));
    }
    keys.sort();
    let lcp: Vec<usize> = keys
        .windows(2)
        .map(|w| {
            if w[0].0 != w[1].0 {
                0
            } else {
                w[0].1.iter().zip(&w[1].1).take_while(|(x, y)| x == y).count()
            }
        })
        .collect();
    if lcp.iter().any(|&d| d >= e as usize) {
        return Valuation::Infinite;
    }
    let mut inner: u64 = 0;
    for depth in 1..=e as usize {
        let mut run = 1u64;
        let mut any = false;
        for &d in &lcp {
            if d >= depth {
                run += 1;
                any = true;
            } else {
                inner += run * (run - 1) / 2;
                run = 1;
            }
        }
        inner += run * (run - 1) / 2;
        if !any {
            break;
        }
    }
    let unordered = (s as u64 - 1) * level_sum + inner;
    Valuation::Finite(2 * unordered)
}

/// Quick degeneracy test: some coefficient pair is zero or two pairs are
/// proportional.
pub fn is_degenerate(pair: &FormPair) -> bool {
    let mut seen = HashSet::with_capacity(pair.s());
    for i in 0..pair.s() {
        let (a, b) = pair.coeff(i);
        if a.is_zero() && b.is_zero() {
            return true;
        }
        let g = a.gcd(b);
        let (mut x, mut y) = (a / &g, b / &g);
        if x.is_negative() || (x.is_zero() && y.is_negative()) {
            x = -x;
            y = -y;
        }
        if !seen.insert((x, y)) {
            return true;
        }
    }
    false
}

/// One step of a p-equivalence transform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformStep {
    /// `x_i -> p^{e_i} x_i`.
    Scale(Vec<u32>),
    /// `(f, g) -> (l1 f + l2 g, m1 f + m2 g)`.
    Mix { l1: BigInt, l2: BigInt, m1: BigInt, m2: BigInt },
    /// Divide both forms by `p^e`.
    Divide(u32),
}

impl TransformStep {
    pub fn mix(l1: i64, l2: i64, m1: i64, m2: i64) -> TransformStep {
        TransformStep::Mix { l1: l1.into(), l2: l2.into(), m1: m1.into(), m2: m2.into() }
    }

    pub fn describe(&self) -> String {
        match self {
            TransformStep::Scale(e) => {
                let n = e.iter().filter(|&&x| x > 0).count();
                format!("scale {n} variables")
            }
            TransformStep::Mix { l1, l2, m1, m2 } => format!("mix ({l1} {l2}; {m1} {m2})"),
            TransformStep::Divide(e) => format!("divide by p^{e}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransformRecord {
    pub steps: Vec<TransformStep>,
}

impl TransformRecord {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn replay(&self, pair: &FormPair) -> Result<FormPair> {
        let mut cur = pair.clone();
        for st in &self.steps {
            cur = apply_transform(&cur, st)?;
        }
        Ok(cur)
    }

    /// Total exponent `e_i` with `x_i(source) = p^{e_i} x_i(image)`.
    pub fn scale_exponents(&self, s: usize) -> Vec<u32> {
        let mut tot = vec![0u32; s];
        for st in &self.steps {
            if let TransformStep::Scale(e) = st {
                for (t, x) in tot.iter_mut().zip(e) {
                    *t += x;
                }
            }
        }
        tot
    }

    pub fn extend(&mut self, other: &TransformRecord) {
        self.steps.extend(other.steps.iter().cloned());
    }
}

pub fn apply_transform(pair: &FormPair, step: &TransformStep) -> Result<FormPair> {
    let params = pair.params;
    let mut out = pair.clone();
    match step {
        TransformStep::Scale(e) => {
            if e.len() != pair.s() {
                return Err(Error::InvalidContraction("scale vector has wrong length".into()));
            }
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    let f = pow_p(params.p, (params.k as u32) * ei);
                    out.a[i] = &pair.a[i] * &f;
                    out.b[i] = &pair.b[i] * &f;
                }
            }
        }
        TransformStep::Mix { l1, l2, m1, m2 } => {
            if (l1 * m2 - l2 * m1).is_zero() {
                return Err(Error::InvalidContraction("mix with zero determinant".into()));
            }
            for i in 0..pair.s() {
                out.a[i] = l1 * &pair.a[i] + l2 * &pair.b[i];
                out.b[i] = m1 * &pair.a[i] + m2 * &pair.b[i];
            }
        }
        TransformStep::Divide(e) => {
            let d = pow_p(params.p, *e);
            for i in 0..pair.s() {
                let (qa, ra) = pair.a[i].div_rem(&d);
                let (qb, rb) = pair.b[i].div_rem(&d);
                if !ra.is_zero() || !rb.is_zero() {
                    return Err(Error::InvalidContraction(format!(
                        "variable {} not divisible by p^{e}",
                        i + 1
                    )));
                }
                out.a[i] = qa;
                out.b[i] = qb;
            }
        }
    }
    Ok(out)
}

/// A checkable normalisation property that fails on a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormFailure {
    /// `m_0 + ... + m_j < (j+1) s/k`.
    LevelSum(usize),
    /// `m_0 + ... + m_{j-1} + q_j < (j + 1/2) s/k`.
    QSum(usize),
    /// Colour 0 is not a largest level-0 colour.
    Level0Colour,
    /// Neither colour 0 nor colour p is a largest level-1 colour.
    Level1Colour,
    /// Nuance (0,0) is not a largest colour-0 nuance at level 0.
    Nuance00,
    /// `I_00^0 > m_0 + m_1 - I_0^1 - s/k`.
    NuanceUpper,
    /// `I_00^0 < (m_0 - q_0)/p`.
    NuanceLower,
}

pub fn normalisation_failures(params: &Params, prof: &LevelProfile) -> Vec<NormFailure> {
    let mut out = Vec::new();
    let k = params.k as u128;
    let s = prof.s as u128;
    let mut cum: u128 = 0;
    for j in 0..params.k as usize {
        let before = cum;
        cum += prof.m(j) as u128;
        if k * cum < (j as u128 + 1) * s {
            out.push(NormFailure::LevelSum(j));
        }
        if 2 * k * (before + prof.q(j) as u128) < (2 * j as u128 + 1) * s {
            out.push(NormFailure::QSum(j));
        }
    }
    if prof.i(0, 0) != prof.imax(0) {
        out.push(NormFailure::Level0Colour);
    }
    if prof.i(1, 0) != prof.imax(1) && prof.i(1, prof.p) != prof.imax(1) {
        out.push(NormFailure::Level1Colour);
    }
    let i00 = prof.i00();
    if prof.nuance0[0].iter().any(|&x| x > i00) {
        out.push(NormFailure::Nuance00);
    }
    let lhs = prof.m(0) + prof.m(1) - prof.i(1, 0);
    if (k * (lhs as u128)) < k * (i00 as u128) + s {
        out.push(NormFailure::NuanceUpper);
    }
    if (prof.p as usize) * i00 < prof.m(0) - prof.q(0) {
        out.push(NormFailure::NuanceLower);
    }
    out
}

/// `(l1, l2, m1, m2)` mapping level-`l` colour `nu` to colour 0.
fn colour_to_zero(params: &Params, nu: u32) -> TransformStep {
    let nu_hat = (nu as i64) % params.p as i64;
    TransformStep::mix(0, 1, 1, -nu_hat)
}

/// One pass of the colour/nuance fixing mixes; `None` if nothing to fix.
fn fixing_mix(params: &Params, prof: &LevelProfile) -> Option<TransformStep> {
    let p = params.p as i64;
    let c0 = argmax_pref(&prof.colour_counts[0], &[0]);
    if c0 != 0 {
        return Some(colour_to_zero(params, c0));
    }
    if prof.m.len() > 1 {
        let c1 = argmax_pref(&prof.colour_counts[1], &[0, prof.p]);
        if c1 != 0 && c1 != prof.p {
            return Some(TransformStep::mix(1, -(c1 as i64 % p), 0, 1));
        }
    }
    let mu = argmax_pref(&prof.nuance0[0], &[0]);
    if mu != 0 {
        let t = (p - mu as i64) % p;
        return Some(TransformStep::mix(1, 0, t * p, 1));
    }
    None
}

/// Iterative descent on `v_p(theta)` until every checkable normalisation
/// property holds.
pub fn p_normalise(pair: &FormPair) -> Result<(FormPair, TransformRecord)> {
    if is_degenerate(pair) {
        return Err(Error::Degenerate("theta vanishes (zero or proportional coefficient pairs)".into()));
    }
    let params = pair.params;
    let mut cur = pair.clone();
    let mut rec = TransformRecord::default();
    let push = |cur: &mut FormPair, rec: &mut TransformRecord, st: TransformStep| -> Result<()> {
        *cur = apply_transform(cur, &st)?;
        rec.steps.push(st);
        Ok(())
    };
    for _ in 0..100_000 {
        let infos = classify_all(&cur)?;
        let prof = profile_of(&params, &infos);
        if let Some(st) = fixing_mix(&params, &prof) {
            push(&mut cur, &mut rec, st)?;
            continue;
        }
        let fails = normalisation_failures(&params, &prof);
        let Some(first) = pick_descent(&fails) else {
            return Ok((cur, rec));
        };
        let s = cur.s();
        match first {
            NormFailure::LevelSum(j) => {
                let e: Vec<u32> = infos.iter().map(|v| (v.level as usize <= j) as u32).collect();
                if e.iter().any(|&x| x > 0) {
                    push(&mut cur, &mut rec, TransformStep::Scale(e))?;
                }
                push(&mut cur, &mut rec, TransformStep::Divide(j as u32 + 1))?;
            }
            NormFailure::QSum(j) => {
                let cj = argmax_pref(&prof.colour_counts[j], &[0]);
                if cj != 0 {
                    push(&mut cur, &mut rec, colour_to_zero(&params, cj))?;
                }
                let infos = classify_all(&cur)?;
                let e: Vec<u32> = infos
                    .iter()
                    .map(|v| ((v.level as usize) < j || (v.level as usize == j && v.colour != 0)) as u32)
                    .collect();
                debug_assert_eq!(e.len(), s);
                if e.iter().any(|&x| x > 0) {
                    push(&mut cur, &mut rec, TransformStep::Scale(e))?;
                }
                let pj = pow_p(params.p, 1);
                push(
                    &mut cur,
                    &mut rec,
                    TransformStep::Mix { l1: pj, l2: BigInt::zero(), m1: BigInt::zero(), m2: BigInt::one() },
                )?;
                push(&mut cur, &mut rec, TransformStep::Divide(j as u32 + 1))?;
            }
            NormFailure::NuanceUpper => {
                let e: Vec<u32> = infos
                    .iter()
                    .map(|v| {
                        ((v.level == 0 && !(v.colour == 0 && v.nuance == 0)) || (v.level == 1 && v.colour != 0))
                            as u32
                    })
                    .collect();
                if e.iter().any(|&x| x > 0) {
                    push(&mut cur, &mut rec, TransformStep::Scale(e))?;
                }
                let p2 = pow_p(params.p, 2);
                push(
                    &mut cur,
                    &mut rec,
                    TransformStep::Mix { l1: p2, l2: BigInt::zero(), m1: BigInt::zero(), m2: BigInt::one() },
                )?;
                push(&mut cur, &mut rec, TransformStep::Divide(2))?;
            }
            other => {
                return Err(Error::NoDescent(format!("no descent witness for {other:?}")));
            }
        }
    }
    Err(Error::NoDescent("iteration cap reached".into()))
}

fn pick_descent(fails: &[NormFailure]) -> Option<NormFailure> {
    if fails.is_empty() {
        return None;
    }
    for f in fails {
        if matches!(f, NormFailure::LevelSum(_)) {
            return Some(f.clone());
        }
    }
    for f in fails {
        if matches!(f, NormFailure::QSum(_)) {
            return Some(f.clone());
        }
    }
    for f in fails {
        if matches!(f, NormFailure::NuanceUpper) {
            return Some(f.clone());
        }
    }
    Some(fails[0].clone())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperReport {
    pub proper: bool,
    pub failures: Vec<String>,
}

pub fn check_proper(pair: &FormPair) -> Result<ProperReport> {
    let params = pair.params;
    let prof = compute_profile(pair)?;
    let mut failures = Vec::new();
    if pair.s() < params.s_min() {
        failures.push(format!("s = {} below 2k^2 + 1 = {}", pair.s(), params.s_min()));
    }
    let qmax = 2 * params.pu(params.tau + 1) as usize - 2;
    if prof.q(0) > qmax {
        failures.push(format!("q_0 = {} exceeds 2p^(tau+1) - 2 = {qmax}", prof.q(0)));
    }
    for f in normalisation_failures(&params, &prof) {
        failures.push(format!("{f:?}"));
    }
    Ok(ProperReport { proper: failures.is_empty(), failures })
}
