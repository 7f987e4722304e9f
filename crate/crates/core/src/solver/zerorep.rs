//! Zero-representing colours, the large-`q_0` shortcut and the generic
//! windowed subset search used when a recipe does not apply.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::forms::{classify_all, FormPair, LevelProfile};
use crate::padic::mod_u64;
use crate::zerosum::lex_smallest_subset;

/// Upper bound on the DP table size in bits.
pub const DP_BITS: usize = 1 << 29;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroRepReport {
    /// `witnesses[nu]`: level-0 variables of colour `nu` whose coefficient
    /// sums vanish modulo `p^(tau+1)`.
    pub witnesses: Vec<Option<Vec<usize>>>,
    /// Colours whose count reached the guaranteed threshold.
    pub guaranteed: Vec<bool>,
}

impl ZeroRepReport {
    pub fn flagged(&self) -> Vec<u32> {
        (0..self.witnesses.len()).filter(|&c| self.witnesses[c].is_some()).map(|c| c as u32).collect()
    }

    pub fn guaranteed_colours(&self) -> Vec<u32> {
        (0..self.guaranteed.len()).filter(|&c| self.guaranteed[c]).map(|c| c as u32).collect()
    }
}

/// Subset with coefficient sums `= 0 (mod p^e)`, optionally touching two
/// different colours (`colours[i] = None` for members that do not count).
/// The items are `(a mod p^e, b mod p^e)`.
pub fn zero_subset(
    items: &[(u64, u64)],
    colours: Option<&[Option<u32>]>,
    p: u64,
    e: u32,
) -> Option<Vec<usize>> {
    let m = p.pow(e) as usize;
    let pu = p as usize;
    let cs = if colours.is_some() { pu + 3 } else { 1 };
    let n_states = m * m * cs;
    let mixed = pu + 2;
    let step = |st: usize, i: usize| {
        let a = st % m;
        let b = st / m % m;
        let c = st / (m * m);
        let (va, vb) = items[i];
        let na = (a + va as usize) % m;
        let nb = (b + vb as usize) % m;
        let nc = match colours.and_then(|c| c[i]) {
            None if colours.is_some() => c,
            None => 0,
            Some(col) => {
                let col = col as usize;
                if c == 0 {
                    col + 1
                } else if c == mixed || c == col + 1 {
                    c
                } else {
                    mixed
                }
            }
        };
        Some((nc * m + nb) * m + na)
    };
    if colours.is_some() {
        return lex_smallest_subset(items.len(), n_states, 0, step, |st| st == mixed * m * m);
    }
    // without colours the start state is accepting, so track nonemptiness
    let n2 = 2 * m * m;
    let step2 = |st: usize, i: usize| {
        let inner = st % (m * m);
        let t = step(inner, i)?;
        Some(m * m + t)
    };
    lex_smallest_subset(items.len(), n2, 0, step2, |st| st == m * m)
}

pub(crate) fn residues(pair: &FormPair, ids: &[usize], e: u32) -> Vec<(u64, u64)> {
    let m = pair.params.pu(e);
    ids.iter().map(|&i| (mod_u64(&pair.a[i], m), mod_u64(&pair.b[i], m))).collect()
}

/// Zero-representing analysis of the level-0 colours of a pair.
pub fn zero_representing(pair: &FormPair, profile: &LevelProfile) -> Result<ZeroRepReport> {
    let params = pair.params;
    let p = params.p;
    let gamma = params.gamma;
    let infos = classify_all(pair)?;
    let threshold = params.zero_rep_threshold();
    let states = (params.pu(gamma) as usize).pow(2) * 2;
    let cap = (DP_BITS / states).max(threshold);
    let mut witnesses = Vec::with_capacity(p as usize + 1);
    let mut guaranteed = Vec::with_capacity(p as usize + 1);
    for nu in 0..=p as u32 {
        let ids: Vec<usize> = infos.iter().filter(|v| v.level == 0 && v.colour == nu).map(|v| v.index).collect();
        debug_assert_eq!(ids.len(), profile.i(0, nu));
        let g = ids.len() >= threshold;
        let window = if g { &ids[..threshold] } else { &ids[..ids.len().min(cap)] };
        let found = zero_subset(&residues(pair, window, gamma), None, p, gamma)
            .map(|idx| idx.into_iter().map(|i| window[i]).collect::<Vec<_>>());
        if g && found.is_none() {
            return Err(Error::InternalContradiction {
                detail: format!("colour {nu} has {} level-0 variables but no zero-representing subset", ids.len()),
                log: Vec::new(),
            });
        }
        witnesses.push(found);
        guaranteed.push(g);
    }
    Ok(ZeroRepReport { witnesses, guaranteed })
}

/// 0/1 assignment with the given support.
pub fn indicator(s: usize, support: &[usize]) -> Vec<BigInt> {
    let mut y = vec![BigInt::zero(); s];
    for &i in support {
        y[i] = BigInt::one();
    }
    y
}

/// Windowed search for a subset of variables below level `tau + 1` whose
/// sums vanish modulo `p^(tau+1)` and which contains level-0 variables of
/// two colours. `level0_only` restricts the candidates to level 0.
pub fn diverse_search(pair: &FormPair, level0_only: bool) -> Result<Option<Vec<usize>>> {
    let params = pair.params;
    let p = params.p;
    let gamma = params.gamma;
    let infos = classify_all(pair)?;
    let states = (params.pu(gamma) as usize).pow(2) * (p as usize + 3);
    let cap = (DP_BITS / states).max(4 * p as usize);
    let dominant = {
        let mut c = vec![0usize; p as usize + 1];
        for v in infos.iter().filter(|v| v.level == 0) {
            c[v.colour as usize] += 1;
        }
        (0..c.len()).max_by_key(|&i| (c[i], std::cmp::Reverse(i))).unwrap() as u32
    };
    // minority colours first, then the dominant colour, then higher levels
    let mut order: Vec<usize> = infos.iter().filter(|v| v.level == 0 && v.colour != dominant).map(|v| v.index).collect();
    let minority = order.len().min(cap / 2);
    order.truncate(minority);
    order.extend(infos.iter().filter(|v| v.level == 0 && v.colour == dominant).map(|v| v.index));
    if !level0_only {
        for l in 1..gamma {
            order.extend(infos.iter().filter(|v| v.level == l).map(|v| v.index));
        }
    }
    order.truncate(cap);
    let colours: Vec<Option<u32>> =
        order.iter().map(|&i| if infos[i].level == 0 { Some(infos[i].colour) } else { None }).collect();
    let found = zero_subset(&residues(pair, &order, gamma), Some(&colours), p, gamma);
    Ok(found.map(|idx| idx.into_iter().map(|i| order[i]).collect()))
}

/// Solution modulo `p^(tau+1)` from level-0 variables alone, for
/// `q_0 >= 2p^(tau+1) - 1`.
pub fn large_q0_solve(pair: &FormPair, profile: &LevelProfile) -> Result<Vec<BigInt>> {
    let params = pair.params;
    let need = 2 * params.pu(params.gamma) as usize - 1;
    if profile.q(0) < need {
        return Err(Error::Hypothesis {
            recipe: "level-0 zero-sum search",
            detail: format!("q_0 = {} below 2p^(tau+1) - 1 = {need}", profile.q(0)),
        });
    }
    let rep = zero_representing(pair, profile)?;
    let g = rep.guaranteed_colours();
    if g.len() >= 2 {
        let mut support = rep.witnesses[g[0] as usize].clone().unwrap();
        support.extend(rep.witnesses[g[1] as usize].clone().unwrap());
        return Ok(indicator(pair.s(), &support));
    }
    match diverse_search(pair, true)? {
        Some(support) => Ok(indicator(pair.s(), &support)),
        None => Err(Error::InternalContradiction {
            detail: format!("q_0 = {} but no level-0 subset solution was found", profile.q(0)),
            log: Vec::new(),
        }),
    }
}
