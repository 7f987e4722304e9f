//! Procedures producing one variable at the next level.

use crate::error::{hypothesis, Error, Result};
use crate::forms::classify_mod_p2;
use crate::zerosum::{forced_element_solution, olson_subset, subset_zero_p_not_p2};

use super::search::{find, Search, Target};
use super::{Pool, SMode, VarId};

pub(crate) fn colour_counts(pool: &Pool, set: &[VarId], l: u32) -> Vec<usize> {
    let mut counts = vec![0; pool.params.p as usize + 1];
    for &id in set {
        let v = pool.var(id);
        if v.is_exact(l) {
            counts[v.colour().unwrap() as usize] += 1;
        }
    }
    counts
}

pub(crate) fn q_of(counts: &[usize]) -> usize {
    counts.iter().sum::<usize>() - counts.iter().copied().max().unwrap_or(0)
}

/// Sum of level-`l` vectors of `members` modulo `p^2`.
pub(crate) fn sum_mod_p2(pool: &Pool, members: &[VarId], l: u32) -> (i64, i64) {
    let p2 = (pool.params.p * pool.params.p) as i64;
    members.iter().fold((0, 0), |(a, b), &id| {
        let (x, y) = pool.vector_at(id, l);
        ((a + x) % p2, (b + y) % p2)
    })
}

/// Colour at level `l + 1` of a sum modulo `p^2`, if the sum has exactly
/// that level.
pub(crate) fn next_colour(p: u64, sum: (i64, i64)) -> Option<u32> {
    let pi = p as i64;
    if sum.0 % pi != 0 || sum.1 % pi != 0 || sum == (0, 0) {
        return None;
    }
    classify_mod_p2(pi, sum.0 / pi, sum.1 / pi).map(|c| c.0)
}

/// Minimum window from which a single-colour valuation-one subset of size at
/// most `p` exists.
pub fn uniform_window(p: u64) -> usize {
    if p == 5 {
        9
    } else {
        3 * p as usize - 2
    }
}

fn first_high(pool: &Pool, set: &[VarId], l: u32) -> Option<VarId> {
    set.iter().copied().find(|&id| pool.var(id).at_least(l + 1))
}

fn check_available(pool: &Pool, set: &[VarId], recipe: &'static str) -> Result<()> {
    if let Some(id) = set.iter().find(|&&id| !pool.is_available(id)) {
        return hypothesis(recipe, format!("variable {id} already consumed"));
    }
    Ok(())
}

fn check_exact_colour(pool: &Pool, set: &[VarId], l: u32, nu: Option<u32>, recipe: &'static str) -> Result<()> {
    for &id in set {
        let v = pool.var(id);
        if !v.is_exact(l) {
            return hypothesis(recipe, format!("variable {id} is not at exact level {l}"));
        }
        if let Some(nu) = nu {
            if v.colour() != Some(nu) {
                return hypothesis(recipe, format!("variable {id} is not of colour {nu}"));
            }
        }
    }
    Ok(())
}

fn check_special(pool: &Pool, set: &[VarId], l: u32, mode: SMode, recipe: &'static str) -> Result<()> {
    for &id in set {
        let v = pool.var(id);
        if !v.at_least(l) || !v.is_special(mode) {
            return hypothesis(recipe, format!("variable {id} is not special at level {l}"));
        }
    }
    Ok(())
}

/// Members of `set` in order, keeping at most `cap` per level-`l` colour.
fn capped_window(pool: &Pool, set: &[VarId], cap: usize) -> Vec<VarId> {
    let mut counts = vec![0; pool.params.p as usize + 2];
    let mut out = Vec::new();
    for &id in set {
        let c = pool.var(id).colour().map(|c| c as usize).unwrap_or(pool.params.p as usize + 1);
        if counts[c] < cap {
            counts[c] += 1;
            out.push(id);
        }
    }
    out
}

fn not_found(recipe: &'static str) -> Error {
    Error::InternalContradiction { detail: format!("{recipe}: guaranteed subset not found"), log: Vec::new() }
}

/// A contraction inside a set of level-`l` variables, with `|set| >= 2p-1`
/// and `q >= p`, using at least two colours.
pub fn contract_two_colours(pool: &mut Pool, set: &[VarId], l: u32) -> Result<VarId> {
    const R: &str = "two-colour contraction";
    let p = pool.params.p as usize;
    check_available(pool, set, R)?;
    check_exact_colour(pool, set, l, None, R)?;
    let counts = colour_counts(pool, set, l);
    if set.len() < 2 * p - 1 || q_of(&counts) < p {
        return hypothesis(R, format!("{} variables with q = {}", set.len(), q_of(&counts)));
    }
    let window = capped_window(pool, set, 2 * p - 1);
    let mut s = Search::new(l, &window, Target::Divisible);
    s.diverse = true;
    let members = find(pool, &s).ok_or_else(|| not_found(R))?;
    pool.contract(&members, l, R)
}

/// `2p - 1` special variables contract to a special variable one level up.
pub fn contract_special(pool: &mut Pool, set: &[VarId], l: u32, mode: SMode) -> Result<VarId> {
    const R: &str = "special contraction";
    let p = pool.params.p as usize;
    check_available(pool, set, R)?;
    check_special(pool, set, l, mode, R)?;
    if let Some(id) = first_high(pool, set, l) {
        return Ok(id);
    }
    if set.len() < 2 * p - 1 {
        return hypothesis(R, format!("need {} special variables, got {}", 2 * p - 1, set.len()));
    }
    let window = &set[..2 * p - 1];
    let members = find(pool, &Search::new(l, window, Target::Divisible)).ok_or_else(|| not_found(R))?;
    pool.contract(&members, l, R)
}

/// `3p - 2` special variables: contract at most `p` of them one level up.
pub fn contract_special_bounded(pool: &mut Pool, set: &[VarId], l: u32, mode: SMode) -> Result<VarId> {
    const R: &str = "bounded special contraction";
    let p = pool.params.p as usize;
    check_available(pool, set, R)?;
    check_special(pool, set, l, mode, R)?;
    if let Some(id) = first_high(pool, set, l) {
        return Ok(id);
    }
    if set.len() < 3 * p - 2 {
        return hypothesis(R, format!("need {} special variables, got {}", 3 * p - 2, set.len()));
    }
    let window = &set[..3 * p - 2];
    let mut s = Search::new(l, window, Target::Divisible);
    s.max_size = Some(p);
    let members = find(pool, &s).ok_or_else(|| not_found(R))?;
    pool.contract(&members, l, R)
}

/// Variables of one colour: at most `p` of them contract to exact level `l + 1`.
pub fn contract_one_colour(pool: &mut Pool, set: &[VarId], l: u32) -> Result<VarId> {
    const R: &str = "one-colour contraction";
    let p = pool.params.p;
    check_available(pool, set, R)?;
    let nu = set.first().and_then(|&id| pool.var(id).colour());
    check_exact_colour(pool, set, l, nu, R)?;
    let need = uniform_window(p);
    if set.len() < need {
        return hypothesis(R, format!("need {need} variables, got {}", set.len()));
    }
    let mut s = Search::new(l, &set[..need], Target::ExactNext);
    s.max_size = Some(p as usize);
    let members = find(pool, &s).ok_or_else(|| not_found(R))?;
    pool.contract(&members, l, R)
}

/// Variables of one nuance `(nu, mu)`: at most `p` of them contract to a
/// variable of exact level `l + 1` and colour `nu`.
pub fn contract_one_nuance(pool: &mut Pool, set: &[VarId], l: u32) -> Result<VarId> {
    const R: &str = "one-nuance contraction";
    let p = pool.params.p;
    check_available(pool, set, R)?;
    check_exact_colour(pool, set, l, None, R)?;
    let nuance = set.first().and_then(|&id| pool.var(id).nuance());
    if set.iter().any(|&id| pool.var(id).nuance() != nuance) {
        return hypothesis(R, "variables of different nuances");
    }
    let need = uniform_window(p);
    if set.len() < need {
        return hypothesis(R, format!("need {need} variables, got {}", set.len()));
    }
    let window = &set[..need];
    let c: Vec<i64> = window.iter().map(|&id| pool.var(id).corresponding().unwrap()).collect();
    let w = subset_zero_p_not_p2(&c, p).map_err(|_| not_found(R))?;
    let members: Vec<VarId> = w.indices.iter().map(|&i| window[i]).collect();
    let nu = nuance.unwrap().0;
    if next_colour(p, sum_mod_p2(pool, &members, l)) != Some(nu) {
        return Err(not_found(R));
    }
    pool.contract(&members, l, R)
}

/// `p - 1` variables of nuance `(nu, mu1)` and `odd` of nuance `(nu, mu2)`
/// contract, through `odd`, to exact level `l + 1` with colour other than `nu`.
pub fn nuance_shift(pool: &mut Pool, same: &[VarId], odd: VarId, l: u32) -> Result<VarId> {
    const R: &str = "nuance shift";
    let p = pool.params.p;
    check_available(pool, same, R)?;
    check_available(pool, &[odd], R)?;
    check_exact_colour(pool, same, l, None, R)?;
    check_exact_colour(pool, &[odd], l, None, R)?;
    if same.len() != p as usize - 1 {
        return hypothesis(R, format!("need {} variables of one nuance, got {}", p - 1, same.len()));
    }
    let n1 = pool.var(same[0]).nuance().unwrap();
    let n2 = pool.var(odd).nuance().unwrap();
    if same.iter().any(|&id| pool.var(id).nuance() != Some(n1)) || n1.0 != n2.0 || n1.1 == n2.1 {
        return hypothesis(R, "nuances do not fit");
    }
    let mut order = vec![odd];
    order.extend_from_slice(same);
    let c: Vec<i64> = order.iter().map(|&id| pool.var(id).corresponding().unwrap()).collect();
    let x = forced_element_solution(&c, &pool.params, 1).map_err(|_| not_found(R))?;
    let members: Vec<VarId> = order.iter().zip(&x).filter(|(_, &xi)| xi != 0).map(|(&id, _)| id).collect();
    match next_colour(p, sum_mod_p2(pool, &members, l)) {
        Some(c) if c != n1.0 => pool.contract(&members, l, R),
        _ => Err(not_found(R)),
    }
}

/// `p` variables of colour `nu` at level `l`, at least one of them special,
/// contract to a special variable one level up.
pub fn fill_colour_with_special(pool: &mut Pool, set: &[VarId], l: u32, mode: SMode) -> Result<VarId> {
    const R: &str = "single-colour fill";
    let p = pool.params.p as usize;
    check_available(pool, set, R)?;
    if let Some(id) = set.iter().copied().find(|&id| pool.var(id).is_special(mode) && pool.var(id).at_least(l + 1)) {
        return Ok(id);
    }
    let nu = set.first().and_then(|&id| pool.var(id).colour());
    check_exact_colour(pool, set, l, nu, R)?;
    if set.len() < p || !set.iter().any(|&id| pool.var(id).is_special(mode)) {
        return hypothesis(R, "need p variables of one colour including a special one");
    }
    let mut s = Search::new(l, &set[..p], Target::Divisible);
    s.need_special = Some(mode);
    let members = find(pool, &s).ok_or_else(|| not_found(R))?;
    pool.contract(&members, l, R)
}

/// At least `4p - 3` variables of colour `nu` whose corresponding integers
/// all lie in one half of `1..p`: at most `2p - 2` of them contract to exact
/// level `l + 1` and colour `nu`.
pub fn contract_half_range(pool: &mut Pool, set: &[VarId], l: u32) -> Result<VarId> {
    const R: &str = "half-range contraction";
    let p = pool.params.p;
    let pi = p as i64;
    check_available(pool, set, R)?;
    let nu = match set.first().and_then(|&id| pool.var(id).colour()) {
        Some(nu) => nu,
        None => return hypothesis(R, "empty set"),
    };
    check_exact_colour(pool, set, l, Some(nu), R)?;
    let need = 4 * p as usize - 3;
    if set.len() < need {
        return hypothesis(R, format!("need {need} variables, got {}", set.len()));
    }
    let half = (pi - 1) / 2;
    let lower = |id: VarId| (pool.var(id).corresponding().unwrap() % pi) <= half;
    let upper = !lower(set[0]);
    if set.iter().any(|&id| lower(id) == upper) {
        return hypothesis(R, "corresponding integers span both halves");
    }
    let h: Vec<VarId> = set[..need].to_vec();
    let parts: Vec<(i64, i64, i64)> = h
        .iter()
        .map(|&id| {
            let v = pool.var(id);
            let c = v.corresponding().unwrap();
            let mu = v.nuance().unwrap().1 as i64;
            let (d, f) = (c % pi, c / pi);
            if upper {
                (pi - d, pi - f - 1, mu)
            } else {
                (d, f, mu)
            }
        })
        .collect();
    let by_proof = || -> Option<Vec<VarId>> {
        let four: Vec<Vec<i64>> = parts.iter().map(|&(d, f, mu)| vec![d, d * mu, f, 1]).collect();
        let j = olson_subset(&four, p).ok()?.indices;
        let k: Vec<usize> = if j.len() == 3 * pi as usize {
            let jt = &j[..j.len() - 2];
            let three: Vec<Vec<i64>> = jt.iter().map(|&i| {
                let (d, f, mu) = parts[i];
                vec![d, d * mu, f]
            }).collect();
            let jh: Vec<usize> = olson_subset(&three, p).ok()?.indices.iter().map(|&i| jt[i]).collect();
            let rest: Vec<usize> = j.iter().copied().filter(|i| !jh.contains(i)).collect();
            if jh.len() <= rest.len() { jh } else { rest }
        } else {
            j
        };
        let k = if k.len() >= 2 * pi as usize - 1 {
            let kt = &k[..2 * pi as usize - 1];
            let two: Vec<Vec<i64>> = kt.iter().map(|&i| {
                let (d, _, mu) = parts[i];
                vec![d, d * mu]
            }).collect();
            let sub: Vec<usize> = olson_subset(&two, p).ok()?.indices.iter().map(|&i| kt[i]).collect();
            if sub.len() == k.len() {
                return None;
            }
            let rest: Vec<usize> = k.iter().copied().filter(|i| !sub.contains(i)).collect();
            let ids: Vec<VarId> = sub.iter().map(|&i| h[i]).collect();
            if next_colour(p, sum_mod_p2(pool, &ids, l)).is_some() { sub } else { rest }
        } else {
            k
        };
        let ids: Vec<VarId> = k.iter().map(|&i| h[i]).collect();
        (ids.len() <= 2 * pi as usize - 2 && next_colour(p, sum_mod_p2(pool, &ids, l)) == Some(nu)).then_some(ids)
    };
    if let Some(members) = by_proof() {
        return pool.contract(&members, l, R);
    }
    let mut s = Search::new(l, &h, Target::NextColour(nu));
    s.max_size = Some(2 * p as usize - 2);
    let members = find(pool, &s).ok_or_else(|| not_found(R))?;
    pool.contract(&members, l, "half-range contraction (search)")
}

/// `p + m` special variables and `p - m - 1` variables of colour `nu` at
/// level `l` contract to a special variable one level up.
pub fn contract_special_with_colour(
    pool: &mut Pool,
    specials: &[VarId],
    coloured: &[VarId],
    l: u32,
    mode: SMode,
) -> Result<VarId> {
    const R: &str = "special contraction with one colour";
    let p = pool.params.p as usize;
    check_available(pool, specials, R)?;
    check_available(pool, coloured, R)?;
    check_special(pool, specials, l, mode, R)?;
    if let Some(id) = first_high(pool, specials, l) {
        return Ok(id);
    }
    if specials.len() + coloured.len() < 2 * p - 1 || specials.is_empty() {
        return hypothesis(R, "need 2p - 1 variables including a special one");
    }
    let nu = coloured.first().and_then(|&id| pool.var(id).colour());
    check_exact_colour(pool, coloured, l, nu, R)?;
    let all: Vec<VarId> = specials.iter().chain(coloured).copied().take(2 * p - 1).collect();
    let counts = colour_counts(pool, &all, l);
    if let Some(mu) = (0..counts.len()).find(|&c| counts[c] >= p) {
        let mut group: Vec<VarId> = specials.iter().copied().filter(|&id| pool.var(id).colour() == Some(mu as u32)).collect();
        group.extend(coloured.iter().copied().filter(|&id| pool.var(id).colour() == Some(mu as u32)));
        group.truncate(p);
        return fill_colour_with_special(pool, &group, l, mode);
    }
    let id = contract_two_colours(pool, &all, l)?;
    if !pool.var(id).is_special(mode) {
        return Err(not_found(R));
    }
    Ok(id)
}

/// `p - 1` variables of colour `nu`, `p - m - 1` of other colours and `m + 1`
/// special variables at level `l` contract to a special variable one level up.
pub fn contract_special_two_stage(
    pool: &mut Pool,
    coloured: &[VarId],
    others: &[VarId],
    specials: &[VarId],
    l: u32,
    mode: SMode,
) -> Result<VarId> {
    const R: &str = "two-stage special contraction";
    let p = pool.params.p as usize;
    let pi = p as i64;
    check_available(pool, coloured, R)?;
    check_available(pool, others, R)?;
    check_available(pool, specials, R)?;
    check_special(pool, specials, l, mode, R)?;
    if let Some(id) = first_high(pool, specials, l) {
        return Ok(id);
    }
    if coloured.len() < p - 1 || others.len() + specials.len() < p || specials.is_empty() {
        return hypothesis(R, "need p - 1 variables of one colour and p further ones including a special one");
    }
    let coloured = &coloured[..p - 1];
    let nu = pool.var(coloured[0]).colour().unwrap_or(0);
    check_exact_colour(pool, coloured, l, Some(nu), R)?;
    if let Some(&sv) = specials.iter().find(|&&id| pool.var(id).colour() == Some(nu)) {
        let mut group = coloured.to_vec();
        group.push(sv);
        return fill_colour_with_special(pool, &group, l, mode);
    }
    let n_others = p - specials.len().min(p);
    let mut rest: Vec<VarId> = others[..n_others.min(others.len())].to_vec();
    rest.extend_from_slice(&specials[..specials.len().min(p)]);
    check_exact_colour(pool, &rest, l, None, R)?;
    if rest.iter().any(|&id| pool.var(id).colour() == Some(nu)) {
        return hypothesis(R, "a further variable has the excluded colour");
    }
    // linear map sending colour nu to the first axis
    let nu_hat = (nu as i64) % pi;
    let t = |(a, b): (i64, i64)| -> (i64, i64) {
        let (a, b) = (a.rem_euclid(pi), b.rem_euclid(pi));
        if nu == 0 {
            (a, b)
        } else if nu_hat == 0 {
            (b, a)
        } else {
            (a, (a - nu_hat * b).rem_euclid(pi))
        }
    };
    let alpha: Vec<i64> = coloured.iter().map(|&id| t(pool.vector_at(id, l)).0).collect();
    let bg: Vec<(i64, i64)> = rest.iter().map(|&id| t(pool.vector_at(id, l))).collect();
    // stage one: the last special variable is forced
    let forced = rest.len() - 1;
    let mut order = vec![forced];
    order.extend(0..forced);
    let gam: Vec<i64> = order.iter().map(|&i| bg[i].1).collect();
    let x1 = forced_element_solution(&gam, &pool.params, 1).map_err(|_| not_found(R))?;
    let j1: Vec<usize> = order.iter().zip(&x1).filter(|(_, &x)| x != 0).map(|(&i, _)| i).collect();
    let c = j1.iter().map(|&i| bg[i].0).sum::<i64>().rem_euclid(pi);
    let mut members: Vec<VarId> = j1.iter().map(|&i| rest[i]).collect();
    if c != 0 {
        let mut coeffs = vec![c];
        coeffs.extend_from_slice(&alpha);
        let x2 = forced_element_solution(&coeffs, &pool.params, 1).map_err(|_| not_found(R))?;
        members.extend(coloured.iter().zip(&x2[1..]).filter(|(_, &x)| x != 0).map(|(&id, _)| id));
    }
    members.sort_unstable();
    let id = pool.contract(&members, l, R)?;
    if !pool.var(id).is_special(mode) {
        return Err(not_found(R));
    }
    Ok(id)
}
