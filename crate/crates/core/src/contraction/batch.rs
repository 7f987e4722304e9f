//! Procedures producing several variables at the next level.

use crate::error::{hypothesis, Error, Result};

use super::search::{find_min_cost, Search, Target};
use super::single::{
    colour_counts, contract_half_range, contract_one_nuance, contract_special_bounded, contract_special_two_stage,
    nuance_shift, q_of, uniform_window,
};
use super::{Pool, SMode, VarId};

/// Result of a batch recipe: produced variables and inputs left untouched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BatchOutput {
    pub outputs: Vec<VarId>,
    pub unused: Vec<VarId>,
}

fn live(pool: &Pool, set: &[VarId], exclude: &[VarId]) -> Vec<VarId> {
    set.iter().copied().filter(|&id| pool.is_available(id) && !exclude.contains(&id)).collect()
}

fn shortfall(recipe: &'static str, got: usize, want: usize) -> Error {
    Error::InternalContradiction {
        detail: format!("{recipe}: produced {got} of the {want} guaranteed outputs"),
        log: Vec::new(),
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// Guaranteed number of disjoint primary contractions in a level-0 set.
pub fn level0_primary_bound(p: u64, n: usize, q: usize) -> usize {
    let p = p as usize;
    (n / (2 * p - 1)).min(q / p)
}

/// Pairwise disjoint primary contractions inside a set of level-0
/// variables, at least `min(|H| / (2p-1), q(H) / p)` of them. Stops after
/// `want` when given.
pub fn batch_level0_primaries(pool: &mut Pool, h: &[VarId], want: Option<usize>) -> Result<Vec<VarId>> {
    const R: &str = "batch level-0 primaries";
    let p = pool.params.p as usize;
    if h.iter().any(|&id| !pool.var(id).is_exact(0)) {
        return hypothesis(R, "set contains a variable above level 0");
    }
    let counts = colour_counts(pool, h, 0);
    let bound = level0_primary_bound(pool.params.p, h.len(), q_of(&counts));
    let target = want.unwrap_or(bound);
    let mut out = Vec::new();
    while out.len() < target {
        let rest = live(pool, h, &[]);
        let counts = colour_counts(pool, &rest, 0);
        if rest.len() < 2 * p - 1 || q_of(&counts) < p {
            break;
        }
        let major = (0..counts.len()).max_by_key(|&c| (counts[c], std::cmp::Reverse(c))).unwrap();
        let mut per = vec![0; p + 1];
        let window: Vec<VarId> = rest
            .iter()
            .copied()
            .filter(|&id| {
                let c = pool.var(id).colour().unwrap() as usize;
                per[c] += 1;
                per[c] < 2 * p
            })
            .collect();
        let cost: Vec<u32> =
            window.iter().map(|&id| u32::from(pool.var(id).colour().unwrap() as usize != major)).collect();
        let mut s = Search::new(0, &window, Target::Divisible);
        s.diverse = true;
        let Some(members) = find_min_cost(pool, &s, &cost) else { break };
        out.push(pool.contract(&members, 0, R)?);
    }
    if out.len() < target.min(bound) {
        return Err(shortfall(R, out.len(), target.min(bound)));
    }
    Ok(out)
}

/// `x` special variables at level `l` give `floor((x+3)/p) - 3` special
/// variables one level up, each from at most `p` inputs, leaving at least
/// `min(2p-2, x)` inputs unused.
pub fn batch_special_bounded(
    pool: &mut Pool,
    set: &[VarId],
    l: u32,
    mode: SMode,
    want: Option<usize>,
) -> Result<BatchOutput> {
    const R: &str = "batch bounded special";
    let p = pool.params.p as usize;
    let x = set.len();
    let bound = ((x + 3) / p).saturating_sub(3);
    let target = want.unwrap_or(bound);
    let keep = (2 * p - 2).min(x);
    let mut outputs = Vec::new();
    loop {
        if outputs.len() >= target {
            break;
        }
        let low: Vec<VarId> = live(pool, set, &outputs).into_iter().filter(|&id| pool.var(id).is_exact(l)).collect();
        if low.len() < 3 * p - 2 {
            break;
        }
        outputs.push(contract_special_bounded(pool, &low, l, mode)?);
    }
    for id in live(pool, set, &outputs) {
        if outputs.len() >= target || live(pool, set, &outputs).len() <= keep {
            break;
        }
        if pool.var(id).at_least(l + 1) {
            outputs.push(id);
        }
    }
    let unused = live(pool, set, &outputs);
    if outputs.len() < target || unused.len() < keep {
        return Err(shortfall(R, outputs.len(), target));
    }
    Ok(BatchOutput { outputs, unused })
}

/// `x` variables of colour `nu` at level `l` give `ceil(x/(2p-2)) - 4`
/// variables of colour `nu` at exact level `l + 1`, leaving at least
/// `min(6p-9, x)` unused.
pub fn batch_half_range(pool: &mut Pool, set: &[VarId], l: u32, want: Option<usize>) -> Result<BatchOutput> {
    const R: &str = "batch half-range";
    let p = pool.params.p as i64;
    let x = set.len() as i64;
    let bound = (ceil_div(x, 2 * p - 2) - 4).max(0) as usize;
    let target = want.unwrap_or(bound);
    let mut outputs = Vec::new();
    while outputs.len() < target {
        let rest = live(pool, set, &[]);
        let half = (p - 1) / 2;
        let (lo, hi): (Vec<VarId>, Vec<VarId>) =
            rest.iter().partition(|&&id| pool.var(id).corresponding().unwrap() % p <= half);
        let pick = if lo.len() >= hi.len() { lo } else { hi };
        if pick.len() < (4 * p - 3) as usize {
            break;
        }
        outputs.push(contract_half_range(pool, &pick, l)?);
    }
    let unused = live(pool, set, &[]);
    if outputs.len() < target {
        if target > bound {
            return hypothesis(R, format!("asked for {target} outputs, {x} inputs guarantee {bound}"));
        }
        return Err(shortfall(R, outputs.len(), target));
    }
    Ok(BatchOutput { outputs, unused })
}

/// Guaranteed output count of [`batch_nuance_classes`].
pub fn nuance_classes_bound(p: u64, x: usize) -> Option<usize> {
    let pi = p as i64;
    let xi = x as i64;
    let min = if p == 5 { 2 * pi * pi - 2 * pi + 1 } else { 3 * pi * pi - 3 * pi + 1 };
    if xi < min {
        return None;
    }
    let v = if p == 5 { ceil_div(xi, pi) - 2 * pi + 3 } else { ceil_div(xi, pi) - 2 * pi + (pi - 3) / 2 };
    Some(v.max(0) as usize)
}

/// Many variables of colour `nu` at level `l`: repeated one-nuance
/// contractions, finished with half-range ones. At least `6p - 9` inputs
/// stay unused.
pub fn batch_nuance_classes(pool: &mut Pool, set: &[VarId], l: u32, want: Option<usize>) -> Result<BatchOutput> {
    const R: &str = "batch nuance classes";
    let p = pool.params.p;
    let pi = p as i64;
    let x = set.len();
    let Some(bound) = nuance_classes_bound(p, x) else {
        return hypothesis(R, format!("{x} variables is below the required count"));
    };
    let target = want.unwrap_or(bound);
    let xi = x as i64;
    let rounds = if p == 5 { ceil_div(xi, pi) - 2 * pi + 2 } else { ceil_div(xi, pi) - 3 * pi + 3 }.max(0) as usize;
    let win = uniform_window(p);
    let mut outputs = Vec::new();
    while outputs.len() < rounds.min(target) {
        let rest = live(pool, set, &[]);
        let mut classes: std::collections::BTreeMap<(u32, u32), Vec<VarId>> = Default::default();
        for id in rest {
            classes.entry(pool.var(id).nuance().unwrap()).or_default().push(id);
        }
        let Some(class) = classes.into_values().filter(|c| c.len() >= win).max_by_key(|c| c.len()) else {
            break;
        };
        outputs.push(contract_one_nuance(pool, &class, l)?);
    }
    if outputs.len() < target {
        let rest = live(pool, set, &[]);
        let more = batch_half_range(pool, &rest, l, Some(target - outputs.len()))?;
        outputs.extend(more.outputs);
    }
    let unused = live(pool, set, &[]);
    if outputs.len() < target || unused.len() < 6 * p as usize - 9 {
        return Err(shortfall(R, outputs.len(), target));
    }
    Ok(BatchOutput { outputs, unused })
}

/// Bounded special contractions `x - m` times, then `y` two-stage
/// contractions each taking `p - 1` variables of colour `nu`, `p - 1` of
/// other colours and one special. Gives `x + y - m` outputs and spares
/// `z + mp` specials.
#[allow(clippy::too_many_arguments)]
pub fn batch_bounded_then_two_stage(
    pool: &mut Pool,
    coloured: &[VarId],
    others: &[VarId],
    specials: &[VarId],
    l: u32,
    (x, y, z, m): (usize, usize, usize, usize),
    mode: SMode,
) -> Result<BatchOutput> {
    const R: &str = "bounded then two-stage";
    let p = pool.params.p as usize;
    if m > 2 || x < m || (y + z + 2) < (2 - m as i64).max(0) as usize * p {
        return hypothesis(R, "parameters out of range");
    }
    if coloured.len() < (p - 1) * y || others.len() < (p - 1) * y || specials.len() < p * x + y + z {
        return hypothesis(R, "too few input variables");
    }
    let mut outputs = Vec::new();
    for _ in 0..x - m {
        let rest = live(pool, specials, &outputs);
        outputs.push(contract_special_bounded(pool, &rest, l, mode)?);
    }
    for _ in 0..y {
        let c = live(pool, coloured, &[]);
        let o = live(pool, others, &[]);
        let s = live(pool, specials, &outputs);
        if c.len() < p - 1 || o.len() < p - 1 || s.is_empty() {
            return Err(shortfall(R, outputs.len(), x + y - m));
        }
        outputs.push(contract_special_two_stage(pool, &c[..p - 1], &o[..p - 1], &s[..1], l, mode)?);
    }
    let unused = live(pool, specials, &outputs);
    if unused.len() < z + m * p {
        return Err(shortfall(R, outputs.len(), x + y - m));
    }
    Ok(BatchOutput { outputs, unused })
}

/// A set `K` of level-`l` variables with `|K| >= (2p-2)x + p^2 - 3p + 1` and
/// `q(K) >= (p-1)x`, together with `x` specials, gives `x` special variables
/// one level up.
pub fn batch_two_stage_from_mixed(
    pool: &mut Pool,
    k: &[VarId],
    specials: &[VarId],
    l: u32,
    x: usize,
    mode: SMode,
) -> Result<BatchOutput> {
    const R: &str = "two-stage from mixed colours";
    let p = pool.params.p as usize;
    let counts = colour_counts(pool, k, l);
    if k.len() < (2 * p - 2) * x + p * p - 3 * p + 1 || q_of(&counts) < (p - 1) * x || specials.len() < x {
        return hypothesis(R, format!("|K| = {}, q = {}, x = {x}", k.len(), q_of(&counts)));
    }
    let mut outputs = Vec::new();
    for i in 0..x {
        let rest = live(pool, k, &[]);
        let counts = colour_counts(pool, &rest, l);
        let nu = (0..counts.len()).max_by_key(|&c| (counts[c], std::cmp::Reverse(c))).unwrap() as u32;
        let (col, oth): (Vec<VarId>, Vec<VarId>) = rest.iter().partition(|&&id| pool.var(id).colour() == Some(nu));
        if col.len() < p - 1 || oth.len() < p - 1 {
            return Err(shortfall(R, i, x));
        }
        let s = live(pool, specials, &outputs);
        outputs.push(contract_special_two_stage(pool, &col[..p - 1], &oth[..p - 1], &s[..1], l, mode)?);
    }
    let unused = live(pool, specials, &outputs);
    Ok(BatchOutput { outputs, unused })
}

/// Bounded special contractions `x - m` times, then the mixed-colour
/// two-stage recipe for `y` more.
#[allow(clippy::too_many_arguments)]
pub fn batch_bounded_then_mixed(
    pool: &mut Pool,
    k: &[VarId],
    specials: &[VarId],
    l: u32,
    (x, y, z, m): (usize, usize, usize, usize),
    mode: SMode,
) -> Result<BatchOutput> {
    const R: &str = "bounded then mixed";
    let p = pool.params.p as usize;
    if m > 2 || x < m || (y + z + 2) < (2 - m) * p {
        return hypothesis(R, "parameters out of range");
    }
    if specials.len() < p * x + y + z {
        return hypothesis(R, "too few special variables");
    }
    let mut outputs = Vec::new();
    for _ in 0..x - m {
        let rest = live(pool, specials, &outputs);
        outputs.push(contract_special_bounded(pool, &rest, l, mode)?);
    }
    let rest = live(pool, specials, &outputs);
    let more = batch_two_stage_from_mixed(pool, k, &rest[..y.min(rest.len())], l, y, mode)?;
    outputs.extend(more.outputs);
    let unused = live(pool, specials, &outputs);
    if unused.len() < z + m * p {
        return Err(shortfall(R, outputs.len(), x + y - m));
    }
    Ok(BatchOutput { outputs, unused })
}

/// At least `px + p^2 - 3p + 3` variables of colour `nu`, with `x` of some
/// nuance and `x` of other nuances: `x` nuance shifts, each giving a variable
/// at exact level `l + 1` of a colour other than `nu`.
pub fn batch_nuance_shift(pool: &mut Pool, set: &[VarId], l: u32, x: usize) -> Result<BatchOutput> {
    const R: &str = "batch nuance shift";
    let p = pool.params.p as usize;
    if set.len() < p * x + p * p - 3 * p + 3 {
        return hypothesis(R, format!("{} variables, need {}", set.len(), p * x + p * p - 3 * p + 3));
    }
    if x == 0 {
        return Ok(BatchOutput { outputs: vec![], unused: set.to_vec() });
    }
    let table: std::collections::HashMap<VarId, u32> =
        set.iter().map(|&id| (id, pool.var(id).nuance().unwrap().1)).collect();
    let nuance = |id: VarId| table[&id];
    let mut freq = vec![0usize; p];
    for &id in set {
        freq[nuance(id) as usize] += 1;
    }
    let Some(mu) = (0..p).find(|&m| freq[m] >= x && set.len() - freq[m] >= x) else {
        return hypothesis(R, "no two nuance groups of the required size");
    };
    let mut a: Vec<VarId> = set.iter().copied().filter(|&id| nuance(id) as usize == mu).take(x).collect();
    let mut b: Vec<VarId> = set.iter().copied().filter(|&id| nuance(id) as usize != mu).take(x).collect();
    let mut last: Vec<VarId> = set.iter().copied().filter(|id| !a.contains(id) && !b.contains(id)).collect();
    let mut outputs = Vec::new();
    for _ in 0..x {
        last.retain(|&id| pool.is_available(id));
        let mut by: Vec<Vec<VarId>> = vec![Vec::new(); p];
        for &id in &last {
            by[nuance(id) as usize].push(id);
        }
        let eta = (0..p).max_by_key(|&e| (by[e].len(), std::cmp::Reverse(e))).unwrap();
        if by[eta].len() < p - 1 {
            return Err(shortfall(R, outputs.len(), x));
        }
        let (odd, other) = if eta != mu { (a.pop(), &mut b) } else { (b.pop(), &mut a) };
        let odd = odd.ok_or_else(|| shortfall(R, outputs.len(), x))?;
        outputs.push(nuance_shift(pool, &by[eta][..p - 1], odd, l)?);
        if let Some(v) = other.pop() {
            last.push(v);
        }
    }
    Ok(BatchOutput { outputs, unused: live(pool, set, &[]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::FormPair;
    use crate::padic::derive_params;

    fn pool(coeffs: &[(i64, i64)]) -> Pool {
        let pr = derive_params(5, 1).unwrap();
        Pool::new(&FormPair::from_i64(pr, coeffs).unwrap()).unwrap()
    }

    #[test]
    fn primaries_small() {
        let mut c = vec![(1, 0); 4];
        c.extend(vec![(0, 1); 4]);
        c.push((1, 1));
        let mut pl = pool(&c);
        let ids: Vec<usize> = (0..9).collect();
        let out = batch_level0_primaries(&mut pl, &ids, None).unwrap();
        assert_eq!(out.len(), 1);
        assert!(pl.var(out[0]).primary());
        let mut mono = pool(&[(1, 0); 12]);
        let ids: Vec<usize> = (0..12).collect();
        assert!(batch_level0_primaries(&mut mono, &ids, None).unwrap().is_empty());
    }

    #[test]
    fn bounded_special_counts() {
        // colour 1 variables are colourful at level 0
        let mut pl = pool(&vec![(1, 1); 28]);
        let ids: Vec<usize> = (0..28).collect();
        let out = batch_special_bounded(&mut pl, &ids, 0, SMode::Colourful, None).unwrap();
        assert_eq!(out.outputs.len(), 3);
        assert!(out.unused.len() >= 8);
    }

    #[test]
    fn half_range_counts() {
        let mut pl = pool(&vec![(1, 0); 40]);
        let ids: Vec<usize> = (0..40).collect();
        let out = batch_half_range(&mut pl, &ids, 0, None).unwrap();
        assert_eq!(out.outputs.len(), 1);
        assert!(out.unused.len() >= 21);
    }

    #[test]
    fn nuance_shift_counts() {
        let mut c = vec![(1, 0); 41];
        c.extend(vec![(1, 5); 4]);
        let mut pl = pool(&c);
        let ids: Vec<usize> = (0..45).collect();
        let out = batch_nuance_shift(&mut pl, &ids, 0, 2).unwrap();
        assert_eq!(out.outputs.len(), 2);
        let consumed = 45 - out.unused.len();
        assert!(consumed <= 10);
        for &o in &out.outputs {
            assert_eq!(pl.var(o).exact_level(), Some(1));
            assert_ne!(pl.var(o).colour(), Some(0));
        }
    }
}
