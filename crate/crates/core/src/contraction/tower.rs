//! Iterated contractions across consecutive levels.

use crate::error::{hypothesis, Result};

use super::batch::{batch_half_range, batch_nuance_classes, batch_special_bounded};
use super::single::contract_special_with_colour;
use super::{Pool, SMode, VarId};

/// Variables reaching the top level of a tower, plus the spare variables
/// left at each intermediate level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TowerOutput {
    pub top: Vec<VarId>,
    pub spares: Vec<(u32, Vec<VarId>)>,
}

impl TowerOutput {
    pub fn spares_at(&self, l: u32) -> &[VarId] {
        self.spares.iter().find(|(lv, _)| *lv == l).map(|(_, v)| v.as_slice()).unwrap_or(&[])
    }
}

fn pw(p: i64, e: i64) -> i64 {
    if e < 0 {
        0
    } else {
        p.pow(e as u32)
    }
}

fn geo(p: i64, from: i64, to: i64) -> i64 {
    (from..=to).map(|i| pw(p, i)).sum()
}

/// Input count of the one-colour tower starting at level `j`.
pub fn one_colour_tower_count(p: u64, tau: u32, j: u32, m: i64) -> i64 {
    let (p, t) = (p as i64, (tau - j) as i64);
    2 * pw(p, t + 1) + (4 - 2 * m) * pw(p, t) - (p - 1) / 2 * geo(p, 1, t - 1) + (2 * m - 1) * pw(p, t - 1)
        + 3 * geo(p, 0, t - 2)
        - 2 * p
        - 2
}

/// Input count of the `p = 5` one-colour tower starting at level `j`.
pub fn one_colour_tower_count_p5(p: u64, tau: u32, j: u32, m: i64) -> i64 {
    let (p, t) = (p as i64, (tau - j) as i64);
    3 * pw(p, t + 1) - m * pw(p, t) - 3 * pw(p, t) - geo(p, 0, t - 1) - 2 * p + 2
}

/// Input count of the spare-only tower starting at level `j`.
pub fn spare_tower_count(p: u64, tau: u32, j: u32) -> i64 {
    let (p, t) = (p as i64, (tau - j) as i64);
    4 * pw(p, t) - (p - 1) / 2 * geo(p, 1, t - 1) + 3 * geo(p, 0, t - 2) - 2 * p - 2
}

/// Number of special variables at level `l` in the special towers.
pub fn special_tower_size(p: u64, tau: u32, l: u32, m: i64) -> i64 {
    let (p, t) = (p as i64, tau as i64 - l as i64);
    pw(p, t + 1) + m * pw(p, t)
}

/// Special variables at level `i` pushed to level `j` by repeated bounded
/// contractions, keeping `2p - 2` spares per level.
pub fn tower_special(pool: &mut Pool, set: &[VarId], i: u32, j: u32, m: i64, mode: SMode) -> Result<TowerOutput> {
    const R: &str = "special tower";
    let p = pool.params.p;
    let tau = pool.params.tau;
    if !(i <= j && j <= tau && m >= -1) {
        return hypothesis(R, "levels or m out of range");
    }
    let need = special_tower_size(p, tau, i, m) - 2;
    if (set.len() as i64) < need {
        return hypothesis(R, format!("{} special variables, need {need}", set.len()));
    }
    let mut cur: Vec<VarId> = set[..need as usize].to_vec();
    let mut out = TowerOutput::default();
    for l in i..j {
        let want = (special_tower_size(p, tau, l + 1, m) - 2) as usize;
        let b = batch_special_bounded(pool, &cur, l, mode, Some(want))?;
        out.spares.push((l, b.unused));
        cur = b.outputs;
    }
    out.top = cur;
    Ok(out)
}

/// Special variables at level `i` pushed to level `j` with the help of
/// `2p - 2` single-colour variables per level (`coloured[l - i]`).
pub fn tower_special_with_colours(
    pool: &mut Pool,
    set: &[VarId],
    coloured: &[Vec<VarId>],
    i: u32,
    j: u32,
    m: i64,
    mode: SMode,
) -> Result<Vec<VarId>> {
    const R: &str = "special tower with colours";
    let p = pool.params.p;
    let tau = pool.params.tau;
    let pu = p as usize;
    if !(i <= j && j <= tau && m >= -1) || coloured.len() < (j - i) as usize {
        return hypothesis(R, "levels, m or colour sets out of range");
    }
    let need = special_tower_size(p, tau, i, m);
    if (set.len() as i64) < need {
        return hypothesis(R, format!("{} special variables, need {need}", set.len()));
    }
    let mut cur: Vec<VarId> = set[..need as usize].to_vec();
    for l in i..j {
        let col = &coloured[(l - i) as usize];
        if col.len() < 2 * pu - 2 {
            return hypothesis(R, format!("level {l}: {} coloured variables, need {}", col.len(), 2 * pu - 2));
        }
        let want = (special_tower_size(p, tau, l + 1, m) - 2) as usize;
        let b = batch_special_bounded(pool, &cur, l, mode, Some(want))?;
        let mut next = b.outputs;
        let mut spare: Vec<VarId> = b.unused;
        for half in 0..2 {
            spare.retain(|&id| pool.is_available(id) && !next.contains(&id));
            if spare.len() < pu {
                return hypothesis(R, format!("level {l}: only {} spare special variables", spare.len()));
            }
            let cs = &col[half * (pu - 1)..(half + 1) * (pu - 1)];
            next.push(contract_special_with_colour(pool, &spare[..pu], cs, l, mode)?);
        }
        cur = next;
    }
    Ok(cur)
}

/// Single-colour variables at level `j` pushed to `p - m - 1` variables at
/// level `tau`, keeping `2p - 2` spares per level.
pub fn tower_one_colour(pool: &mut Pool, set: &[VarId], j: u32, m: i64) -> Result<TowerOutput> {
    const R: &str = "one-colour tower";
    let p = pool.params.p;
    let tau = pool.params.tau;
    let pi = p as i64;
    if j >= tau || m > pi - 1 {
        return hypothesis(R, "j or m out of range");
    }
    let need = one_colour_tower_count(p, tau, j, m);
    if need < 0 {
        return hypothesis(R, format!("input count {need} is negative for m = {m}"));
    }
    if (set.len() as i64) < need {
        return hypothesis(R, format!("{} variables, need {need}", set.len()));
    }
    let mut cur: Vec<VarId> = set[..need as usize].to_vec();
    let mut out = TowerOutput::default();
    for l in j..tau - 1 {
        let want = one_colour_tower_count(p, tau, l + 1, m) as usize;
        let b = batch_nuance_classes(pool, &cur, l, Some(want))?;
        out.spares.push((l, b.unused));
        cur = b.outputs;
    }
    let want = (pi - m - 1).max(0) as usize;
    let b = batch_half_range(pool, &cur, tau - 1, Some(want))?;
    out.spares.push((tau - 1, b.unused));
    out.top = b.outputs;
    Ok(out)
}

/// The `p = 5` variant of [`tower_one_colour`].
pub fn tower_one_colour_p5(pool: &mut Pool, set: &[VarId], j: u32, m: i64) -> Result<TowerOutput> {
    const R: &str = "one-colour tower (p = 5)";
    let p = pool.params.p;
    let tau = pool.params.tau;
    if p != 5 || j > tau || m > 4 {
        return hypothesis(R, "requires p = 5, j <= tau, m <= 4");
    }
    let need = one_colour_tower_count_p5(p, tau, j, m);
    if (set.len() as i64) < need || need < 0 {
        return hypothesis(R, format!("{} variables, need {need}", set.len()));
    }
    let mut cur: Vec<VarId> = set[..need as usize].to_vec();
    let mut out = TowerOutput::default();
    if j == tau {
        out.top = cur;
        return Ok(out);
    }
    for l in j..tau - 1 {
        let want = one_colour_tower_count_p5(p, tau, l + 1, m) as usize;
        let b = batch_nuance_classes(pool, &cur, l, Some(want))?;
        out.spares.push((l, b.unused));
        cur = b.outputs;
    }
    let want = (4 - m).max(0) as usize;
    let b = match m {
        4 => super::batch::BatchOutput { outputs: vec![], unused: cur },
        3 => batch_half_range(pool, &cur, tau - 1, Some(want))?,
        _ => batch_nuance_classes(pool, &cur, tau - 1, Some(want))?,
    };
    out.spares.push((tau - 1, b.unused));
    out.top = b.outputs;
    Ok(out)
}

/// Single-colour variables at level `j` giving `2p - 2` variables at every
/// level `j..tau`.
pub fn tower_colour_spares(pool: &mut Pool, set: &[VarId], j: u32) -> Result<TowerOutput> {
    const R: &str = "spare tower";
    let p = pool.params.p;
    let tau = pool.params.tau;
    if j >= tau {
        return hypothesis(R, "j must be below tau");
    }
    let need = spare_tower_count(p, tau, j);
    if (set.len() as i64) < need {
        return hypothesis(R, format!("{} variables, need {need}", set.len()));
    }
    let mut cur: Vec<VarId> = set[..need as usize].to_vec();
    let mut out = TowerOutput::default();
    for l in j..tau - 1 {
        let want = spare_tower_count(p, tau, l + 1) as usize;
        let b = batch_nuance_classes(pool, &cur, l, Some(want))?;
        out.spares.push((l, b.unused));
        cur = b.outputs;
    }
    out.spares.push((tau - 1, cur));
    Ok(out)
}

/// Special variables at level `j`, `p - m - 1` single-colour variables at
/// level `tau` and `2p - 2` coloured spares per level: one special variable
/// at level `tau + 1`.
pub fn tower_to_terminal(
    pool: &mut Pool,
    specials: &[VarId],
    top: &[VarId],
    coloured: &[Vec<VarId>],
    j: u32,
    m: i64,
    mode: SMode,
) -> Result<VarId> {
    const R: &str = "tower to terminal";
    let p = pool.params.p as i64;
    let tau = pool.params.tau;
    if (top.len() as i64) < p - m - 1 {
        return hypothesis(R, format!("{} top variables, need {}", top.len(), p - m - 1));
    }
    let s = tower_special_with_colours(pool, specials, coloured, j, tau, m, mode)?;
    let top = &top[..(p - m - 1) as usize];
    contract_special_with_colour(pool, &s, top, tau, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_closed_forms() {
        // tau - j = 1 reduces to 2p^2 + (2 - 2m)p + 2m - 3
        for m in -1..5 {
            assert_eq!(one_colour_tower_count(7, 1, 0, m), 98 + (2 - 2 * m) * 7 + 2 * m - 3);
        }
        assert_eq!(one_colour_tower_count_p5(5, 2, 1, 0), 3 * 25 - 25 + 1);
        assert_eq!(spare_tower_count(5, 2, 1), 8);
        assert_eq!(spare_tower_count(5, 2, 0), 100 - 10 + 3 - 12);
        assert_eq!(special_tower_size(5, 2, 0, 0) - 2, 123);
    }
}
