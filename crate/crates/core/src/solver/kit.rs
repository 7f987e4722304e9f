//! Shared plumbing for the branch recipes: a pool over a frame, selection
//! helpers, and turning a terminal variable into a frame assignment.

use num_bigint::BigInt;

use crate::contraction::batch::batch_level0_primaries;
use crate::contraction::tower::{
    one_colour_tower_count, one_colour_tower_count_p5, tower_one_colour, tower_one_colour_p5, TowerOutput,
};
use crate::contraction::{Pool, SMode, VarId};
use crate::error::{Error, Result};

use super::zerorep::{indicator, residues, zero_subset, DP_BITS};
use super::{Frame, Outcome};

pub(crate) fn pw(p: u64, e: i64) -> i64 {
    if e < 0 {
        0
    } else {
        (p as i64).pow(e as u32)
    }
}

pub(crate) fn geo(p: u64, from: i64, to: i64) -> i64 {
    (from..=to).map(|i| pw(p, i)).sum()
}

pub(crate) fn nz(v: i64) -> usize {
    v.max(0) as usize
}

pub(crate) struct Ctx {
    pub frame: Frame,
    pub pool: Pool,
    /// Rendered lines from earlier frames.
    pub prior: Vec<String>,
    pub notes: Vec<String>,
}

impl Ctx {
    pub fn new(frame: &Frame, prior: Vec<String>) -> Result<Ctx> {
        Ok(Ctx {
            pool: Pool::new(&frame.pair)?,
            frame: frame.clone(),
            prior,
            notes: Vec::new(),
        })
    }

    pub fn p(&self) -> u64 {
        self.pool.params.p
    }

    pub fn tau(&self) -> u32 {
        self.pool.params.tau
    }

    pub fn note(&mut self, s: impl Into<String>) {
        let line = s.into();
        self.notes.push(line.clone());
        self.prior.push(line);
    }

    /// Unconsumed original variables of exact level `l`.
    pub fn orig(&self, l: u32) -> Vec<VarId> {
        self.pool.select(|v| v.is_exact(l) && v.id < self.pool.s)
    }

    pub fn orig_colour(&self, l: u32, nu: u32) -> Vec<VarId> {
        self.pool.select(|v| v.is_exact(l) && v.id < self.pool.s && v.colour() == Some(nu))
    }

    pub fn orig_not_colour(&self, l: u32, nu: u32) -> Vec<VarId> {
        self.pool.select(|v| v.is_exact(l) && v.id < self.pool.s && v.colour() != Some(nu))
    }

    pub fn orig_nuance(&self, l: u32, nu: u32, mu: u32) -> Vec<VarId> {
        self.pool.select(|v| v.is_exact(l) && v.id < self.pool.s && v.nuance() == Some((nu, mu)))
    }

    /// Level-0 variables of nonzero colour.
    pub fn colourful0(&self) -> Vec<VarId> {
        self.orig(0).into_iter().filter(|&id| self.pool.var(id).colour() != Some(0)).collect()
    }

    /// Most frequent colour among the unconsumed originals at level `l`;
    /// ties go to colour 0, then colour `p`, then the smallest.
    pub fn argmax(&self, l: u32) -> (u32, usize) {
        let p = self.p() as u32;
        let pref = |c: u32| if c == 0 { 2 } else { (c == p) as u8 };
        (0..=p)
            .map(|c| (c, self.orig_colour(l, c).len()))
            .max_by_key(|&(c, n)| (n, pref(c), std::cmp::Reverse(c)))
            .unwrap()
    }

    pub fn primaries(&mut self, want: usize) -> Result<Vec<VarId>> {
        let h = self.orig(0);
        batch_level0_primaries(&mut self.pool, &h, Some(want))
    }

    /// Lines of the contraction log with frame leaves mapped to original
    /// variables.
    pub fn render(&self) -> Vec<String> {
        let mut out = self.prior.clone();
        for e in &self.pool.log {
            let mut idx: Vec<usize> =
                e.consumed.iter().flat_map(|&g| self.frame.groups[g].iter().map(|&(i, _)| i + 1)).collect();
            idx.sort_unstable();
            let idx: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            out.push(format!("{} -> level {} using [{}]", e.recipe, e.level, idx.join(" ")));
        }
        out
    }

    pub fn unreachable(&self, detail: impl Into<String>) -> Error {
        Error::Unreachable { detail: detail.into(), log: self.render() }
    }

    /// A special variable at level `tau + 1` becomes a frame assignment. A
    /// colourful terminal that is not primary has level-0 leaves of one
    /// nonzero colour only, so it is completed with a disjoint colour-0
    /// subset whose sums vanish.
    pub fn finish(self, terminal: VarId, mode: SMode) -> Result<Outcome> {
        let gamma = self.pool.params.gamma;
        let v = self.pool.var(terminal);
        if !v.at_least(gamma) || !v.is_special(mode) {
            return Err(Error::InternalContradiction {
                detail: format!("terminal variable at level {} is not special at level {gamma}", v.level),
                log: self.render(),
            });
        }
        let mut y = self.pool.expand(&[terminal])?;
        let mut log = self.render();
        if !v.primary() {
            let pair = &self.frame.pair;
            let p = self.p();
            let ids: Vec<usize> = (0..self.pool.s)
                .filter(|&i| {
                    let w = self.pool.var(i);
                    w.is_exact(0) && w.colour() == Some(0) && y[i] == BigInt::from(0)
                })
                .collect();
            let cap = DP_BITS / (2 * (self.pool.params.pu(gamma) as usize).pow(2));
            let window = &ids[..ids.len().min(cap.max(1))];
            let w = zero_subset(&residues(pair, window, gamma), None, p, gamma)
                .ok_or_else(|| Error::NotFound("no colour-0 level-0 subset with vanishing sums".into()))?;
            let support: Vec<usize> = w.into_iter().map(|i| window[i]).collect();
            let extra = indicator(self.pool.s, &support);
            for (a, b) in y.iter_mut().zip(extra) {
                if b == BigInt::from(1) {
                    *a = b;
                }
            }
            log.push(format!("colour-0 zero-sum backing using {} level-0 variables", support.len()));
        }
        Ok(Outcome { frame: self.frame, y, log })
    }
}

pub(crate) fn take(v: &[VarId], n: usize, recipe: &'static str, what: &str) -> Result<Vec<VarId>> {
    if v.len() < n {
        return Err(Error::Hypothesis { recipe, detail: format!("need {n} {what}, have {}", v.len()) });
    }
    Ok(v[..n].to_vec())
}

/// Input count of the one-colour tower, using the `p = 5` variant there.
pub(crate) fn one_colour_count(p: u64, tau: u32, j: u32, m: i64) -> i64 {
    if p == 5 {
        one_colour_tower_count_p5(p, tau, j, m)
    } else {
        one_colour_tower_count(p, tau, j, m)
    }
}

pub(crate) fn one_colour_tower(pool: &mut Pool, set: &[VarId], j: u32, m: i64) -> Result<TowerOutput> {
    if pool.params.p == 5 {
        tower_one_colour_p5(pool, set, j, m)
    } else {
        tower_one_colour(pool, set, j, m)
    }
}

/// Spare sets for levels `from..to`, each cut to `2p - 2`, taken from the
/// given towers in order of preference.
pub(crate) fn spares(p: u64, towers: &[&TowerOutput], from: u32, to: u32) -> Vec<Vec<VarId>> {
    let n = 2 * p as usize - 2;
    (from..to)
        .map(|l| {
            let s = towers.iter().map(|t| t.spares_at(l)).find(|s| s.len() >= n).unwrap_or(&[]);
            s[..s.len().min(n)].to_vec()
        })
        .collect()
}
