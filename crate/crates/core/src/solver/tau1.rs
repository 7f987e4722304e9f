//! Recipes for `tau = 1`, where level `tau + 1 = 2` is the target.

use crate::contraction::batch::{batch_half_range, batch_nuance_classes};
use crate::contraction::search::{find, Search, Target};
use crate::contraction::single::{
    colour_counts, contract_half_range, contract_special, contract_special_two_stage, contract_special_with_colour,
    fill_colour_with_special, nuance_shift,
};
use crate::contraction::tower::{tower_special_with_colours, tower_to_terminal};
use crate::contraction::{Pool, SMode, VarId};
use crate::error::{hypothesis, Error, Result};
use crate::forms::{compute_profile, LevelProfile};

use super::kit::{one_colour_tower, spares, take, Ctx};
use super::{Frame, Outcome};

const SHIFT: &str = "shifted-level transform";

/// Shift level `j` of the frame down to level 0, make `m` primary variables
/// there and finish with one two-stage contraction at the next level.
pub(crate) fn shifted_level(frame: &Frame, j: u32, m: usize, prior: Vec<String>) -> Result<Outcome> {
    let f = frame.shifted(j)?;
    let prof = compute_profile(&f.pair)?;
    let p = f.pair.params.p as usize;
    if prof.q(0) < p * m || prof.m(0) < m * (2 * p - 1) || prof.q(1) < p - m || prof.imax(1) < p - 1 || m == 0 {
        return hypothesis(SHIFT, format!("profile does not fit m = {m}"));
    }
    let mut ctx = Ctx::new(&f, prior)?;
    if j > 0 {
        ctx.note(format!("{SHIFT}: level {j} becomes level 0 (m = {m})"));
    }
    let prims = ctx.primaries(m)?;
    let (nu, _) = ctx.argmax(1);
    let col = take(&ctx.orig_colour(1, nu), p - 1, SHIFT, "variables of the dominant colour")?;
    let others = ctx.orig_not_colour(1, nu);
    let t = contract_special_two_stage(&mut ctx.pool, &col, &others, &prims, 1, SMode::Primary)?;
    ctx.finish(t, SMode::Primary)
}

/// A frame of the given pool variables plus every unconsumed one, shifted so
/// that level 1 becomes level 0, then one primary variable there.
fn regroup_and_shift(ctx: Ctx, keep: &[VarId]) -> Result<Outcome> {
    let gamma = ctx.pool.params.gamma;
    if let Some(&t) = keep.iter().find(|&&id| ctx.pool.var(id).at_least(gamma) && ctx.pool.var(id).is_special(SMode::Colourful)) {
        return ctx.finish(t, SMode::Colourful);
    }
    let mut ids: Vec<VarId> = keep.to_vec();
    ids.extend(ctx.pool.select(|v| !keep.contains(&v.id)));
    let f = ctx.frame.contracted(&ctx.pool, &ids)?;
    let mut prior = ctx.render();
    prior.push(format!("regroup: {} variables, level 1 becomes level 0", ids.len()));
    shifted_level(&f, 1, 1, prior)
}

pub(crate) fn dominant_level1(frame: &Frame, prof: &LevelProfile) -> Result<Outcome> {
    const R: &str = "dominant colour at level 1";
    let p = frame.pair.params.p as usize;
    let r = prof.r;
    if r >= 0 {
        let mut ctx = Ctx::new(frame, Vec::new())?;
        let prims = ctx.primaries(p)?;
        let (nu, _) = ctx.argmax(1);
        let col = take(&ctx.orig_colour(1, nu), p - 1, R, "variables of the dominant colour")?;
        let t = contract_special_with_colour(&mut ctx.pool, &prims, &col, 1, SMode::Primary)?;
        return ctx.finish(t, SMode::Primary);
    }
    let mut ctx = Ctx::new(frame, Vec::new())?;
    let (nu, _) = ctx.argmax(1);
    let odd = if nu == p as u32 {
        let set = larger_half(&ctx.pool, &ctx.orig_colour(0, 0));
        match contract_half_range(&mut ctx.pool, &set, 0) {
            Ok(id) => id,
            Err(Error::Hypothesis { .. }) => colour0_lift(&mut ctx, nu)?,
            Err(e) => return Err(e),
        }
    } else if nu == 0 {
        shift_odd(&mut ctx)?
    } else {
        return hypothesis(R, format!("dominant level-1 colour {nu} is neither 0 nor p"));
    };
    let c0 = ctx.colourful0();
    let e0 = take(&ctx.orig_colour(0, 0), 2 * p - 2, R, "colour-0 variables")?;
    let c1 = tower_special_with_colours(&mut ctx.pool, &c0, &[e0], 0, 1, -1, SMode::Colourful)?;
    let col = take(&ctx.orig_colour(1, nu), p - 1, R, "variables of the dominant colour")?;
    let t = contract_special_two_stage(&mut ctx.pool, &col, &[odd], &c1, 1, SMode::Colourful)?;
    ctx.finish(t, SMode::Colourful)
}

/// At most `2p - 2` colour-0 level-0 variables whose sum has exact level 1
/// and a colour other than `nu`.
fn colour0_lift(ctx: &mut Ctx, nu: u32) -> Result<VarId> {
    let p = ctx.p() as usize;
    let set = ctx.orig_colour(0, 0);
    let window = &set[..set.len().min(6 * p)];
    let mut s = Search::new(0, window, Target::NextNotColour(nu));
    s.max_size = Some(2 * p - 2);
    match find(&ctx.pool, &s) {
        Some(members) => ctx.pool.contract(&members, 0, "colour-0 lift"),
        None => hypothesis("colour-0 lift", "no subset reaches level 1 with another colour"),
    }
}

/// The half of `set` (by corresponding integer) with more members.
fn larger_half(pool: &Pool, set: &[VarId]) -> Vec<VarId> {
    let p = pool.params.p as i64;
    let half = (p - 1) / 2;
    let (lo, hi): (Vec<VarId>, Vec<VarId>) =
        set.iter().partition(|&&id| pool.var(id).corresponding().unwrap() % p <= half);
    if lo.len() >= hi.len() {
        lo
    } else {
        hi
    }
}

/// A level-1 variable of nonzero colour from colour-0 level-0 variables.
fn shift_odd(ctx: &mut Ctx) -> Result<VarId> {
    const R: &str = "nuance shift";
    let p = ctx.p() as usize;
    let same = take(&ctx.orig_nuance(0, 0, 0), p - 1, R, "variables of nuance 00")?;
    let odd = (1..p as u32).find_map(|mu| ctx.orig_nuance(0, 0, mu).first().copied());
    let Some(odd) = odd else {
        return hypothesis(R, "every colour-0 variable has nuance 00");
    };
    nuance_shift(&mut ctx.pool, &same, odd, 0)
}

pub(crate) fn sparse_top(frame: &Frame, prof: &LevelProfile) -> Result<Outcome> {
    const R: &str = "sparse level 1, r = p - 1";
    let p = frame.pair.params.p as usize;
    let mut ctx = Ctx::new(frame, Vec::new())?;
    if prof.m(0) >= (2 * p - 1) * (2 * p - 1) {
        let prims = ctx.primaries(2 * p - 1)?;
        let t = contract_special(&mut ctx.pool, &prims, 1, SMode::Primary)?;
        return ctx.finish(t, SMode::Primary);
    }
    let mut cand = ctx.primaries(2 * p - 2)?;
    cand.extend(ctx.orig(1).into_iter().take(4 * p));
    let mut s = Search::new(1, &cand, Target::Divisible);
    s.need_special = Some(SMode::Primary);
    let members = match find(&ctx.pool, &s) {
        Some(m) => m,
        None => return Err(ctx.unreachable(format!("{R}: no level-1 completion"))),
    };
    let t = ctx.pool.contract(&members, 1, "level-1 completion")?;
    ctx.finish(t, SMode::Primary)
}

pub(crate) fn sparse_middle(frame: &Frame, prof: &LevelProfile) -> Result<Outcome> {
    const R: &str = "sparse level 1, 0 <= r <= p - 2";
    let p = frame.pair.params.p as usize;
    let r = prof.r;
    let ru = r as usize;
    let mut ctx = Ctx::new(frame, Vec::new())?;
    let (nu1, i1) = ctx.argmax(1);
    // enough of one colour at level 1
    if i1 >= p - ru - 1 {
        let c0 = ctx.colourful0();
        let e0 = take(&ctx.orig_colour(0, 0), 2 * p - 2, R, "colour-0 variables")?;
        let c1 = tower_special_with_colours(&mut ctx.pool, &c0, &[e0], 0, 1, r, SMode::Colourful)?;
        let col = take(&ctx.orig_colour(1, nu1), p - ru - 1, R, "level-1 variables")?;
        let t = contract_special_with_colour(&mut ctx.pool, &c1, &col, 1, SMode::Colourful)?;
        return ctx.finish(t, SMode::Colourful);
    }
    // level 2 is rich enough for a shifted finish
    if prof.q(2) >= p - 1 && prof.imax(2) >= p - 1 {
        let mut made = Vec::new();
        for _ in 0..p - ru - 1 {
            let set = ctx.orig_colour(0, 0);
            made.push(crate::contraction::single::contract_one_colour(&mut ctx.pool, &set, 0)?);
        }
        let c0 = ctx.colourful0();
        let e0 = take(&ctx.orig_colour(0, 0), 2 * p - 2, R, "colour-0 variables")?;
        let c1 = tower_special_with_colours(&mut ctx.pool, &c0, &[e0], 0, 1, r, SMode::Colourful)?;
        let mut k = c1.clone();
        k.extend(&made);
        let counts = colour_counts(&ctx.pool, &k, 1);
        if let Some(mu) = (0..counts.len()).find(|&c| counts[c] >= p) {
            let mut group: Vec<VarId> =
                k.iter().copied().filter(|&id| ctx.pool.var(id).colour() == Some(mu as u32)).collect();
            group.sort_by_key(|&id| !ctx.pool.var(id).colourful());
            group.truncate(p);
            let t = fill_colour_with_special(&mut ctx.pool, &group, 1, SMode::Colourful)?;
            return ctx.finish(t, SMode::Colourful);
        }
        return regroup_and_shift(ctx, &k);
    }
    if prof.m(1) >= 1 {
        let set = ctx.orig_colour(0, 0);
        let hr = if p - ru - 2 > 0 { batch_half_range(&mut ctx.pool, &set, 0, Some(p - ru - 2))?.outputs } else { vec![] };
        let c0 = ctx.colourful0();
        let e0 = take(&ctx.orig_colour(0, 0), 2 * p - 2, R, "colour-0 variables")?;
        let c1 = tower_special_with_colours(&mut ctx.pool, &c0, &[e0], 0, 1, r, SMode::Colourful)?;
        let mut cand = c1;
        cand.extend(hr);
        cand.extend(ctx.orig(1));
        let mut s = Search::new(1, &cand, Target::Divisible);
        s.need_special = Some(SMode::Colourful);
        let Some(members) = find(&ctx.pool, &s) else {
            return Err(ctx.unreachable(format!("{R}: no colourful level-1 completion")));
        };
        let t = ctx.pool.contract(&members, 1, "level-1 completion")?;
        return ctx.finish(t, SMode::Colourful);
    }
    let set = ctx.orig_colour(0, 0);
    let tw = one_colour_tower(&mut ctx.pool, &set, 0, r)?;
    let c0 = ctx.colourful0();
    let sp = spares(ctx.p(), &[&tw], 0, 1);
    let t = tower_to_terminal(&mut ctx.pool, &c0, &tw.top, &sp, 0, r, SMode::Colourful)?;
    ctx.finish(t, SMode::Colourful)
}

pub(crate) fn sparse_negative(frame: &Frame, prof: &LevelProfile) -> Result<Outcome> {
    const R: &str = "sparse level 1, r = -1";
    let p = frame.pair.params.p as usize;
    let mut ctx = Ctx::new(frame, Vec::new())?;
    let colour0_outputs = |ctx: &mut Ctx, want: usize| -> Result<Vec<VarId>> {
        if want == 0 {
            return Ok(vec![]);
        }
        let set = ctx.orig_colour(0, 0);
        if ctx.p() == 5 {
            Ok(batch_nuance_classes(&mut ctx.pool, &set, 0, Some(want))?.outputs)
        } else {
            Ok(batch_half_range(&mut ctx.pool, &set, 0, Some(want))?.outputs)
        }
    };
    let colourful1 = |ctx: &mut Ctx| -> Result<Vec<VarId>> {
        let c0 = ctx.colourful0();
        let e0 = take(&ctx.orig_colour(0, 0), 2 * p - 2, R, "colour-0 variables")?;
        tower_special_with_colours(&mut ctx.pool, &c0, &[e0], 0, 1, -1, SMode::Colourful)
    };
    if prof.m(0) >= 4 * p * p - 4 * p {
        let odd = shift_odd(&mut ctx)?;
        let e1 = colour0_outputs(&mut ctx, p - 1)?;
        let c1 = colourful1(&mut ctx)?;
        let t = contract_special_two_stage(&mut ctx.pool, &e1, &[odd], &c1, 1, SMode::Colourful)?;
        return ctx.finish(t, SMode::Colourful);
    }
    if prof.m(1) == prof.i(1, 0) {
        let odd = shift_odd(&mut ctx)?;
        let mut e1 = take(&ctx.orig_colour(1, 0), 2, R, "colour-0 level-1 variables")?;
        e1.extend(colour0_outputs(&mut ctx, p - 3)?);
        let c1 = colourful1(&mut ctx)?;
        let t = contract_special_two_stage(&mut ctx.pool, &e1, &[odd], &c1, 1, SMode::Colourful)?;
        return ctx.finish(t, SMode::Colourful);
    }
    let mut e1 = colour0_outputs(&mut ctx, p - 2)?;
    let c1 = colourful1(&mut ctx)?;
    let other1 = ctx.orig_not_colour(1, 0);
    if let Some(&o) = ctx.orig_colour(1, 0).first() {
        e1.push(o);
        let t = contract_special_two_stage(&mut ctx.pool, &e1, &other1[..1], &c1, 1, SMode::Colourful)?;
        return ctx.finish(t, SMode::Colourful);
    }
    let mut k = c1.clone();
    k.extend(other1.iter().take(2));
    k.extend(&e1);
    let counts = colour_counts(&ctx.pool, &k, 1);
    if let Some(mu) = (0..counts.len()).find(|&c| counts[c] >= p) {
        let mut group: Vec<VarId> =
            k.iter().copied().filter(|&id| ctx.pool.var(id).colour() == Some(mu as u32)).collect();
        group.sort_by_key(|&id| !ctx.pool.var(id).colourful());
        group.truncate(p);
        let t = fill_colour_with_special(&mut ctx.pool, &group, 1, SMode::Colourful)?;
        return ctx.finish(t, SMode::Colourful);
    }
    if prof.q(2) >= p - 1 && prof.imax(2) >= p - 1 {
        return regroup_and_shift(ctx, &k);
    }
    Err(ctx.unreachable(format!("{R}: no colour reaches p among the level-1 variables")))
}
