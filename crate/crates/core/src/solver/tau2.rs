//! Recipes for `tau >= 2`.

use crate::contraction::batch::{
    batch_bounded_then_mixed, batch_bounded_then_two_stage, batch_nuance_classes, batch_nuance_shift,
    batch_two_stage_from_mixed,
};
use crate::contraction::single::{contract_special, contract_special_with_colour};
use crate::contraction::tower::{
    spare_tower_count, tower_colour_spares, tower_special, tower_special_with_colours,
    tower_to_terminal, TowerOutput,
};
use crate::contraction::{SMode, VarId};
use crate::error::{hypothesis, Result};
use crate::forms::LevelProfile;

use super::kit::{geo, nz, one_colour_count, one_colour_tower, pw, spares, take, Ctx};
use super::{Frame, Outcome};

const P: SMode = SMode::Primary;
const C: SMode = SMode::Colourful;

/// Level-1 colourful variables from the level-0 ones, with `2p - 2`
/// colour-0 helpers.
fn colourful_to(ctx: &mut Ctx, helpers: Vec<Vec<VarId>>, j: u32, m: i64) -> Result<Vec<VarId>> {
    let c0 = ctx.colourful0();
    tower_special_with_colours(&mut ctx.pool, &c0, &helpers, 0, j, m, C)
}

fn colour0_helpers(ctx: &Ctx, recipe: &'static str) -> Result<Vec<Vec<VarId>>> {
    let p = ctx.p() as usize;
    Ok(vec![take(&ctx.orig_colour(0, 0), 2 * p - 2, recipe, "colour-0 variables")?])
}

/// Level-`l` variables of colours other than those of `specials`, for the
/// two-stage recipes.
fn non_special(ctx: &Ctx, l: u32, exclude: &[VarId], mode: SMode) -> Vec<VarId> {
    ctx.pool.select(|v| v.is_exact(l) && !v.is_special(mode) && !exclude.contains(&v.id))
}

pub(crate) fn few_level0(frame: &Frame, _prof: &LevelProfile) -> Result<Outcome> {
    let mut ctx = Ctx::new(frame, Vec::new())?;
    let (p, tau) = (ctx.p(), ctx.tau());
    let t = tau as i64;
    let prims = ctx.primaries(nz(pw(p, t) - pw(p, t - 1)))?;
    let x = pw(p, t - 1) - 2 * pw(p, t - 2) - 3 * geo(p, 0, t - 3) - 1;
    let y = pw(p, t - 1) + 3 * geo(p, 0, t - 2) - 1;
    let k = ctx.orig(1);
    let b = batch_bounded_then_mixed(&mut ctx.pool, &k, &prims, 1, (nz(x), nz(y), p as usize - 2, 0), P)?;
    let tw = tower_special(&mut ctx.pool, &b.outputs, 2, tau, p as i64 + 1, P)?;
    let term = contract_special(&mut ctx.pool, &tw.top, tau, P)?;
    ctx.finish(term, P)
}

pub(crate) fn many_level0(frame: &Frame, prof: &LevelProfile) -> Result<Outcome> {
    let mut ctx = Ctx::new(frame, Vec::new())?;
    let r = prof.r;
    let e0 = ctx.orig_colour(0, 0);
    let tw = one_colour_tower(&mut ctx.pool, &e0, 0, r)?;
    let c0 = ctx.colourful0();
    let sp = spares(ctx.p(), &[&tw], 0, ctx.tau());
    let term = tower_to_terminal(&mut ctx.pool, &c0, &tw.top, &sp, 0, r, C)?;
    ctx.finish(term, C)
}

pub(crate) fn upper_middle(frame: &Frame, prof: &LevelProfile) -> Result<Outcome> {
    const R: &str = "upper-middle level-0 count";
    let mut ctx = Ctx::new(frame, Vec::new())?;
    let (p, tau, r) = (ctx.p(), ctx.tau(), prof.r);
    let pu = p as usize;
    let e0 = ctx.orig_colour(0, 0);
    let tw = tower_colour_spares(&mut ctx.pool, &e0, 0)?;
    // enough of one colour at the top level
    let (nu, n) = ctx.argmax(tau);
    if n as i64 >= p as i64 - r - 1 {
        ctx.note(format!("{R}: top level has {n} variables of colour {nu}"));
        let top = ctx.orig_colour(tau, nu);
        let c0 = ctx.colourful0();
        let sp = spares(p, &[&tw], 0, tau);
        let term = tower_to_terminal(&mut ctx.pool, &c0, &top, &sp, 0, r, C)?;
        return ctx.finish(term, C);
    }
    // a one-colour tower from an intermediate level
    for j in 1..tau {
        let (nu, n) = ctx.argmax(j);
        if n as i64 >= one_colour_count(p, tau, j, r) {
            ctx.note(format!("{R}: one-colour tower from level {j}"));
            let set = ctx.orig_colour(j, nu);
            let tw2 = one_colour_tower(&mut ctx.pool, &set, j, r)?;
            let c0 = ctx.colourful0();
            let mut sp = spares(p, &[&tw], 0, j);
            sp.extend(spares(p, &[&tw2], j, tau));
            let term = tower_to_terminal(&mut ctx.pool, &c0, &tw2.top, &sp, 0, r, C)?;
            return ctx.finish(term, C);
        }
    }
    // a mixed level with many variables
    for j in 1..tau {
        let (jt, ji) = ((tau - j) as i64, j as usize);
        let need_m = 2 * pw(p, jt + 1) - (2 * r + 2) * pw(p, jt) + pw(p, 2) - 3 * p as i64 + 2 * r + 1;
        let need_q = pw(p, jt + 1) - (r + 1) * pw(p, jt) + r;
        if (prof.m(ji) as i64) < need_m || (prof.q(ji) as i64) < need_q {
            continue;
        }
        ctx.note(format!("{R}: mixed colours at level {j}"));
        let cj = colourful_to(&mut ctx, spares(p, &[&tw], 0, j), j, r)?;
        let x = pw(p, jt) - pw(p, jt - 1) + r * geo(p, 0, jt - 1);
        let y = pw(p, jt) - r * geo(p, 0, jt - 1);
        let k = ctx.orig(j);
        let b = batch_bounded_then_mixed(&mut ctx.pool, &k, &cj, j, (nz(x), nz(y), nz(r), 1), C)?;
        let helpers = spares(p, &[&tw], j, j + 1).remove(0);
        let helpers = take(&helpers, pu - 1, R, "spare variables")?;
        let extra = contract_special_with_colour(&mut ctx.pool, &b.unused[..pu.min(b.unused.len())], &helpers, j, C)?;
        let mut next = b.outputs;
        next.push(extra);
        let sp = spares(p, &[&tw], j + 1, tau);
        let term = tower_to_terminal(&mut ctx.pool, &next, &[], &sp, j + 1, p as i64 - 1, C)?;
        return ctx.finish(term, C);
    }
    Err(ctx.unreachable(format!("{R}: no level supports the recipe")))
}

pub(crate) fn middle(frame: &Frame, prof: &LevelProfile) -> Result<Outcome> {
    const R: &str = "middle level-0 count";
    let mut ctx = Ctx::new(frame, Vec::new())?;
    let (p, tau) = (ctx.p(), ctx.tau());
    let (pu, t) = (p as usize, tau as i64);
    let prims = ctx.primaries(nz(pw(p, t)))?;
    let (nu, n) = ctx.argmax(1);
    if n as i64 >= one_colour_count(p, tau, 1, 0) {
        ctx.note(format!("{R}: one-colour tower from level 1"));
        let set = ctx.orig_colour(1, nu);
        let tw = one_colour_tower(&mut ctx.pool, &set, 1, 0)?;
        let sp = spares(p, &[&tw], 1, tau);
        let term = tower_to_terminal(&mut ctx.pool, &prims, &tw.top, &sp, 1, 0, P)?;
        return ctx.finish(term, P);
    }
    let m1 = prof.m(1) as i64;
    let rich = 3 * pw(p, t) + 5 * pw(p, t - 1) - (p as i64 - 1) / 2 * geo(p, 1, t - 2) - pw(p, t - 2)
        + 3 * geo(p, 0, t - 3)
        - 3 * p as i64
        - 4;
    if m1 >= rich {
        ctx.note(format!("{R}: mixed colours at level 1"));
        let x = pw(p, t - 1) - pw(p, t - 2) - 2 * geo(p, 0, t - 3) - 1;
        let y = pw(p, t - 1) + 2 * geo(p, 0, t - 2) - 1;
        let k = ctx.orig(1);
        let b = batch_bounded_then_mixed(&mut ctx.pool, &k, &prims, 1, (nz(x), nz(y), pu - 1, 0), P)?;
        let tw = tower_special(&mut ctx.pool, &b.outputs, 2, tau, p as i64 + 1, P)?;
        let term = contract_special(&mut ctx.pool, &tw.top, tau, P)?;
        return ctx.finish(term, P);
    }
    if m1 <= 2 * pw(p, 2) - p as i64 - 3 {
        ctx.note(format!("{R}: sparse level 1"));
        let tw = tower_special(&mut ctx.pool, &prims, 1, 2, 0, P)?;
        if tau == 2 {
            let k = ctx.orig(2);
            let b = batch_two_stage_from_mixed(&mut ctx.pool, &k, &tw.top[..1.min(tw.top.len())], 2, 1, P)?;
            let term = *b.outputs.first().ok_or_else(|| ctx.unreachable(format!("{R}: no output")))?;
            return ctx.finish(term, P);
        }
        let x = pw(p, t - 2) - pw(p, t - 3) - 2 * geo(p, 0, t - 4) - 1;
        let y = pw(p, t - 2) + 2 * geo(p, 0, t - 3);
        let k = ctx.orig(2);
        let b = batch_bounded_then_mixed(&mut ctx.pool, &k, &tw.top, 2, (nz(x), nz(y), pu.saturating_sub(4), 0), P)?;
        let tw3 = tower_special(&mut ctx.pool, &b.outputs, 3, tau, p as i64 + 1, P)?;
        let term = contract_special(&mut ctx.pool, &tw3.top, tau, P)?;
        return ctx.finish(term, P);
    }
    ctx.note(format!("{R}: colour {nu} helps at level 1"));
    let helpers = vec![take(&ctx.orig_colour(1, nu), 2 * pu - 2, R, "level-1 variables of one colour")?];
    let p2 = tower_special_with_colours(&mut ctx.pool, &prims, &helpers, 1, 2, 0, P)?;
    let (mu, _) = ctx.argmax(2);
    if tau == 2 {
        let col = take(&ctx.orig_colour(2, mu), pu - 1, R, "level-2 variables of one colour")?;
        let term = contract_special_with_colour(&mut ctx.pool, &p2, &col, 2, P)?;
        return ctx.finish(term, P);
    }
    let set = ctx.orig_colour(2, mu);
    let tw = one_colour_tower(&mut ctx.pool, &set, 2, 0)?;
    let sp = spares(p, &[&tw], 2, tau);
    let term = tower_to_terminal(&mut ctx.pool, &p2, &tw.top, &sp, 2, 0, P)?;
    ctx.finish(term, P)
}

pub(crate) fn large_colour0(frame: &Frame, prof: &LevelProfile) -> Result<Outcome> {
    const R: &str = "large colour-0 class";
    let mut ctx = Ctx::new(frame, Vec::new())?;
    let (p, tau) = (ctx.p(), ctx.tau());
    let (pu, t) = (p as usize, tau as i64);
    let want = nz(pw(p, t - 1) + p as i64 - 2);
    let d = prof.m(1) - prof.i(1, 0);
    let e0 = ctx.orig_colour(0, 0);
    let shifted = batch_nuance_shift(&mut ctx.pool, &e0, 0, want.saturating_sub(d))?;
    let e0 = ctx.orig_colour(0, 0);
    let same = batch_nuance_classes(&mut ctx.pool, &e0, 0, Some(want))?;
    let e0 = ctx.orig_colour(0, 0);
    let tw = one_colour_tower(&mut ctx.pool, &e0, 0, 0)?;
    let helpers = spares(p, &[&tw], 0, 1);
    let c1 = colourful_to(&mut ctx, helpers, 1, -1)?;
    let mut others: Vec<VarId> = shifted.outputs;
    others.extend(ctx.orig_not_colour(1, 0));
    let mut coloured = same.outputs;
    coloured.extend(ctx.orig_colour(1, 0));
    let x = pw(p, t - 1) - geo(p, 0, t - 2) - 1;
    let y = geo(p, 0, t - 2) + 1;
    let b = batch_bounded_then_two_stage(&mut ctx.pool, &coloured, &others, &c1, 1, (nz(x), nz(y), pu - 2, 1), C)?;
    let helpers = take(tw.spares_at(1), pu - 1, R, "spare variables")?;
    let extra = contract_special_with_colour(&mut ctx.pool, &b.unused[..pu.min(b.unused.len())], &helpers, 1, C)?;
    let mut c2 = b.outputs;
    c2.push(extra);
    let sp = spares(p, &[&tw], 2, tau);
    let term = tower_to_terminal(&mut ctx.pool, &c2, &tw.top, &sp, 2, 0, C)?;
    ctx.finish(term, C)
}

pub(crate) fn medium_colour0(frame: &Frame, prof: &LevelProfile) -> Result<Outcome> {
    const R: &str = "medium colour-0 class";
    let mut ctx = Ctx::new(frame, Vec::new())?;
    let (p, tau) = (ctx.p(), ctx.tau());
    let (pu, t, pi) = (p as usize, tau as i64, p as i64);
    let a = pw(p, t) + 4 * pw(p, t - 1) - (pi - 1) / 2 * geo(p, 1, t - 2) + 3 * geo(p, 0, t - 3) - pi - 4;
    let (nu, n) = ctx.argmax(1);
    let x = pw(p, t - 1) - 2 * pw(p, t - 2) - geo(p, 0, t - 3) - 1;
    let y = geo(p, 0, t - 1) + 1;
    if n as i64 >= a {
        ctx.note(format!("{R}: colour {nu} dominates level 1"));
        let q1 = prof.q(1) as i64;
        let mut made = Vec::new();
        if q1 <= pw(p, t) + pi - 3 {
            let want = nz(pw(p, t) + pi - 2 - q1);
            let e0 = ctx.orig_colour(0, 0);
            made = if nu != 0 {
                batch_nuance_classes(&mut ctx.pool, &e0, 0, Some(want))?.outputs
            } else {
                batch_nuance_shift(&mut ctx.pool, &e0, 0, want)?.outputs
            };
        }
        let helpers = colour0_helpers(&ctx, R)?;
        let c1 = colourful_to(&mut ctx, helpers, 1, -1)?;
        let set = ctx.orig_colour(1, nu);
        let n_sp = nz(spare_tower_count(p, tau, 1)).min(set.len());
        let tw = tower_colour_spares(&mut ctx.pool, &set[..n_sp], 1)?;
        let coloured: Vec<VarId> = ctx.orig_colour(1, nu);
        let mut others: Vec<VarId> = made.into_iter().filter(|&id| ctx.pool.var(id).colour() != Some(nu)).collect();
        others.extend(non_special(&ctx, 1, &c1, C).into_iter().filter(|&id| ctx.pool.var(id).colour() != Some(nu)));
        others.dedup();
        let b = batch_bounded_then_two_stage(&mut ctx.pool, &coloured, &others, &c1, 1, (nz(x), nz(y), pu - 2, 0), C)?;
        let sp = spares(p, &[&tw], 2, tau);
        let term = tower_to_terminal(&mut ctx.pool, &b.outputs, &[], &sp, 2, pi - 1, C)?;
        return ctx.finish(term, C);
    }
    if prof.q(1) as i64 >= pw(p, t) + pi - 2 && prof.m(1) as i64 >= 2 * pw(p, t) + pi * pi - pi - 3 {
        ctx.note(format!("{R}: mixed colours at level 1"));
        let e0 = ctx.orig_colour(0, 0);
        let tw = tower_colour_spares(&mut ctx.pool, &e0, 0)?;
        let c1 = colourful_to(&mut ctx, spares(p, &[&tw], 0, 1), 1, -1)?;
        let k = ctx.orig(1);
        let b = batch_bounded_then_mixed(&mut ctx.pool, &k, &c1, 1, (nz(x), nz(y), pu - 2, 0), C)?;
        let sp = spares(p, &[&tw], 2, tau);
        let term = tower_to_terminal(&mut ctx.pool, &b.outputs, &[], &sp, 2, pi - 1, C)?;
        return ctx.finish(term, C);
    }
    ctx.note(format!("{R}: nuance classes at level 0"));
    let want = nz(pw(p, t - 1) + 2 * pi - 3);
    let d = prof.m(1) - prof.i(1, 0);
    let e0 = ctx.orig_colour(0, 0);
    let shifted = batch_nuance_shift(&mut ctx.pool, &e0, 0, want.saturating_sub(d))?;
    let e0 = ctx.orig_colour(0, 0);
    let same = batch_nuance_classes(&mut ctx.pool, &e0, 0, Some(want))?;
    let helpers = colour0_helpers(&ctx, R)?;
    let c1 = colourful_to(&mut ctx, helpers, 1, -1)?;
    let mut coloured = same.outputs;
    coloured.extend(ctx.orig_colour(1, 0));
    let mut others = shifted.outputs;
    others.extend(ctx.orig_not_colour(1, 0));
    let x = pw(p, t - 1) - geo(p, 0, t - 2) - 1;
    let y = geo(p, 0, t - 2) + 2;
    let b = batch_bounded_then_two_stage(&mut ctx.pool, &coloured, &others, &c1, 1, (nz(x), nz(y), pu - 3, 1), C)?;
    let c2 = b.outputs;
    let (mu, n2) = ctx.argmax(2);
    if tau == 2 {
        let col = take(&ctx.orig_colour(2, mu), pu - 1, R, "level-2 variables of one colour")?;
        let term = contract_special_with_colour(&mut ctx.pool, &c2, &col, 2, C)?;
        return ctx.finish(term, C);
    }
    if n2 as i64 >= one_colour_count(p, tau, 2, 0) {
        let set = ctx.orig_colour(2, mu);
        let tw = one_colour_tower(&mut ctx.pool, &set, 2, 0)?;
        let sp = spares(p, &[&tw], 2, tau);
        let term = tower_to_terminal(&mut ctx.pool, &c2, &tw.top, &sp, 2, 0, C)?;
        return ctx.finish(term, C);
    }
    let c3 = tower_special(&mut ctx.pool, &c2, 2, 3, 0, C)?.top;
    finish_from_level3(ctx, c3, C)
}

/// `p^(tau-2) - 2` special variables at level 3 pushed to the top using the
/// mixed-colour recipes.
fn finish_from_level3(mut ctx: Ctx, c3: Vec<VarId>, mode: SMode) -> Result<Outcome> {
    let (p, tau) = (ctx.p(), ctx.tau());
    let t = tau as i64;
    let k = ctx.orig(3);
    if tau == 3 {
        let b = batch_two_stage_from_mixed(&mut ctx.pool, &k, &c3[..1.min(c3.len())], 3, 1, mode)?;
        return match b.outputs.first() {
            Some(&term) => ctx.finish(term, mode),
            None => hypothesis("mixed-colour finish", "no output"),
        };
    }
    let x = pw(p, t - 3) - pw(p, t - 4) - 2 * geo(p, 0, t - 5) - 1;
    let y = pw(p, t - 3) + 2 * geo(p, 0, t - 4);
    let b = batch_bounded_then_mixed(&mut ctx.pool, &k, &c3, 3, (nz(x), nz(y), (p as usize).saturating_sub(4), 0), mode)?;
    let tw = tower_special(&mut ctx.pool, &b.outputs, 4, tau, p as i64 + 1, mode)?;
    let term = contract_special(&mut ctx.pool, &tw.top, tau, mode)?;
    ctx.finish(term, mode)
}

pub(crate) fn small_colour0(frame: &Frame, _prof: &LevelProfile) -> Result<Outcome> {
    const R: &str = "small colour-0 class";
    let mut ctx = Ctx::new(frame, Vec::new())?;
    let (p, tau) = (ctx.p(), ctx.tau());
    let (pu, t, pi) = (p as usize, tau as i64, p as i64);
    let prims = ctx.primaries(nz(pw(p, t) - pw(p, t - 1)))?;
    let a = pw(p, t) + 4 * pw(p, t - 1) - (pi - 1) / 2 * geo(p, 1, t - 2) + 3 * geo(p, 0, t - 3) - pi - 4;
    let x = pw(p, t - 1) - 2 * pw(p, t - 2) - geo(p, 0, t - 3) - 1;
    let y = geo(p, 0, t - 1) + 1;
    let (nu, n) = ctx.argmax(1);
    if n as i64 >= a {
        ctx.note(format!("{R}: colour {nu} dominates level 1"));
        let set = ctx.orig_colour(1, nu);
        let n_sp = nz(spare_tower_count(p, tau, 1)).min(set.len());
        let tw = tower_colour_spares(&mut ctx.pool, &set[..n_sp], 1)?;
        let coloured = ctx.orig_colour(1, nu);
        let others = ctx.orig_not_colour(1, nu);
        let b = batch_bounded_then_two_stage(&mut ctx.pool, &coloured, &others, &prims, 1, (nz(x), nz(y), pu - 2, 0), P)?;
        let sp = spares(p, &[&tw], 2, tau);
        let term = tower_to_terminal(&mut ctx.pool, &b.outputs, &[], &sp, 2, pi - 1, P)?;
        return ctx.finish(term, P);
    }
    let k = ctx.orig(1);
    let b = batch_bounded_then_mixed(&mut ctx.pool, &k, &prims, 1, (nz(x), nz(y), pu - 2, 0), P)?;
    if tau == 2 {
        let term = contract_special(&mut ctx.pool, &b.outputs, 2, P)?;
        return ctx.finish(term, P);
    }
    let (mu, _) = ctx.argmax(2);
    let set = ctx.orig_colour(2, mu);
    let tw: TowerOutput = tower_colour_spares(&mut ctx.pool, &set, 2)?;
    let sp = spares(p, &[&tw], 2, tau);
    let term = tower_to_terminal(&mut ctx.pool, &b.outputs, &[], &sp, 2, pi - 1, P)?;
    ctx.finish(term, P)
}
