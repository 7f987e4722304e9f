//! End-to-end solving: normalisation, branch dispatch, contraction recipes,
//! verification and lifting.
//!
//! Strategies work in a [`Frame`], a transformed pair whose solutions pull
//! back to the input pair. Every result is re-checked by [`verify`], which
//! does not use the contraction engine.

pub mod frame;
pub mod lift;
pub mod verify;
pub mod zerorep;

mod kit;
mod tau1;
mod tau2;

use std::fmt;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::forms::{check_proper, compute_profile, p_normalise, FormPair, LevelProfile};
use crate::padic::Params;

pub use frame::Frame;
pub use lift::{lift_solution, LiftReport};
pub use verify::{best_pair, pair_det_valuation, residual_valuation, verify_certificate, verify_nonsingular};
pub use zerorep::{large_q0_solve, zero_representing, ZeroRepReport};

/// Top-level cases of the case analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    TwoZeroRep,
    LargeQ0,
    DominantLevel1,
    SparseTop,
    SparseMiddle,
    SparseNegative,
    FewLevel0,
    ManyLevel0,
    UpperMiddle,
    Middle,
    LargeColour0,
    MediumColour0,
    SmallColour0,
    Unclassified,
}

impl Branch {
    pub const ALL: [Branch; 14] = [
        Branch::TwoZeroRep,
        Branch::LargeQ0,
        Branch::DominantLevel1,
        Branch::SparseTop,
        Branch::SparseMiddle,
        Branch::SparseNegative,
        Branch::FewLevel0,
        Branch::ManyLevel0,
        Branch::UpperMiddle,
        Branch::Middle,
        Branch::LargeColour0,
        Branch::MediumColour0,
        Branch::SmallColour0,
        Branch::Unclassified,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Branch::TwoZeroRep => "two zero-representing colours",
            Branch::LargeQ0 => "level-0 zero-sum search",
            Branch::DominantLevel1 => "dominant colour at level 1",
            Branch::SparseTop => "sparse level 1, r = p - 1",
            Branch::SparseMiddle => "sparse level 1, 0 <= r <= p - 2",
            Branch::SparseNegative => "sparse level 1, r = -1",
            Branch::FewLevel0 => "few level-0 variables",
            Branch::ManyLevel0 => "many level-0 variables",
            Branch::UpperMiddle => "upper-middle level-0 count",
            Branch::Middle => "middle level-0 count",
            Branch::LargeColour0 => "large colour-0 class",
            Branch::MediumColour0 => "medium colour-0 class",
            Branch::SmallColour0 => "small colour-0 class",
            Branch::Unclassified => "unclassified profile",
        }
    }

    /// Short name used by the generator hints and the CLI.
    pub fn key(&self) -> &'static str {
        match self {
            Branch::TwoZeroRep => "two-zero-rep",
            Branch::LargeQ0 => "large-q0",
            Branch::DominantLevel1 => "dominant-level1",
            Branch::SparseTop => "r=p-1",
            Branch::SparseMiddle => "r=mid",
            Branch::SparseNegative => "r=-1",
            Branch::FewLevel0 => "few-level0",
            Branch::ManyLevel0 => "many-level0",
            Branch::UpperMiddle => "upper-middle",
            Branch::Middle => "middle",
            Branch::LargeColour0 => "large-colour0",
            Branch::MediumColour0 => "medium-colour0",
            Branch::SmallColour0 => "small-colour0",
            Branch::Unclassified => "unclassified",
        }
    }

    pub fn from_key(key: &str) -> Option<Branch> {
        Branch::ALL.iter().copied().find(|b| b.key() == key)
    }

    /// Branches of the main case analysis for the given `tau`.
    pub fn strategy_branches(tau: u32) -> &'static [Branch] {
        if tau == 1 {
            &[Branch::DominantLevel1, Branch::SparseTop, Branch::SparseMiddle, Branch::SparseNegative]
        } else {
            &[
                Branch::FewLevel0,
                Branch::ManyLevel0,
                Branch::UpperMiddle,
                Branch::Middle,
                Branch::LargeColour0,
                Branch::MediumColour0,
                Branch::SmallColour0,
            ]
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
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

/// Level-0 bounds separating the branches for `tau >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Thresholds {
    pub few_max: i64,
    pub many_min: i64,
    pub upper_min: i64,
    pub large_colour0_min: i64,
    pub medium_colour0_min: i64,
}

pub fn thresholds(params: &Params) -> Thresholds {
    let p = params.p as i64;
    let t = params.tau as i64;
    let few_max = 3 * pw(p, t + 1) - 4 * pw(p, t) - 2 * pw(p, t - 1) + p + 3;
    let many_min = if p == 5 { 3 * pw(p, t + 1) + 3 * pw(p, t) } else { 3 * pw(p, t + 1) + 8 * pw(p, t) };
    let upper_min = 3 * pw(p, t + 1) + pw(p, t) - 3;
    let large_colour0_min = if p == 5 {
        3 * pw(p, t + 1) - geo(p, 0, t) + 2 * p * p - 6 * p + 2
    } else {
        (4 * pw(p, t + 1) + 11 * pw(p, t) - 2 * pw(p, t - 1) + 6 * geo(p, 0, t - 2) + 4 * p * p - 11 * p - 4) / 2
    };
    let medium_colour0_min = pw(p, t + 1) + pw(p, t) - 1;
    Thresholds { few_max, many_min, upper_min, large_colour0_min, medium_colour0_min }
}

/// The branch the dispatcher takes for a normalised pair with this profile.
/// Earlier cases win when hypotheses overlap.
pub fn select_branch(params: &Params, prof: &LevelProfile) -> Branch {
    let p = params.p;
    let threshold = params.zero_rep_threshold();
    let zero_rep = (0..=p as u32).filter(|&c| prof.i(0, c) >= threshold).count();
    if zero_rep >= 2 {
        return Branch::TwoZeroRep;
    }
    if prof.q(0) as u64 >= 2 * params.pu(params.gamma) - 1 {
        return Branch::LargeQ0;
    }
    let r = prof.r;
    let pi = p as i64;
    if params.tau == 1 {
        if prof.imax(1) as i64 >= pi - 1 {
            return Branch::DominantLevel1;
        }
        return match r {
            r if r == pi - 1 => Branch::SparseTop,
            r if (0..=pi - 2).contains(&r) => Branch::SparseMiddle,
            -1 => Branch::SparseNegative,
            _ => Branch::Unclassified,
        };
    }
    let th = thresholds(params);
    let m0 = prof.m(0) as i64;
    if m0 <= th.few_max {
        return Branch::FewLevel0;
    }
    if (0..pi).contains(&r) {
        if m0 >= th.many_min {
            return Branch::ManyLevel0;
        }
        if m0 >= th.upper_min {
            return Branch::UpperMiddle;
        }
        return Branch::Middle;
    }
    if r == -1 {
        let i0 = prof.i(0, 0) as i64;
        if i0 >= th.large_colour0_min {
            return Branch::LargeColour0;
        }
        if i0 >= th.medium_colour0_min {
            return Branch::MediumColour0;
        }
        return Branch::SmallColour0;
    }
    Branch::Unclassified
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Requested precision `N`; raised to `tau + 1` if smaller.
    pub precision: u32,
    /// Fail with [`Error::Unreachable`] when an excluded case is reached,
    /// instead of falling back to the generic search.
    pub strict: bool,
    /// Run this branch instead of the dispatcher's choice.
    pub force_branch: Option<Branch>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { precision: 0, strict: true, force_branch: None }
    }
}

/// How the strategy produced its zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// The branch recipe finished.
    Recipe,
    /// A recipe step failed and the generic subset search was used.
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Residues modulo `p^precision`.
    pub assignment: Vec<BigInt>,
    pub precision: u32,
    pub nonsingular_pair: (usize, usize),
    /// Valuation of the determinant at the pair; 0 for a unit determinant.
    pub det_valuation: u64,
    pub strategy_log: Vec<String>,
    pub branch: Branch,
    pub route: Route,
    /// An excluded case was reached (only possible without `strict`).
    pub excluded_case: bool,
    /// Residual valuations recorded during the final lift.
    pub lift_trace: Vec<u32>,
}

/// What a strategy hands back: a 0/1 (or unit) assignment in some frame.
#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub frame: Frame,
    pub y: Vec<BigInt>,
    pub log: Vec<String>,
}

fn run_branch(branch: Branch, frame: &Frame, prof: &LevelProfile) -> Result<Outcome> {
    match branch {
        Branch::TwoZeroRep | Branch::LargeQ0 => {
            let y = large_q0_solve(&frame.pair, prof).or_else(|e| match branch {
                Branch::TwoZeroRep => two_zero_rep(&frame.pair, prof),
                _ => Err(e),
            })?;
            Ok(Outcome { frame: frame.clone(), y, log: vec![format!("{}: level-0 subset", branch.label())] })
        }
        Branch::DominantLevel1 => tau1::dominant_level1(frame, prof),
        Branch::SparseTop => tau1::sparse_top(frame, prof),
        Branch::SparseMiddle => tau1::sparse_middle(frame, prof),
        Branch::SparseNegative => tau1::sparse_negative(frame, prof),
        Branch::FewLevel0 => tau2::few_level0(frame, prof),
        Branch::ManyLevel0 => tau2::many_level0(frame, prof),
        Branch::UpperMiddle => tau2::upper_middle(frame, prof),
        Branch::Middle => tau2::middle(frame, prof),
        Branch::LargeColour0 => tau2::large_colour0(frame, prof),
        Branch::MediumColour0 => tau2::medium_colour0(frame, prof),
        Branch::SmallColour0 => tau2::small_colour0(frame, prof),
        Branch::Unclassified => Err(Error::Hypothesis { recipe: "dispatch", detail: "profile outside every case".into() }),
    }
}

fn two_zero_rep(pair: &FormPair, prof: &LevelProfile) -> Result<Vec<BigInt>> {
    let rep = zero_representing(pair, prof)?;
    let g = rep.guaranteed_colours();
    if g.len() < 2 {
        return Err(Error::Hypothesis { recipe: "two zero-representing colours", detail: "fewer than two".into() });
    }
    let mut support = rep.witnesses[g[0] as usize].clone().unwrap();
    support.extend(rep.witnesses[g[1] as usize].clone().unwrap());
    Ok(zerorep::indicator(pair.s(), &support))
}

/// Generic search in the frame itself, then in its shifted frames.
fn fallback(frame: &Frame) -> Result<Outcome> {
    let gamma = frame.pair.params.gamma;
    let max_level = compute_profile(&frame.pair)?.max_level() as u32;
    for j in 0..=max_level {
        let f = frame.shifted(j)?;
        if let Some(support) = zerorep::diverse_search(&f.pair, false)? {
            let y = zerorep::indicator(f.pair.s(), &support);
            let line = format!(
                "generic windowed subset search (levels {}..{}) -> {} variables",
                j,
                j + gamma - 1,
                support.len()
            );
            return Ok(Outcome { frame: f, y, log: vec![line] });
        }
    }
    Err(Error::NotFound("generic subset search found no non-singular zero in any shifted frame".into()))
}

/// Solve `f = g = 0` non-singularly modulo `p^N`.
pub fn solve(pair: &FormPair, opts: &SolveOptions) -> Result<Solution> {
    let params = pair.params;
    if pair.s() < params.s_min() {
        return Err(Error::OutsideHypotheses(format!(
            "s = {} but the theorem needs s > 2k^2 = {}",
            pair.s(),
            params.s_min() - 1
        )));
    }
    let (_, rec) = p_normalise(pair)?;
    let frame = Frame::from_record(pair, &rec)?;
    frame.check(pair)?;
    let prof = compute_profile(&frame.pair)?;
    let branch = opts.force_branch.unwrap_or_else(|| select_branch(&params, &prof));
    let mut log = Vec::new();
    for st in &frame.steps {
        log.push(format!("normalise: {st}"));
    }
    let proper = check_proper(&frame.pair)?;
    if !proper.proper && !matches!(branch, Branch::LargeQ0 | Branch::TwoZeroRep) {
        log.push(format!("note: normalised pair not proper ({})", proper.failures.join("; ")));
    }
    log.push(format!("branch: {}", branch.label()));
    let mut route = Route::Recipe;
    let mut excluded_case = false;
    let out = match run_branch(branch, &frame, &prof) {
        Ok(o) => o,
        Err(Error::Unreachable { detail, log: l }) => {
            if opts.strict {
                let mut full = log.clone();
                full.extend(l);
                return Err(Error::Unreachable { detail, log: full });
            }
            excluded_case = true;
            route = Route::Fallback;
            log.extend(l);
            log.push(format!("excluded case reached: {detail}"));
            fallback(&frame)?
        }
        Err(e) => {
            route = Route::Fallback;
            log.push(format!("recipe failed: {e}"));
            fallback(&frame)?
        }
    };
    log.extend(out.log.iter().cloned());
    finish(pair, out, opts, log, branch, route, excluded_case)
}

fn finish(
    pair: &FormPair,
    out: Outcome,
    opts: &SolveOptions,
    log: Vec<String>,
    branch: Branch,
    route: Route,
    excluded_case: bool,
) -> Result<Solution> {
    let gamma = pair.params.gamma;
    let f = &out.frame;
    let frame_pair = verify_nonsingular(&f.pair, &out.y, gamma)?;
    let x0 = f.pull_back(&out.y);
    let (i, j, e) = best_pair(pair, &x0).ok_or_else(|| Error::Verification {
        check: "rank",
        detail: "pulled-back support has no pair with a nonzero determinant".into(),
    })?;
    let e32 = e as u32;
    let loss = f.loss().max(0) as u32;
    let frame_target = gamma.max(e32 + gamma + loss);
    let x1 = if frame_target > gamma {
        let y = lift_solution(&f.pair, &out.y, frame_pair, frame_target)?.x;
        f.pull_back(&y)
    } else {
        x0
    };
    let n_out = opts.precision.max(gamma).max(e32 + gamma);
    let rep = lift_solution(pair, &x1, (i, j), n_out)?;
    let e_check = verify_certificate(pair, &rep.x, n_out, (i, j))?;
    debug_assert_eq!(e_check, e);
    Ok(Solution {
        assignment: rep.x,
        precision: n_out,
        nonsingular_pair: (i, j),
        det_valuation: e,
        strategy_log: log,
        branch,
        route,
        excluded_case,
        lift_trace: rep.valuations,
    })
}

/// Branch and frame the dispatcher would use, without solving.
pub fn dispatch_preview(pair: &FormPair) -> Result<(Branch, LevelProfile, Frame)> {
    let (_, rec) = p_normalise(pair)?;
    let frame = Frame::from_record(pair, &rec)?;
    let prof = compute_profile(&frame.pair)?;
    Ok((select_branch(&pair.params, &prof), prof, frame))
}
