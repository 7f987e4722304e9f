//! Seeded instance generator. Instances are built from a designed level and
//! colour profile so that the normalised pair lands in a chosen branch.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forms::{compute_profile, is_degenerate, normalisation_failures, nuance_vector, p_normalise, FormPair, LevelProfile};
use crate::padic::{pow_p, Params};
use crate::solver::{select_branch, thresholds, Branch};

/// What the generator should aim for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hint {
    /// A branch of the case analysis, picked from the seed.
    Any,
    /// Independent uniform coefficients (almost always the level-0 search).
    Uniform,
    Branch(Branch),
}

impl Hint {
    pub fn parse(s: &str) -> Option<Hint> {
        match s {
            "any" => Some(Hint::Any),
            "uniform" => Some(Hint::Uniform),
            _ => Branch::from_key(s).map(Hint::Branch),
        }
    }
}

/// Colour counts of the first levels plus the colour-0 nuance counts at
/// level 0; the remaining levels are filled by [`instance_from_design`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    pub levels: Vec<Vec<usize>>,
    /// Nuance counts of colour 0 at level 0 (`p` entries).
    pub nuance0: Vec<usize>,
}

fn ceil(x: f64) -> i64 {
    x.ceil() as i64
}

/// Split `total` over `n` slots with every slot at most `cap`.
fn spread(rng: &mut ChaCha8Rng, total: usize, n: usize, cap: usize) -> Option<Vec<usize>> {
    if total > n * cap {
        return None;
    }
    let mut out = vec![0; n];
    let mut left = total;
    while left > 0 {
        let i = rng.gen_range(0..n);
        if out[i] < cap {
            out[i] += 1;
            left -= 1;
        }
    }
    Some(out)
}

fn pick(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Option<i64> {
    (lo <= hi).then(|| rng.gen_range(lo..=hi))
}

/// Level-0 counts: colour 0 first, then `q0` spread over the other colours.
fn level0(rng: &mut ChaCha8Rng, params: &Params, i0: usize, q0: usize, cap: usize) -> Option<Vec<usize>> {
    let p = params.p as usize;
    let mut v = vec![i0];
    v.extend(spread(rng, q0, p, cap.min(i0))?);
    Some(v)
}

/// Level-1 counts with colour 0 or `p` largest.
fn level1(rng: &mut ChaCha8Rng, params: &Params, m1: usize, max: Option<usize>) -> Option<Vec<usize>> {
    let p = params.p as usize;
    let cap = max.unwrap_or(m1);
    let mut v = spread(rng, m1, p + 1, cap)?;
    let top = if rng.gen_bool(0.5) { 0 } else { p };
    let arg = (0..=p).max_by_key(|&c| v[c]).unwrap();
    v.swap(arg, top);
    Some(v)
}

fn nuances(rng: &mut ChaCha8Rng, params: &Params, i0: usize) -> Option<Vec<usize>> {
    let p = params.p as usize;
    let i00 = (i0.div_ceil(p) + rng.gen_range(0..3)).min(i0);
    let mut v = vec![i00];
    v.extend(spread(rng, i0 - i00, p - 1, i00)?);
    Some(v)
}

/// Sample a design for `hint`; `None` when this draw does not fit.
pub fn sample_design(rng: &mut ChaCha8Rng, params: &Params, s: usize, branch: Branch) -> Option<Design> {
    let p = params.p as i64;
    let pu = p as usize;
    let g = params.pi(params.gamma);
    let thr = params.zero_rep_threshold();
    let sk = s as f64 / params.k as f64;
    let q0min = ceil(sk / 2.0 + 1e-9);
    let pt = params.pi(params.tau);
    let tau = params.tau;
    // level-0 shape: (q0 range, I0 range or m0 range)
    let (q0, i0): (i64, i64) = match branch {
        Branch::TwoZeroRep => {
            let i0 = pick(rng, thr as i64, thr as i64 + p)?;
            let second = pick(rng, thr as i64, i0)?;
            let rest = pick(rng, 0, p)?;
            let mut l0 = vec![i0 as usize, second as usize];
            l0.extend(spread(rng, rest as usize, pu - 1, thr - 1)?);
            let q0 = (second + rest) as usize;
            let m1 = level1_size(rng, sk, (i0 as usize + q0) as i64, None)?;
            let l1 = level1(rng, params, m1, None)?;
            return Some(Design { levels: vec![l0, l1], nuance0: nuances(rng, params, i0 as usize)? });
        }
        Branch::LargeQ0 => {
            let q0 = pick(rng, 2 * g - 1, 2 * g - 1 + p)?;
            let lo = (q0 + p - 1) / p + 2;
            (q0, pick(rng, lo, lo + p)?)
        }
        _ if tau == 1 => {
            let (qlo, qhi) = match branch {
                Branch::DominantLevel1 => (q0min, 2 * g - 2),
                Branch::SparseTop => (g + (p - 1) * pt, 2 * g - 2),
                Branch::SparseMiddle => {
                    let r = pick(rng, 0, p - 2)?;
                    (g + r * pt, g + (r + 1) * pt - 1)
                }
                Branch::SparseNegative => (q0min, g - 1),
                _ => return None,
            };
            let q0 = pick(rng, qlo, qhi)?;
            let dominant = branch == Branch::DominantLevel1;
            let cap1 = if dominant { None } else { Some(pu - 2) };
            let m1 = if dominant {
                pick(rng, p - 1, ceil(sk) + 2 * p)? as usize
            } else {
                pick(rng, 0, ((pu + 1) * (pu - 2)) as i64)? as usize
            };
            let mut l1 = level1(rng, params, m1, cap1)?;
            if dominant && *l1.iter().max().unwrap() < pu - 1 {
                let top = if l1[0] >= l1[pu] { 0 } else { pu };
                l1[top] = pu - 1 + rng.gen_range(0..3);
            }
            let m1 = l1.iter().sum::<usize>() as i64;
            let q1 = m1 - *l1.iter().max().unwrap() as i64;
            let lo = [ceil(sk + 1e-9) - q0, ceil(2.0 * sk + 1e-9) - q0 - m1, ceil(1.5 * sk + 1e-9) - q0 - q1, (q0 + p - 1) / p + 1]
                .into_iter()
                .max()
                .unwrap();
            let i0 = pick(rng, lo, lo + ceil(sk / 2.0))?;
            let l0 = level0(rng, params, i0 as usize, q0 as usize, thr - 1)?;
            return Some(Design { levels: vec![l0, l1], nuance0: nuances(rng, params, i0 as usize)? });
        }
        _ => {
            let th = thresholds(params);
            let m0lo = ceil(sk + 1e-9);
            let (q0, m0) = match branch {
                Branch::FewLevel0 => {
                    let m0 = pick(rng, m0lo, th.few_max)?;
                    (pick(rng, q0min, (2 * g - 2).min(m0 * p / (p + 1)))?, m0)
                }
                Branch::ManyLevel0 | Branch::UpperMiddle | Branch::Middle => {
                    let (lo, hi) = match branch {
                        Branch::ManyLevel0 => (th.many_min, th.many_min + 2 * pt),
                        Branch::UpperMiddle => (th.upper_min, th.many_min - 1),
                        _ => (th.few_max + 1, th.upper_min - 1),
                    };
                    let m0 = pick(rng, lo, hi)?;
                    (pick(rng, g, (2 * g - 2).min(m0 * p / (p + 1)))?, m0)
                }
                Branch::LargeColour0 | Branch::MediumColour0 | Branch::SmallColour0 => {
                    let q0 = pick(rng, q0min, g - 1)?;
                    let (lo, hi) = match branch {
                        Branch::LargeColour0 => (th.large_colour0_min, th.large_colour0_min + pt),
                        Branch::MediumColour0 => {
                            (th.medium_colour0_min.max(th.few_max + 1 - q0), th.large_colour0_min - 1)
                        }
                        _ => ((q0 + p - 1) / p + 1, th.medium_colour0_min - 1),
                    };
                    let lo = lo.max(m0lo - q0);
                    (q0, q0 + pick(rng, lo, hi)?)
                }
                _ => return None,
            };
            (q0, m0 - q0)
        }
    };
    let m0 = q0 + i0;
    let m1 = level1_size(rng, sk, m0, None)?;
    let l1 = level1(rng, params, m1, None)?;
    let l0 = level0(rng, params, i0 as usize, q0 as usize, thr - 1)?;
    Some(Design { levels: vec![l0, l1], nuance0: nuances(rng, params, i0 as usize)? })
}

/// Level-1 size keeping the cumulative level counts ahead of `(j+1) s/k`.
fn level1_size(rng: &mut ChaCha8Rng, sk: f64, m0: i64, _cap: Option<usize>) -> Option<usize> {
    let lo = (ceil(2.0 * sk + 1e-9) - m0).max(ceil(1.5 * sk + 1e-9) - m0 + 1).max(0);
    // leave room for q1 below m1
    let lo = lo + lo / 4;
    Some(pick(rng, lo, lo + ceil(sk / 2.0))? as usize)
}

/// Build a pair from a design. Levels after the design are filled with
/// uniformly coloured variables, keeping the level sums ahead of
/// `(j + 3/2) s/k`.
pub fn instance_from_design(params: &Params, s: usize, design: &Design, rng: &mut ChaCha8Rng) -> Result<FormPair> {
    let p = params.p;
    let pi = p as i64;
    let k = params.k as usize;
    let sk = s as f64 / k as f64;
    let mut spec: Vec<(u32, u32, u32)> = Vec::with_capacity(s);
    let mut cum = 0usize;
    for (l, counts) in design.levels.iter().enumerate() {
        for (c, &n) in counts.iter().enumerate() {
            for t in 0..n {
                let mu = if l == 0 && c == 0 {
                    let mut acc = 0;
                    let mut mu = 0;
                    for (m, &x) in design.nuance0.iter().enumerate() {
                        acc += x;
                        if t < acc {
                            mu = m;
                            break;
                        }
                    }
                    mu as u32
                } else {
                    rng.gen_range(0..p as u32)
                };
                spec.push((l as u32, c as u32, mu));
            }
            cum += n;
        }
    }
    if cum > s {
        return Err(Error::OutsideHypotheses(format!("design uses {cum} variables, s = {s}")));
    }
    for j in design.levels.len()..k {
        let target = if j + 1 == k { s } else { (((j as f64 + 1.5) * sk).ceil() as usize + p as usize).min(s) };
        let n = target.saturating_sub(cum);
        for _ in 0..n {
            spec.push((j as u32, rng.gen_range(0..=p as u32), rng.gen_range(0..p as u32)));
        }
        cum += n;
    }
    spec.shuffle(rng);
    let p2 = pi * pi;
    let noise = 1_000_000i64;
    let coeffs = spec
        .iter()
        .map(|&(l, c, mu)| {
            let (x, y) = nuance_vector(pi, c, mu);
            let unit = loop {
                let u = rng.gen_range(1..p2);
                if u % pi != 0 {
                    break u;
                }
            };
            let a = (unit * x).rem_euclid(p2) + p2 * rng.gen_range(-noise..=noise);
            let b = (unit * y).rem_euclid(p2) + p2 * rng.gen_range(-noise..=noise);
            let pl = pow_p(p, l);
            (BigInt::from(a) * &pl, BigInt::from(b) * &pl)
        })
        .collect();
    FormPair::new(*params, coeffs)
}

/// Whether the profile satisfies the hypotheses of the branch on its own,
/// ignoring which earlier branch would be taken first.
pub fn in_region(params: &Params, prof: &LevelProfile, branch: Branch) -> bool {
    let p = params.p as i64;
    let g = params.pu(params.gamma) as usize;
    let thr = params.zero_rep_threshold();
    let r = prof.r;
    let m0 = prof.m(0) as i64;
    let i0 = prof.i(0, 0) as i64;
    let th = thresholds(params);
    let tau1 = params.tau == 1;
    match branch {
        Branch::TwoZeroRep => (0..=p as u32).filter(|&c| prof.i(0, c) >= thr).count() >= 2,
        Branch::LargeQ0 => prof.q(0) >= 2 * g - 1,
        Branch::DominantLevel1 => tau1 && prof.imax(1) as i64 >= p - 1,
        Branch::SparseTop => tau1 && (prof.imax(1) as i64) < p - 1 && r == p - 1,
        Branch::SparseMiddle => tau1 && (prof.imax(1) as i64) < p - 1 && (0..=p - 2).contains(&r),
        Branch::SparseNegative => tau1 && (prof.imax(1) as i64) < p - 1 && r == -1,
        Branch::FewLevel0 => !tau1 && m0 <= th.few_max,
        Branch::ManyLevel0 => !tau1 && r >= 0 && m0 >= th.many_min,
        Branch::UpperMiddle => !tau1 && r >= 0 && m0 >= th.upper_min,
        Branch::Middle => !tau1 && r >= 0 && m0 > th.few_max,
        Branch::LargeColour0 => !tau1 && r == -1 && i0 >= th.large_colour0_min,
        Branch::MediumColour0 => !tau1 && r == -1 && i0 >= th.medium_colour0_min,
        Branch::SmallColour0 => !tau1 && r == -1 && i0 < th.medium_colour0_min,
        Branch::Unclassified => false,
    }
}

/// Number of variables for a given slack: `2k^2 + slack`.
pub fn s_for(params: &Params, slack: usize) -> usize {
    params.s_min() - 1 + slack
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub pair: FormPair,
    /// Branch the dispatcher takes on the normalised pair.
    pub branch: Branch,
    pub attempts: usize,
}

const MAX_ATTEMPTS: usize = 400;

/// Deterministic instance for `(params, seed, slack, hint)`.
pub fn generate(params: &Params, seed: u64, slack: usize, hint: Hint) -> Result<Generated> {
    if slack == 0 {
        return Err(Error::OutsideHypotheses("slack must be at least 1".into()));
    }
    let s = s_for(params, slack);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = match hint {
        Hint::Branch(b) => Some(b),
        Hint::Any => {
            let list = Branch::strategy_branches(params.tau);
            Some(list[rng.gen_range(0..list.len())])
        }
        Hint::Uniform => None,
    };
    for attempt in 1..=MAX_ATTEMPTS {
        let pair = match target {
            None => uniform_pair(params, s, &mut rng)?,
            Some(b) => {
                let Some(design) = sample_design(&mut rng, params, s, b) else { continue };
                instance_from_design(params, s, &design, &mut rng)?
            }
        };
        if is_degenerate(&pair) {
            continue;
        }
        let (norm, _) = p_normalise(&pair)?;
        let prof = compute_profile(&norm)?;
        if !normalisation_failures(params, &prof).is_empty() {
            continue;
        }
        let branch = select_branch(params, &prof);
        let ok = match target {
            None => true,
            Some(b) if b == Branch::SmallColour0 && b != branch => {
                // earlier branches cover this region; accept the hypotheses alone
                in_region(params, &prof, b) && prof.q(0) < 2 * params.pu(params.gamma) as usize - 1
            }
            Some(b) => branch == b,
        };
        if ok {
            return Ok(Generated { pair, branch, attempts: attempt });
        }
    }
    Err(Error::NotFound(format!("no instance for the requested hint after {MAX_ATTEMPTS} attempts")))
}

fn uniform_pair(params: &Params, s: usize, rng: &mut ChaCha8Rng) -> Result<FormPair> {
    let coeffs = (0..s)
        .map(|_| (BigInt::from(rng.gen_range(-1_000_000_000i64..=1_000_000_000)), BigInt::from(rng.gen_range(-1_000_000_000i64..=1_000_000_000))))
        .collect();
    FormPair::new(*params, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::derive_params;

    #[test]
    fn every_tau1_branch_is_generated() {
        let pr = derive_params(5, 1).unwrap();
        for &b in Branch::strategy_branches(1) {
            let g = generate(&pr, 7, 1, Hint::Branch(b)).unwrap();
            assert_eq!(g.branch, b);
            assert_eq!(g.pair.s(), 801);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let pr = derive_params(5, 1).unwrap();
        let a = generate(&pr, 42, 1, Hint::Any).unwrap();
        let b = generate(&pr, 42, 1, Hint::Any).unwrap();
        assert_eq!(a.pair, b.pair);
    }
}
