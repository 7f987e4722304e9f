//! Independent checks of the normaliser output, computed straight from the
//! coefficients.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use padic_pairs::forms::{is_degenerate, p_normalise, theta_valuation, TransformStep};
use padic_pairs::{derive_params, FormPair, Valuation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn val(x: &BigInt, p: u64) -> u32 {
    let pb = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    while x.is_multiple_of(&pb) {
        x /= &pb;
        v += 1;
    }
    v
}

/// Level and primitive level vector of each variable.
fn levels(pair: &FormPair) -> Vec<(u32, BigInt, BigInt)> {
    let p = pair.params.p;
    (0..pair.s())
        .map(|i| {
            let (a, b) = pair.coeff(i);
            let l = match (a.is_zero(), b.is_zero()) {
                (true, _) => val(b, p),
                (_, true) => val(a, p),
                _ => val(a, p).min(val(b, p)),
            };
            let d = BigInt::from(p).pow(l);
            (l, a / &d, b / &d)
        })
        .collect()
}

fn md(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m)).to_u64().unwrap()
}

/// `v_p(theta)` from all minors. Minors are taken modulo `p^20` first and
/// recomputed exactly only when they vanish there.
pub fn theta_by_minors(pair: &FormPair) -> u64 {
    let p = pair.params.p;
    let lv = levels(pair);
    let m = (p as i128).pow(20);
    let red: Vec<(i128, i128)> = lv
        .iter()
        .map(|(_, a, b)| (a.mod_floor(&BigInt::from(m)).to_i128().unwrap(), b.mod_floor(&BigInt::from(m)).to_i128().unwrap()))
        .collect();
    let level_sum: u64 = lv.iter().map(|v| v.0 as u64).sum();
    let s = lv.len() as u64;
    let mut inner = 0u64;
    for i in 0..lv.len() {
        for j in i + 1..lv.len() {
            let d = (red[i].0 * red[j].1 - red[j].0 * red[i].1).rem_euclid(m);
            inner += if d != 0 {
                let mut d = d;
                let mut v = 0;
                while d % p as i128 == 0 {
                    d /= p as i128;
                    v += 1;
                }
                v
            } else {
                let exact = &lv[i].1 * &lv[j].2 - &lv[j].1 * &lv[i].2;
                val(&exact, p) as u64
            };
        }
    }
    2 * ((s - 1) * level_sum + inner)
}

/// Everything the normaliser promises about its output, recomputed.
pub fn check_output(pair: &FormPair) -> Result<(), String> {
    let params = pair.params;
    let p = params.p;
    let k = params.k as usize;
    let s = pair.s();
    let lv = levels(pair);
    let top = lv.iter().map(|v| v.0 as usize).max().unwrap_or(0).max(k) + 1;
    let mut m = vec![0usize; top];
    let mut colours = vec![vec![0usize; p as usize + 1]; top];
    let mut nuance00 = vec![0usize; p as usize];
    let mut g0_units = 0;
    let (mut f1_units, mut g1_units) = (0, 0);
    for (l, a, b) in &lv {
        let l = *l as usize;
        m[l] += 1;
        let (ar, br) = (md(a, p), md(b, p));
        let colour = if br == 0 {
            0
        } else {
            let binv = (1..p).find(|&t| br * t % p == 1).unwrap();
            match ar * binv % p {
                0 => p as usize,
                t => t as usize,
            }
        };
        colours[l][colour] += 1;
        if l == 0 {
            if br != 0 {
                g0_units += 1;
            } else {
                // colour-0 nuance: (b/p) a^{-1} mod p
                let ainv = (1..p).find(|&t| ar * t % p == 1).unwrap();
                let mu = md(&(b / BigInt::from(p)), p) * ainv % p;
                nuance00[mu as usize] += 1;
            }
        }
        if l == 1 {
            f1_units += (ar != 0) as usize;
            g1_units += (br != 0) as usize;
        }
    }
    let q: Vec<usize> = (0..top).map(|l| m[l] - colours[l].iter().max().unwrap()).collect();
    let mut cum = 0;
    for (j, mj) in m.iter().take(k).enumerate() {
        cum += mj;
        if k * cum < (j + 1) * s {
            return Err(format!("level sums fail at j = {j}: {cum} < {}s/k", j + 1));
        }
    }
    if g0_units != q[0] {
        return Err(format!("g_0 has {g0_units} unit coefficients, q_0 = {}", q[0]));
    }
    if f1_units != q[1] && g1_units != q[1] {
        return Err(format!("level 1 unit counts ({f1_units}, {g1_units}) miss q_1 = {}", q[1]));
    }
    let i00 = nuance00[0];
    if nuance00.iter().any(|&x| x > i00) {
        return Err(format!("nuance (0,0) is not largest: {nuance00:?}"));
    }
    let i0_0 = colours[0][0];
    let i0_1 = colours[1][0];
    if k * (m[0] + m[1] - i0_1) < k * i00 + s {
        return Err(format!("upper nuance bound fails: I00 = {i00}"));
    }
    if (p as usize) * i00 < m[0] - q[0] {
        return Err(format!("lower nuance bound fails: I00 = {i00}, m0 - q0 = {}", m[0] - q[0]));
    }
    if k * (i0_0 - i00 + q[0] + m[1] - i0_1) < s {
        return Err("colour-0 excess inequality fails".into());
    }
    Ok(())
}

/// Random non-degenerate `(5, 1)` pair with skewed levels and colours.
pub fn skewed_instance(seed: u64) -> FormPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let pair = skewed_attempt(&mut rng);
        if !is_degenerate(&pair) {
            return pair;
        }
    }
}

fn skewed_attempt(rng: &mut ChaCha8Rng) -> FormPair {
    let params = derive_params(5, 1).unwrap();
    let p = 5i64;
    let s = params.s_min() + rng.gen_range(0..20);
    let high = rng.gen_range(0.1..0.9);
    let max_level = rng.gen_range(1..=30u32);
    let fav = rng.gen_range(0..=p);
    let bias = rng.gen_range(0.0..0.8);
    let coeffs = (0..s)
        .map(|_| {
            let l = if rng.gen_bool(high) { rng.gen_range(1..=max_level) } else { 0 };
            let (a, b) = loop {
                let (a, b) = if rng.gen_bool(bias) {
                    let t = rng.gen_range(-1_000_000i64..1_000_000);
                    let u = rng.gen_range(1..p);
                    match fav {
                        0 => (u + p * t, p * rng.gen_range(-1_000_000..1_000_000)),
                        5 => (p * t, u),
                        nu => (nu * u + p * t, u + p * rng.gen_range(-1_000_000..1_000_000)),
                    }
                } else {
                    (rng.gen_range(-1_000_000i64..1_000_000), rng.gen_range(-1_000_000i64..1_000_000))
                };
                if a % p != 0 || b % p != 0 {
                    break (a, b);
                }
            };
            let d = BigInt::from(p).pow(l);
            (BigInt::from(a) * &d, BigInt::from(b) * &d)
        })
        .collect();
    FormPair::new(params, coeffs).unwrap()
}

fn unit_mix(st: &TransformStep, p: u64) -> bool {
    match st {
        TransformStep::Mix { l1, l2, m1, m2 } => !(l1 * m2 - l2 * m1).is_multiple_of(&BigInt::from(p)),
        _ => false,
    }
}

/// Runs the whole contract on one instance.
pub fn trial(seed: u64) -> Result<(), String> {
    let pair = skewed_instance(seed);
    let p = pair.params.p;
    let (out, rec) = p_normalise(&pair).map_err(|e| e.to_string())?;
    check_output(&out)?;
    // theta at each point where the steps so far form a p-equivalence
    let mut cur = pair.clone();
    let mut last = theta_by_minors(&cur);
    if theta_valuation(&cur) != Valuation::Finite(last) {
        return Err("minor count disagrees with theta_valuation on the input".into());
    }
    for st in &rec.steps {
        cur = padic_pairs::forms::apply_transform(&cur, st).map_err(|e| e.to_string())?;
        if matches!(st, TransformStep::Divide(_)) || unit_mix(st, p) {
            let t = theta_by_minors(&cur);
            if t > last {
                return Err(format!("v_p(theta) rose from {last} to {t} after {}", st.describe()));
            }
            last = t;
        }
    }
    if cur != out {
        return Err("replaying the record does not give the output".into());
    }
    let (again, rec2) = p_normalise(&out).map_err(|e| e.to_string())?;
    if !rec2.is_empty() || again != out {
        return Err(format!("not idempotent: {} further steps", rec2.steps.len()));
    }
    Ok(())
}
