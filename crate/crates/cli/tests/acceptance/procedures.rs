//! Randomised pools for the batch and tower procedures, checked against
//! their closed-form output counts with types recomputed from the original
//! coefficients.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use padic_pairs::contraction::batch::{
    batch_bounded_then_mixed, batch_bounded_then_two_stage, batch_half_range, batch_level0_primaries,
    batch_nuance_classes, batch_nuance_shift, batch_special_bounded, batch_two_stage_from_mixed,
    nuance_classes_bound, BatchOutput,
};
use padic_pairs::contraction::tower::{
    one_colour_tower_count, one_colour_tower_count_p5, spare_tower_count, special_tower_size, tower_colour_spares,
    tower_one_colour, tower_one_colour_p5, tower_special, tower_special_with_colours, tower_to_terminal,
    TowerOutput,
};
use padic_pairs::contraction::{Pool, SMode, VarId};
use padic_pairs::forms::nuance_vector;
use padic_pairs::{derive_params, FormPair, Params};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent view of a variable: level and colour of the summed leaf
/// coefficients, and the colours of its level-0 leaves.
struct Seen {
    level: Option<u32>,
    colour: Option<u32>,
    leaf_colours: Vec<u32>,
}

fn val(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    while x.is_multiple_of(&pb) {
        x /= &pb;
        v += 1;
    }
    Some(v)
}

fn colour_of(p: u64, a: &BigInt, b: &BigInt) -> u32 {
    let pb = BigInt::from(p);
    let a = a.mod_floor(&pb).to_u64().unwrap();
    let b = b.mod_floor(&pb).to_u64().unwrap();
    if b == 0 {
        return 0;
    }
    let binv = (1..p).find(|&t| b * t % p == 1).unwrap();
    match a * binv % p {
        0 => p as u32,
        t => t as u32,
    }
}

fn seen(pair: &FormPair, pool: &Pool, id: VarId) -> Seen {
    let p = pair.params.p;
    let leaves = &pool.var(id).leaves;
    let mut a = BigInt::zero();
    let mut b = BigInt::zero();
    let mut leaf_colours = Vec::new();
    for &i in leaves {
        a += &pair.a[i];
        b += &pair.b[i];
        if val(&pair.a[i], p).unwrap_or(u32::MAX).min(val(&pair.b[i], p).unwrap_or(u32::MAX)) == 0 {
            leaf_colours.push(colour_of(p, &pair.a[i], &pair.b[i]));
        }
    }
    leaf_colours.sort_unstable();
    leaf_colours.dedup();
    let level = match (val(&a, p), val(&b, p)) {
        (None, None) => None,
        (x, y) => Some(x.unwrap_or(u32::MAX).min(y.unwrap_or(u32::MAX))),
    };
    let colour = level.map(|l| {
        let d = BigInt::from(p).pow(l);
        colour_of(p, &(&a / &d), &(&b / &d))
    });
    Seen { level, colour, leaf_colours }
}

/// Claimed type of an output.
#[derive(Clone, Copy)]
enum Kind {
    /// Special at level at least `l`.
    Special(u32, SMode),
    /// Exact level `l`, colour `nu`.
    Exact(u32, u32),
    /// Exact level `l`, colour other than `nu`.
    ExactNot(u32, u32),
}

fn check_kind(pair: &FormPair, pool: &Pool, id: VarId, kind: Kind) -> Result<(), String> {
    let s = seen(pair, pool, id);
    let ok = match kind {
        Kind::Special(l, mode) => {
            let special = match mode {
                SMode::Primary => s.leaf_colours.len() >= 2,
                SMode::Colourful => s.leaf_colours.iter().any(|&c| c != 0),
            };
            special && s.level.is_none_or(|v| v >= l)
        }
        Kind::Exact(l, nu) => s.level == Some(l) && s.colour == Some(nu),
        Kind::ExactNot(l, nu) => s.level == Some(l) && s.colour != Some(nu),
    };
    if ok {
        Ok(())
    } else {
        Err(format!("variable {id} has level {:?}, colour {:?}, leaf colours {:?}", s.level, s.colour, s.leaf_colours))
    }
}

/// Leaves of all given variables are pairwise disjoint.
fn check_disjoint(pool: &Pool, groups: &[&[VarId]]) -> Result<(), String> {
    let mut used = vec![false; pool.s];
    for g in groups {
        for &id in *g {
            for &leaf in &pool.var(id).leaves {
                if std::mem::replace(&mut used[leaf], true) {
                    return Err(format!("leaf {leaf} shared between returned variables"));
                }
            }
        }
    }
    Ok(())
}

struct Build {
    p: u64,
    tau: u32,
    coeffs: Vec<(BigInt, BigInt)>,
    rng: ChaCha8Rng,
}

impl Build {
    fn new(p: u64, tau: u32, seed: u64) -> Build {
        Build { p, tau, coeffs: Vec::new(), rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn params(&self) -> Params {
        derive_params(self.p, self.tau).unwrap()
    }

    /// A variable at exact level `l` with colour `nu` and a random nuance.
    fn var(&mut self, l: u32, nu: u32) -> usize {
        let p = self.p as i64;
        let mu = self.rng.gen_range(0..p) as u32;
        self.var_nuance(l, nu, mu)
    }

    fn var_nuance(&mut self, l: u32, nu: u32, mu: u32) -> usize {
        let p = self.p as i64;
        let (va, vb) = nuance_vector(p, nu, mu);
        let c = loop {
            let c = self.rng.gen_range(1..p * p);
            if c % p != 0 {
                break c;
            }
        };
        let noise = |rng: &mut ChaCha8Rng| rng.gen_range(-1_000_000i64..=1_000_000);
        let a = c * va + p * p * noise(&mut self.rng);
        let b = c * vb + p * p * noise(&mut self.rng);
        let scale = BigInt::from(self.p).pow(l);
        self.coeffs.push((BigInt::from(a) * &scale, BigInt::from(b) * &scale));
        self.coeffs.len() - 1
    }

    fn vars(&mut self, n: usize, l: u32, nu: u32) -> Vec<usize> {
        (0..n).map(|_| self.var(l, nu)).collect()
    }

    fn random_colour(&mut self) -> u32 {
        self.rng.gen_range(0..=self.p as u32)
    }

    fn colourful0(&mut self, n: usize) -> Vec<usize> {
        (0..n)
            .map(|_| {
                let nu = self.rng.gen_range(1..=self.p as u32);
                self.var(0, nu)
            })
            .collect()
    }

    /// Level-0 variables with random colours, at least `q` off the largest
    /// colour class.
    fn mixed0(&mut self, n: usize) -> Vec<usize> {
        (0..n)
            .map(|_| {
                let nu = self.random_colour();
                self.var(0, nu)
            })
            .collect()
    }

    fn finish(mut self) -> (FormPair, Pool, ChaCha8Rng) {
        if self.coeffs.is_empty() {
            self.var(0, 0);
        }
        let pair = FormPair::new(self.params(), self.coeffs).unwrap();
        let pool = Pool::new(&pair).unwrap();
        (pair, pool, self.rng)
    }
}

/// Special variables of type `S^ls`: colourful level-0 originals when
/// `ls = 0`, primaries built from level-0 variables when `ls = 1`.
struct Specials {
    ls: u32,
    mode: SMode,
    level0: Vec<usize>,
    n: usize,
}

impl Specials {
    fn plan(b: &mut Build, n: usize, primary: bool) -> Specials {
        if primary {
            let p = b.p as usize;
            // (2p - 1) per primary, colours spread so q is large
            let level0 = (0..(2 * p - 1) * n)
                .map(|i| {
                    let nu = (i % (b.p as usize + 1)) as u32;
                    b.var(0, nu)
                })
                .collect();
            Specials { ls: 1, mode: SMode::Primary, level0, n }
        } else {
            let level0 = b.colourful0(n);
            Specials { ls: 0, mode: SMode::Colourful, level0, n }
        }
    }

    fn realise(&self, pool: &mut Pool) -> Result<Vec<VarId>, String> {
        match self.mode {
            SMode::Colourful => Ok(self.level0.clone()),
            SMode::Primary => {
                let out = batch_level0_primaries(pool, &self.level0, Some(self.n)).map_err(|e| e.to_string())?;
                if out.len() < self.n {
                    return Err(format!("only {} of {} primaries", out.len(), self.n));
                }
                Ok(out)
            }
        }
    }
}

fn err(e: padic_pairs::Error) -> String {
    e.to_string()
}

fn need(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn check_batch(
    pair: &FormPair,
    pool: &Pool,
    out: &BatchOutput,
    want: usize,
    kind: Kind,
    min_unused: usize,
) -> Result<(), String> {
    need(out.outputs.len() >= want, || format!("{} outputs, formula gives {want}", out.outputs.len()))?;
    need(out.unused.len() >= min_unused, || format!("{} unused, need {min_unused}", out.unused.len()))?;
    for &o in &out.outputs {
        check_kind(pair, pool, o, kind)?;
    }
    for &u in &out.unused {
        need(pool.is_available(u), || format!("unused variable {u} was consumed"))?;
    }
    check_disjoint(pool, &[&out.outputs, &out.unused])
}

fn check_tower(pair: &FormPair, pool: &Pool, t: &TowerOutput, top: usize, top_kind: Kind) -> Result<(), String> {
    need(t.top.len() >= top, || format!("{} top variables, formula gives {top}", t.top.len()))?;
    for &o in &t.top {
        check_kind(pair, pool, o, top_kind)?;
    }
    let mut groups: Vec<&[VarId]> = vec![&t.top];
    for (_, s) in &t.spares {
        groups.push(s);
    }
    check_disjoint(pool, &groups)
}

fn pick_p_tau(rng: &mut ChaCha8Rng) -> (u64, u32) {
    *[(5, 1), (7, 1), (5, 2)].choose(rng).unwrap()
}

/// One randomised trial of a procedure; `Err` describes the violation.
pub fn trial(name: &str, seed: u64) -> Result<(), String> {
    let mut meta = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (p, tau) = pick_p_tau(&mut meta);
    let pu = p as usize;
    let pi = p as i64;
    let mut b = Build::new(p, tau, seed);
    match name {
        "level-0 primaries" => {
            let n = meta.gen_range(2 * pu - 1..12 * pu);
            let h = b.mixed0(n);
            let (pair, mut pool, _) = b.finish();
            let mut counts = vec![0usize; pu + 1];
            for &i in &h {
                counts[pool.var(i).colour().unwrap() as usize] += 1;
            }
            let q = n - counts.iter().max().unwrap();
            let bound = (n / (2 * pu - 1)).min(q / pu);
            let out = batch_level0_primaries(&mut pool, &h, None).map_err(err)?;
            let bo = BatchOutput { outputs: out, unused: vec![] };
            check_batch(&pair, &pool, &bo, bound, Kind::Special(1, SMode::Primary), 0)
        }
        "bounded special" => {
            let primary = meta.gen_bool(0.3);
            let x = meta.gen_range(3 * pu..10 * pu);
            let sp = Specials::plan(&mut b, x, primary);
            let (pair, mut pool, _) = b.finish();
            let set = sp.realise(&mut pool)?;
            let want = ((x + 3) / pu).saturating_sub(3);
            let out = batch_special_bounded(&mut pool, &set, sp.ls, sp.mode, None).map_err(err)?;
            for &o in &out.outputs {
                if !set.contains(&o) {
                    let leaves = &pool.var(o).leaves;
                    let used = set.iter().filter(|&&i| leaves.contains(&pool.var(i).leaves[0])).count();
                    need(used <= pu, || format!("contraction used {used} > p variables"))?;
                }
            }
            check_batch(&pair, &pool, &out, want, Kind::Special(sp.ls + 1, sp.mode), (2 * pu - 2).min(x))
        }
        "half-range" => {
            let nu = b.random_colour();
            let l = meta.gen_range(0..=tau);
            let x = meta.gen_range(2 * pu..40 * pu);
            let set = b.vars(x, l, nu);
            let (pair, mut pool, _) = b.finish();
            let want = (x.div_ceil(2 * pu - 2) as i64 - 4).max(0) as usize;
            let out = batch_half_range(&mut pool, &set, l, None).map_err(err)?;
            check_batch(&pair, &pool, &out, want, Kind::Exact(l + 1, nu), (6 * pu - 9).min(x))
        }
        "nuance classes" => {
            let nu = b.random_colour();
            let l = meta.gen_range(0..=tau);
            let lo = if p == 5 { 2 * pu * pu - 2 * pu + 1 } else { 3 * pu * pu - 3 * pu + 1 };
            let x = meta.gen_range(lo..lo + 8 * pu * pu);
            let set = b.vars(x, l, nu);
            let (pair, mut pool, _) = b.finish();
            let xi = x as i64;
            let formula = if p == 5 { Integer::div_ceil(&xi, &pi) - 2 * pi + 3 } else { Integer::div_ceil(&xi, &pi) - 2 * pi + (pi - 3) / 2 };
            need(nuance_classes_bound(p, x) == Some(formula as usize), || "bound helper disagrees".into())?;
            let out = batch_nuance_classes(&mut pool, &set, l, None).map_err(err)?;
            check_batch(&pair, &pool, &out, formula as usize, Kind::Exact(l + 1, nu), 6 * pu - 9)
        }
        "bounded then two-stage" => {
            let m = meta.gen_range(0..=2usize);
            let x = meta.gen_range(m..m + 4);
            let lo = ((2 - m as i64) * pi - 2).max(0) as usize;
            let y = meta.gen_range(0..=lo + 2);
            let z = lo.saturating_sub(y) + meta.gen_range(0..3);
            let primary = meta.gen_bool(0.3);
            let sp = Specials::plan(&mut b, pu * x + y + z, primary);
            let nu = b.random_colour();
            let coloured = b.vars((pu - 1) * y, sp.ls, nu);
            let others: Vec<usize> = (0..(pu - 1) * y)
                .map(|_| {
                    let c = loop {
                        let c = b.random_colour();
                        if c != nu {
                            break c;
                        }
                    };
                    b.var(sp.ls, c)
                })
                .collect();
            let (pair, mut pool, _) = b.finish();
            let specials = sp.realise(&mut pool)?;
            let out =
                batch_bounded_then_two_stage(&mut pool, &coloured, &others, &specials, sp.ls, (x, y, z, m), sp.mode)
                    .map_err(err)?;
            check_batch(&pair, &pool, &out, x + y - m, Kind::Special(sp.ls + 1, sp.mode), z + m * pu)
        }
        "two-stage from mixed" => {
            let x = meta.gen_range(0..6usize);
            let primary = meta.gen_bool(0.3);
            let sp = Specials::plan(&mut b, x, primary);
            let (k, q) = mixed_set(&mut b, &mut meta, sp.ls, (2 * pu - 2) * x + pu * pu - 3 * pu + 1, (pu - 1) * x);
            let (pair, mut pool, _) = b.finish();
            need(q >= (pu - 1) * x, || "construction gave too small q".into())?;
            let specials = sp.realise(&mut pool)?;
            let out = batch_two_stage_from_mixed(&mut pool, &k, &specials, sp.ls, x, sp.mode).map_err(err)?;
            check_batch(&pair, &pool, &out, x, Kind::Special(sp.ls + 1, sp.mode), 0)
        }
        "bounded then mixed" => {
            let m = meta.gen_range(0..=2usize);
            let x = meta.gen_range(m..m + 4);
            let lo = ((2 - m as i64) * pi - 2).max(0) as usize;
            let y = meta.gen_range(0..=lo + 2);
            let z = lo.saturating_sub(y) + meta.gen_range(0..3);
            let primary = meta.gen_bool(0.3);
            let sp = Specials::plan(&mut b, pu * x + y + z, primary);
            let (k, _) = mixed_set(&mut b, &mut meta, sp.ls, (2 * pu - 2) * y + pu * pu - 3 * pu + 1, (pu - 1) * y);
            let (pair, mut pool, _) = b.finish();
            let specials = sp.realise(&mut pool)?;
            let out =
                batch_bounded_then_mixed(&mut pool, &k, &specials, sp.ls, (x, y, z, m), sp.mode).map_err(err)?;
            check_batch(&pair, &pool, &out, x + y - m, Kind::Special(sp.ls + 1, sp.mode), z + m * pu)
        }
        "nuance shift" => {
            let nu = b.random_colour();
            let l = meta.gen_range(0..=tau);
            let x = meta.gen_range(0..8usize);
            let mu = meta.gen_range(0..pi) as u32;
            let mut set: Vec<usize> = (0..x).map(|_| b.var_nuance(l, nu, mu)).collect();
            for _ in 0..x {
                let other = (mu + meta.gen_range(1..pi) as u32) % p as u32;
                set.push(b.var_nuance(l, nu, other));
            }
            let extra = pu * x + pu * pu - 3 * pu + 3 - 2 * x + meta.gen_range(0..2 * pu);
            set.extend(b.vars(extra, l, nu));
            set.shuffle(&mut meta);
            let (pair, mut pool, _) = b.finish();
            let out = batch_nuance_shift(&mut pool, &set, l, x).map_err(err)?;
            let consumed = set.len() - out.unused.len();
            need(consumed <= pu * x, || format!("consumed {consumed} > px = {}", pu * x))?;
            check_batch(&pair, &pool, &out, x, Kind::ExactNot(l + 1, nu), 0)
        }
        "special tower" => {
            let primary = tau >= 1 && meta.gen_bool(0.3);
            let ls = primary as u32;
            let j = meta.gen_range(ls..=tau);
            let m = meta.gen_range(-1..pi);
            let n = (special_tower_size(p, tau, ls, m) - 2) as usize;
            let sp = Specials::plan(&mut b, n, primary);
            let (pair, mut pool, _) = b.finish();
            let set = sp.realise(&mut pool)?;
            let t = tower_special(&mut pool, &set, ls, j, m, sp.mode).map_err(err)?;
            let top = (special_tower_size(p, tau, j, m) - 2) as usize;
            for l in ls..j {
                let s = t.spares_at(l);
                need(s.len() >= 2 * pu - 2, || format!("{} spares at level {l}", s.len()))?;
                for &v in s {
                    check_kind(&pair, &pool, v, Kind::Special(l, sp.mode))?;
                }
            }
            check_tower(&pair, &pool, &t, top, Kind::Special(j, sp.mode))
        }
        "special tower with colours" => {
            let primary = meta.gen_bool(0.3);
            let ls = primary as u32;
            let j = meta.gen_range(ls..=tau);
            let m = meta.gen_range(-1..pi);
            let n = special_tower_size(p, tau, ls, m) as usize;
            let sp = Specials::plan(&mut b, n, primary);
            let coloured: Vec<Vec<usize>> = (ls..j)
                .map(|l| {
                    let nu = b.random_colour();
                    b.vars(2 * pu - 2, l, nu)
                })
                .collect();
            let (pair, mut pool, _) = b.finish();
            let set = sp.realise(&mut pool)?;
            let top = tower_special_with_colours(&mut pool, &set, &coloured, ls, j, m, sp.mode).map_err(err)?;
            let want = special_tower_size(p, tau, j, m) as usize;
            let t = TowerOutput { top, spares: vec![] };
            check_tower(&pair, &pool, &t, want, Kind::Special(j, sp.mode))
        }
        "one-colour tower" => {
            let j = meta.gen_range(0..tau);
            let m = meta.gen_range(0..pi);
            let nu = b.random_colour();
            let n = one_colour_tower_count(p, tau, j, m) as usize;
            let set = b.vars(n, j, nu);
            let (pair, mut pool, _) = b.finish();
            let t = tower_one_colour(&mut pool, &set, j, m).map_err(err)?;
            one_colour_spares(&pair, &pool, &t, j, tau, nu, pu)?;
            check_tower(&pair, &pool, &t, (pi - m - 1) as usize, Kind::Exact(tau, nu))
        }
        "one-colour tower, p = 5" => {
            let tau = meta.gen_range(1..=2);
            let mut b = Build::new(5, tau, seed);
            let j = meta.gen_range(0..=tau);
            let m = meta.gen_range(0..5);
            let nu = b.random_colour();
            let n = one_colour_tower_count_p5(5, tau, j, m) as usize;
            let set = b.vars(n, j, nu);
            let (pair, mut pool, _) = b.finish();
            let t = tower_one_colour_p5(&mut pool, &set, j, m).map_err(err)?;
            one_colour_spares(&pair, &pool, &t, j, tau, nu, 5)?;
            check_tower(&pair, &pool, &t, (4 - m) as usize, Kind::Exact(tau, nu))
        }
        "spare tower" => {
            let j = meta.gen_range(0..tau);
            let nu = b.random_colour();
            let n = spare_tower_count(p, tau, j) as usize;
            let set = b.vars(n, j, nu);
            let (pair, mut pool, _) = b.finish();
            let t = tower_colour_spares(&mut pool, &set, j).map_err(err)?;
            one_colour_spares(&pair, &pool, &t, j, tau, nu, pu)?;
            check_tower(&pair, &pool, &t, 0, Kind::Exact(tau, nu))
        }
        "tower to terminal" => {
            let primary = tau >= 2 && meta.gen_bool(0.3);
            let ls = primary as u32;
            let m = meta.gen_range(0..pi);
            let n = special_tower_size(p, tau, ls, m) as usize;
            let sp = Specials::plan(&mut b, n, primary);
            let nu = b.random_colour();
            let top = b.vars((pi - m - 1) as usize, tau, nu);
            let coloured: Vec<Vec<usize>> = (ls..tau)
                .map(|l| {
                    let c = b.random_colour();
                    b.vars(2 * pu - 2, l, c)
                })
                .collect();
            let (pair, mut pool, _) = b.finish();
            let set = sp.realise(&mut pool)?;
            let t = tower_to_terminal(&mut pool, &set, &top, &coloured, ls, m, sp.mode).map_err(err)?;
            check_kind(&pair, &pool, t, Kind::Special(tau + 1, sp.mode))
        }
        other => Err(format!("unknown procedure {other}")),
    }
}

fn one_colour_spares(
    pair: &FormPair,
    pool: &Pool,
    t: &TowerOutput,
    j: u32,
    tau: u32,
    nu: u32,
    pu: usize,
) -> Result<(), String> {
    for l in j..tau {
        let s = t.spares_at(l);
        need(s.len() >= 2 * pu - 2, || format!("{} spares at level {l}", s.len()))?;
        for &v in s {
            check_kind(pair, pool, v, Kind::Exact(l, nu))?;
        }
    }
    Ok(())
}

/// `n` level-`l` variables whose largest colour class leaves at least `q`
/// others. Returns the indices and the achieved `q`.
fn mixed_set(b: &mut Build, meta: &mut ChaCha8Rng, l: u32, n: usize, q: usize) -> (Vec<usize>, usize) {
    let p = b.p as u32;
    let n = n + meta.gen_range(0..2 * b.p as usize);
    let major = b.random_colour();
    // put at most n - q in the major colour, the rest spread
    let in_major = meta.gen_range(0..=n - q.min(n));
    let mut out = b.vars(in_major, l, major);
    let mut counts = vec![0usize; p as usize + 1];
    counts[major as usize] = in_major;
    while out.len() < n {
        let c = b.random_colour();
        if c == major || counts[c as usize] + 1 > n - q {
            continue;
        }
        counts[c as usize] += 1;
        out.push(b.var(l, c));
    }
    out.shuffle(meta);
    let achieved = n - counts.iter().max().unwrap();
    (out, achieved)
}

/// Names and statement labels of the procedures under test.
pub const PROCEDURES: [&str; 14] = [
    "level-0 primaries",
    "bounded special",
    "half-range",
    "nuance classes",
    "bounded then two-stage",
    "two-stage from mixed",
    "bounded then mixed",
    "nuance shift",
    "special tower",
    "special tower with colours",
    "one-colour tower",
    "one-colour tower, p = 5",
    "spare tower",
    "tower to terminal",
];
