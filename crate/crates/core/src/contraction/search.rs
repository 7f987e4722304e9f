//! Subset searches over pool variables, built on the lexicographic engine.

use crate::forms::classify_mod_p2;
use crate::zerosum::lex_smallest_subset;

use super::{Pool, SMode, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Level at least `l + 1`.
    Divisible,
    /// Level exactly `l + 1`.
    ExactNext,
    /// Level exactly `l + 1` with the given colour.
    NextColour(u32),
    /// Level exactly `l + 1` with a colour other than the given one.
    NextNotColour(u32),
}

#[derive(Debug, Clone)]
pub struct Search<'a> {
    pub level: u32,
    pub candidates: &'a [VarId],
    pub target: Target,
    pub max_size: Option<usize>,
    pub forced: Option<VarId>,
    pub need_special: Option<SMode>,
    /// At least two colours among the members of exact level `l`.
    pub diverse: bool,
}

impl<'a> Search<'a> {
    pub fn new(level: u32, candidates: &'a [VarId], target: Target) -> Search<'a> {
        Search { level, candidates, target, max_size: None, forced: None, need_special: None, diverse: false }
    }
}

struct Layout {
    m: usize,
    sz: usize,
    sp: usize,
    cs: usize,
    fc: usize,
}

impl Layout {
    fn n_states(&self) -> usize {
        self.m * self.m * self.sz * self.sp * self.cs * self.fc
    }

    fn encode(&self, a: usize, b: usize, size: usize, sp: usize, cs: usize, fc: usize) -> usize {
        ((((fc * self.cs + cs) * self.sp + sp) * self.sz + size) * self.m + b) * self.m + a
    }

    fn decode(&self, mut st: usize) -> (usize, usize, usize, usize, usize, usize) {
        let a = st % self.m;
        st /= self.m;
        let b = st % self.m;
        st /= self.m;
        let size = st % self.sz;
        st /= self.sz;
        let sp = st % self.sp;
        st /= self.sp;
        let cs = st % self.cs;
        (a, b, size, sp, cs, st / self.cs)
    }
}

struct Prepared {
    layout: Layout,
    vecs: Vec<(usize, usize)>,
    colours: Vec<Option<u32>>,
    special: Vec<bool>,
    forced_pos: Option<usize>,
    p: usize,
    max_size: Option<usize>,
}

fn prepare(pool: &Pool, spec: &Search) -> Prepared {
    let p = pool.params.p as usize;
    let m = if spec.target == Target::Divisible { p } else { p * p };
    let sz = match spec.max_size {
        Some(k) => k + 1,
        None => 2,
    };
    let layout = Layout {
        m,
        sz,
        sp: if spec.need_special.is_some() { 2 } else { 1 },
        cs: if spec.diverse { p + 3 } else { 1 },
        fc: if spec.forced.is_some() { 2 } else { 1 },
    };
    let vecs = spec
        .candidates
        .iter()
        .map(|&id| {
            let (a, b) = pool.vector_at(id, spec.level);
            ((a as usize) % m, (b as usize) % m)
        })
        .collect();
    let colours = spec
        .candidates
        .iter()
        .map(|&id| {
            let v = pool.var(id);
            if v.is_exact(spec.level) {
                v.colour()
            } else {
                None
            }
        })
        .collect();
    let special = spec
        .candidates
        .iter()
        .map(|&id| spec.need_special.is_some_and(|mode| pool.var(id).is_special(mode)))
        .collect();
    let forced_pos = spec.forced.and_then(|f| spec.candidates.iter().position(|&c| c == f));
    Prepared { layout, vecs, colours, special, forced_pos, p, max_size: spec.max_size }
}

impl Prepared {
    fn step(&self, st: usize, i: usize) -> Option<usize> {
        let l = &self.layout;
        let (a, b, size, sp, cs, fc) = l.decode(st);
        let size = match self.max_size {
            Some(k) if size >= k => return None,
            Some(_) => size + 1,
            None => 1,
        };
        let (va, vb) = self.vecs[i];
        let na = (a + va) % l.m;
        let nb = (b + vb) % l.m;
        let nsp = if l.sp == 2 && self.special[i] { 1 } else { sp };
        let ncs = if l.cs > 1 {
            match self.colours[i] {
                None => cs,
                Some(c) => {
                    let c = c as usize;
                    if cs == 0 {
                        c + 1
                    } else if cs == self.p + 2 || cs == c + 1 {
                        cs
                    } else {
                        self.p + 2
                    }
                }
            }
        } else {
            cs
        };
        let nfc = if l.fc == 2 && self.forced_pos == Some(i) { 1 } else { fc };
        Some(l.encode(na, nb, size, nsp, ncs, nfc))
    }

    fn accept(&self, st: usize, target: Target) -> bool {
        let l = &self.layout;
        let (a, b, size, sp, cs, fc) = l.decode(st);
        if size == 0 || sp + 1 < l.sp || fc + 1 < l.fc {
            return false;
        }
        if l.cs > 1 && cs != self.p + 2 {
            return false;
        }
        let p = self.p;
        if a % p != 0 || b % p != 0 {
            return false;
        }
        match target {
            Target::Divisible => true,
            Target::ExactNext => a != 0 || b != 0,
            Target::NextColour(nu) | Target::NextNotColour(nu) => {
                if a == 0 && b == 0 {
                    return false;
                }
                let c = classify_mod_p2(p as i64, (a / p) as i64, (b / p) as i64).map(|c| c.0);
                match target {
                    Target::NextColour(_) => c == Some(nu),
                    _ => c != Some(nu),
                }
            }
        }
    }
}

/// Lexicographically smallest qualifying subset of the candidates (by
/// position in `candidates`), returned as variable ids.
pub fn find(pool: &Pool, spec: &Search) -> Option<Vec<VarId>> {
    let prep = prepare(pool, spec);
    if spec.forced.is_some() && prep.forced_pos.is_none() {
        return None;
    }
    let n_states = prep.layout.n_states();
    let start = 0;
    let idx = lex_smallest_subset(
        spec.candidates.len(),
        n_states,
        start,
        |st, i| prep.step(st, i),
        |st| prep.accept(st, spec.target),
    )?;
    Some(idx.into_iter().map(|i| spec.candidates[i]).collect())
}

/// Qualifying subset of minimal total cost, ties broken towards fewer members.
pub fn find_min_cost(pool: &Pool, spec: &Search, cost: &[u32]) -> Option<Vec<VarId>> {
    let prep = prepare(pool, spec);
    let n = spec.candidates.len();
    let ns = prep.layout.n_states();
    const INF: u64 = u64::MAX;
    let mut best = vec![INF; (n + 1) * ns];
    // parent[i+1][t] = previous state, high bit marks "item i taken"
    let mut parent = vec![u32::MAX; (n + 1) * ns];
    best[0] = 0;
    for i in 0..n {
        let (cur, next) = best.split_at_mut((i + 1) * ns);
        let cur = &cur[i * ns..];
        let next = &mut next[..ns];
        let par = &mut parent[(i + 1) * ns..(i + 2) * ns];
        for st in 0..ns {
            let c = cur[st];
            if c == INF {
                continue;
            }
            if c < next[st] {
                next[st] = c;
                par[st] = st as u32;
            }
            if let Some(t) = prep.step(st, i) {
                let nc = c + ((cost[i] as u64) << 16) + 1;
                if nc < next[t] {
                    next[t] = nc;
                    par[t] = st as u32 | 1 << 31;
                }
            }
        }
    }
    let last = &best[n * ns..];
    let (mut st, _) = (0..ns)
        .filter(|&s| last[s] != INF && prep.accept(s, spec.target))
        .map(|s| (s, last[s]))
        .min_by_key(|&(s, c)| (c, s))?;
    let mut chosen = Vec::new();
    for i in (0..n).rev() {
        let pr = parent[(i + 1) * ns + st];
        if pr >> 31 == 1 {
            chosen.push(spec.candidates[i]);
        }
        st = (pr & !(1 << 31)) as usize;
    }
    chosen.reverse();
    Some(chosen)
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
    fn divisible_and_diverse() {
        let pl = pool(&[(1, 0), (1, 0), (1, 0), (1, 0), (1, 0), (0, 1), (0, 4), (4, 0)]);
        let ids: Vec<usize> = (0..8).collect();
        let s = Search::new(0, &ids, Target::Divisible);
        assert_eq!(find(&pl, &s).unwrap(), vec![0, 1, 2, 3, 4]);
        let mut s = Search::new(0, &ids, Target::Divisible);
        s.diverse = true;
        assert_eq!(find(&pl, &s).unwrap(), vec![0, 1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn exact_next_colour() {
        // five copies of (1,0) sum to (5,0): level 1 colour 0
        let pl = pool(&[(1, 0), (1, 0), (1, 0), (1, 0), (1, 0), (24, 0)]);
        let ids: Vec<usize> = (0..6).collect();
        let got = find(&pl, &Search::new(0, &ids, Target::NextColour(0))).unwrap();
        assert_eq!(got, vec![0, 1, 2, 3, 4]);
        assert!(find(&pl, &Search::new(0, &ids, Target::NextColour(1))).is_none());
    }

    #[test]
    fn min_cost_prefers_cheap_members() {
        let pl = pool(&[(1, 0), (4, 0), (1, 0), (4, 0)]);
        let ids: Vec<usize> = (0..4).collect();
        let s = Search::new(0, &ids, Target::Divisible);
        let got = find_min_cost(&pl, &s, &[5, 5, 0, 0]).unwrap();
        assert_eq!(got, vec![2, 3]);
    }
}
