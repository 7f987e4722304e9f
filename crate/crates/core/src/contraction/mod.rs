//! Derived variables, the consumption pool, and the contraction procedures.
//!
//! Every unit `y` satisfies `y^k = 1 (mod p^(tau+1))`, so contractions here
//! use multiplier 1 and a derived variable carries the exact coefficient sums
//! of its leaves. Its level, colour and nuance are read off those sums.

pub mod batch;
pub mod search;
pub mod single;
pub mod tower;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::forms::{classify_vector, FormPair};
use crate::padic::{valuation, Params, Valuation};

pub type VarId = usize;

/// Which flag plays the role of the "special" variables in a recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SMode {
    Primary,
    Colourful,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceNode {
    Leaf { index: usize, multiplier: BigInt },
    Node { children: Vec<(VarId, BigInt)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedVariable {
    pub id: VarId,
    pub level: Valuation,
    pub sum: (BigInt, BigInt),
    /// Level vector modulo `p^2`; `(0, 0)` at infinite level.
    pub level_vector: (i64, i64),
    /// `(colour, nuance, corresponding integer)`; `None` at infinite level.
    pub class: Option<(u32, u32, i64)>,
    /// Bit `nu` set iff a level-0 leaf of colour `nu` is reachable.
    pub level0_colours: u64,
    pub leaves: Vec<usize>,
    pub trace: TraceNode,
    pub recipe: &'static str,
}

impl DerivedVariable {
    pub fn primary(&self) -> bool {
        self.level0_colours.count_ones() >= 2
    }

    pub fn colourful(&self) -> bool {
        self.level0_colours & !1 != 0
    }

    pub fn is_special(&self, mode: SMode) -> bool {
        match mode {
            SMode::Primary => self.primary(),
            SMode::Colourful => self.colourful(),
        }
    }

    pub fn colour(&self) -> Option<u32> {
        self.class.map(|c| c.0)
    }

    pub fn nuance(&self) -> Option<(u32, u32)> {
        self.class.map(|c| (c.0, c.1))
    }

    pub fn corresponding(&self) -> Option<i64> {
        self.class.map(|c| c.2)
    }

    pub fn exact_level(&self) -> Option<u32> {
        self.level.finite().map(|l| l as u32)
    }

    pub fn at_least(&self, l: u32) -> bool {
        self.level.at_least(l as u64)
    }

    pub fn is_exact(&self, l: u32) -> bool {
        self.exact_level() == Some(l)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub recipe: &'static str,
    pub consumed: Vec<usize>,
    pub produced: VarId,
    pub level: Valuation,
}

impl LogEntry {
    pub fn render(&self) -> String {
        let idx: Vec<String> = self.consumed.iter().map(|i| (i + 1).to_string()).collect();
        format!("{} -> level {} using [{}]", self.recipe, self.level, idx.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checkpoint {
    vars: usize,
    log: usize,
}

/// Original and derived variables of one frame, with consumption state.
#[derive(Debug, Clone)]
pub struct Pool {
    pub params: Params,
    pub s: usize,
    pub vars: Vec<DerivedVariable>,
    pub available: Vec<bool>,
    pub log: Vec<LogEntry>,
}

fn make_var(
    params: &Params,
    id: VarId,
    sum: (BigInt, BigInt),
    level0_colours: u64,
    leaves: Vec<usize>,
    trace: TraceNode,
    recipe: &'static str,
) -> DerivedVariable {
    let p = params.p;
    let level = valuation(&sum.0, p).min(valuation(&sum.1, p));
    let (level_vector, class) = match level {
        Valuation::Infinite => ((0, 0), None),
        Valuation::Finite(_) => {
            let info = classify_vector(params, &sum.0, &sum.1, id).expect("nonzero sum");
            let p2 = (p * p) as i64;
            let a = mod_small(&info.level_vector.0, p2);
            let b = mod_small(&info.level_vector.1, p2);
            ((a, b), Some((info.colour, info.nuance, info.corresponding)))
        }
    };
    DerivedVariable { id, level, sum, level_vector, class, level0_colours, leaves, trace, recipe }
}

pub(crate) fn mod_small(x: &BigInt, m: i64) -> i64 {
    use num_integer::Integer;
    use num_traits::ToPrimitive;
    x.mod_floor(&BigInt::from(m)).to_i64().unwrap()
}

impl Pool {
    pub fn new(pair: &FormPair) -> Result<Pool> {
        let params = pair.params;
        let mut vars = Vec::with_capacity(pair.s());
        for i in 0..pair.s() {
            let sum = (pair.a[i].clone(), pair.b[i].clone());
            if sum.0.is_zero() && sum.1.is_zero() {
                return Err(Error::Degenerate(format!("variable {} has coefficients (0, 0)", i + 1)));
            }
            let mut v = make_var(
                &params,
                i,
                sum,
                0,
                vec![i],
                TraceNode::Leaf { index: i, multiplier: BigInt::one() },
                "original",
            );
            if v.is_exact(0) {
                v.level0_colours = 1u64 << v.colour().unwrap();
            }
            vars.push(v);
        }
        Ok(Pool { params, s: pair.s(), available: vec![true; vars.len()], vars, log: Vec::new() })
    }

    pub fn var(&self, id: VarId) -> &DerivedVariable {
        &self.vars[id]
    }

    pub fn is_available(&self, id: VarId) -> bool {
        self.available[id]
    }

    /// Available variables satisfying `pred`, in id order.
    pub fn select(&self, pred: impl Fn(&DerivedVariable) -> bool) -> Vec<VarId> {
        self.vars.iter().filter(|v| self.available[v.id] && pred(v)).map(|v| v.id).collect()
    }

    pub fn exact(&self, l: u32) -> Vec<VarId> {
        self.select(|v| v.is_exact(l))
    }

    pub fn exact_colour(&self, l: u32, nu: u32) -> Vec<VarId> {
        self.select(|v| v.is_exact(l) && v.colour() == Some(nu))
    }

    /// Level-`l` vector of `id` modulo `p^2` (zero when its level exceeds `l + 1`).
    pub fn vector_at(&self, id: VarId, l: u32) -> (i64, i64) {
        let v = &self.vars[id];
        let p = self.params.p as i64;
        let p2 = p * p;
        match v.level {
            Valuation::Infinite => (0, 0),
            Valuation::Finite(h) => {
                let h = h as u32;
                assert!(h >= l, "variable below the working level");
                match h - l {
                    0 => v.level_vector,
                    1 => ((v.level_vector.0 * p) % p2, (v.level_vector.1 * p) % p2),
                    _ => (0, 0),
                }
            }
        }
    }

    /// Contract `members` (unit multipliers 1), which must reach a level
    /// above `from_level`.
    pub fn contract(&mut self, members: &[VarId], from_level: u32, recipe: &'static str) -> Result<VarId> {
        let ones = vec![BigInt::one(); members.len()];
        self.contract_with(members, &ones, from_level, recipe)
    }

    /// General contraction with unit multipliers `y_j`; the exact sums use
    /// `y_j^k`.
    pub fn contract_with(
        &mut self,
        members: &[VarId],
        multipliers: &[BigInt],
        from_level: u32,
        recipe: &'static str,
    ) -> Result<VarId> {
        if members.is_empty() || members.len() != multipliers.len() {
            return Err(Error::InvalidContraction("empty member set or multiplier mismatch".into()));
        }
        let p = self.params.p;
        let pb = BigInt::from(p);
        let mut seen = std::collections::HashSet::new();
        for &m in members {
            if !seen.insert(m) {
                return Err(Error::InvalidContraction(format!("variable {m} listed twice")));
            }
            if m >= self.vars.len() || !self.available[m] {
                return Err(Error::InvalidContraction(format!("variable {m} not available")));
            }
            if !self.vars[m].at_least(from_level) {
                return Err(Error::InvalidContraction(format!("variable {m} below level {from_level}")));
            }
        }
        if multipliers.iter().any(|y| (y % &pb).is_zero()) {
            return Err(Error::InvalidContraction("multipliers must be units".into()));
        }
        let mut a = BigInt::zero();
        let mut b = BigInt::zero();
        let mut mask = 0u64;
        let mut leaves = Vec::new();
        let mut children = Vec::with_capacity(members.len());
        for (&m, y) in members.iter().zip(multipliers) {
            let v = &self.vars[m];
            if y.is_one() {
                a += &v.sum.0;
                b += &v.sum.1;
            } else {
                let yk = num_traits::pow(y.clone(), self.params.k as usize);
                a += &v.sum.0 * &yk;
                b += &v.sum.1 * &yk;
            }
            mask |= v.level0_colours;
            leaves.extend_from_slice(&v.leaves);
            children.push((m, y.clone()));
        }
        leaves.sort_unstable();
        let id = self.vars.len();
        let var = make_var(&self.params, id, (a, b), mask, leaves, TraceNode::Node { children }, recipe);
        if !var.at_least(from_level + 1) {
            return Err(Error::InvalidContraction(format!(
                "{recipe}: sums reach level {} only, need {}",
                var.level,
                from_level + 1
            )));
        }
        for &m in members {
            self.available[m] = false;
        }
        self.log.push(LogEntry { recipe, consumed: var.leaves.clone(), produced: id, level: var.level });
        self.vars.push(var);
        self.available.push(true);
        Ok(id)
    }

    /// Assignment over the `s` frame variables: product of multipliers along
    /// the trace for each leaf, zero elsewhere.
    pub fn expand(&self, terminals: &[VarId]) -> Result<Vec<BigInt>> {
        let mut x = vec![BigInt::zero(); self.s];
        let mut stack: Vec<(VarId, BigInt)> = terminals.iter().map(|&t| (t, BigInt::one())).collect();
        while let Some((id, mult)) = stack.pop() {
            match &self.vars[id].trace {
                TraceNode::Leaf { index, multiplier } => {
                    if !x[*index].is_zero() {
                        return Err(Error::InvalidContraction(format!("leaf {} reached twice", index + 1)));
                    }
                    x[*index] = mult * multiplier;
                }
                TraceNode::Node { children } => {
                    for (c, y) in children {
                        stack.push((*c, &mult * y));
                    }
                }
            }
        }
        Ok(x)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint { vars: self.vars.len(), log: self.log.len() }
    }

    /// Undo every contraction made after `cp`.
    pub fn rollback(&mut self, cp: Checkpoint) {
        for v in self.vars.drain(cp.vars..) {
            if let TraceNode::Node { children } = v.trace {
                for (c, _) in children {
                    if c < cp.vars {
                        self.available[c] = true;
                    }
                }
            }
        }
        self.available.truncate(cp.vars);
        self.log.truncate(cp.log);
    }

    /// Run `f`, undoing its contractions if it fails.
    pub fn attempt<T>(&mut self, f: impl FnOnce(&mut Pool) -> Result<T>) -> Result<T> {
        let cp = self.checkpoint();
        let r = f(self);
        if r.is_err() {
            self.rollback(cp);
        }
        r
    }

    pub fn log_lines(&self) -> Vec<String> {
        self.log.iter().map(|e| e.render()).collect()
    }
}

/// Recompute the sums of a derived variable from the frame coefficients and
/// compare with the stored ones.
pub fn verify_derived(pair: &FormPair, pool: &Pool, id: VarId) -> Result<()> {
    let x = pool.expand(&[id])?;
    let k = pair.params.k as usize;
    let mut a = BigInt::zero();
    let mut b = BigInt::zero();
    for (i, xi) in x.iter().enumerate() {
        if !xi.is_zero() {
            let xk = num_traits::pow(xi.clone(), k);
            a += &pair.a[i] * &xk;
            b += &pair.b[i] * &xk;
        }
    }
    let v = pool.var(id);
    if (a, b) != v.sum {
        return Err(Error::Verification { check: "derived-sum", detail: format!("variable {id}") });
    }
    let mask = v.leaves.iter().fold(0u64, |acc, &i| acc | pool.var(i).level0_colours);
    if mask != v.level0_colours {
        return Err(Error::Verification { check: "derived-flags", detail: format!("variable {id}") });
    }
    Ok(())
}
