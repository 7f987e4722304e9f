//! Frames: transformed pairs whose solutions pull back to the original pair.
//!
//! A frame variable `g` stands for a group of original variables; setting
//! `y_g` puts `x_i = p^e y_g` for every `(i, e)` in the group. The frame
//! forms are `(F, G)(y) = M (f, g)(x) / p^D` for an integer matrix `M`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::contraction::{Pool, VarId};
use crate::error::{Error, Result};
use crate::forms::{apply_transform, classify_all, FormPair, TransformRecord, TransformStep};
use crate::padic::{pow_p, valuation, Valuation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub pair: FormPair,
    pub groups: Vec<Vec<(usize, u32)>>,
    /// `(l1, l2, m1, m2)`.
    pub mix: [BigInt; 4],
    pub divisor: u32,
    pub s_original: usize,
    pub steps: Vec<String>,
}

impl Frame {
    pub fn identity(pair: &FormPair) -> Frame {
        Frame {
            pair: pair.clone(),
            groups: (0..pair.s()).map(|i| vec![(i, 0)]).collect(),
            mix: [BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one()],
            divisor: 0,
            s_original: pair.s(),
            steps: Vec::new(),
        }
    }

    pub fn from_record(pair: &FormPair, rec: &TransformRecord) -> Result<Frame> {
        let mut f = Frame::identity(pair);
        for st in &rec.steps {
            f.apply(st)?;
        }
        Ok(f)
    }

    /// Apply one transform step in frame coordinates.
    pub fn apply(&mut self, step: &TransformStep) -> Result<()> {
        self.pair = apply_transform(&self.pair, step)?;
        match step {
            TransformStep::Scale(e) => {
                for (g, &eg) in self.groups.iter_mut().zip(e) {
                    for leaf in g.iter_mut() {
                        leaf.1 += eg;
                    }
                }
            }
            TransformStep::Mix { l1, l2, m1, m2 } => {
                let [a, b, c, d] = &self.mix;
                self.mix = [l1 * a + l2 * c, l1 * b + l2 * d, m1 * a + m2 * c, m1 * b + m2 * d];
            }
            TransformStep::Divide(e) => self.divisor += e,
        }
        self.steps.push(step.describe());
        Ok(())
    }

    /// `x -> px` on frame levels below `j`, then divide by `p^j`: frame level
    /// `j` becomes level 0.
    pub fn shifted(&self, j: u32) -> Result<Frame> {
        let mut f = self.clone();
        if j == 0 {
            return Ok(f);
        }
        let infos = classify_all(&self.pair)?;
        let e: Vec<u32> = infos.iter().map(|v| (v.level < j) as u32).collect();
        f.apply(&TransformStep::Scale(e))?;
        f.apply(&TransformStep::Divide(j))?;
        Ok(f)
    }

    /// A frame whose variables are the given pool variables (each a group of
    /// its leaves, multipliers 1).
    pub fn contracted(&self, pool: &Pool, ids: &[VarId]) -> Result<Frame> {
        let mut groups = Vec::with_capacity(ids.len());
        let mut coeffs = Vec::with_capacity(ids.len());
        for &id in ids {
            let v = pool.var(id);
            if let crate::contraction::TraceNode::Node { children } = &v.trace {
                if children.iter().any(|(_, y)| !y.is_one()) {
                    return Err(Error::InvalidContraction("contracted frames need multipliers 1".into()));
                }
            }
            let mut g = Vec::new();
            for &leaf in &v.leaves {
                g.extend_from_slice(&self.groups[leaf]);
            }
            groups.push(g);
            coeffs.push(v.sum.clone());
        }
        let pair = FormPair::new(self.pair.params, coeffs)?;
        let mut steps = self.steps.clone();
        steps.push(format!("regroup into {} variables", ids.len()));
        Ok(Frame {
            pair,
            groups,
            mix: self.mix.clone(),
            divisor: self.divisor,
            s_original: self.s_original,
            steps,
        })
    }

    pub fn mix_det(&self) -> BigInt {
        let [a, b, c, d] = &self.mix;
        a * d - b * c
    }

    /// Original residual valuation is at least `frame valuation - loss()`.
    pub fn loss(&self) -> i64 {
        let v = match valuation(&self.mix_det(), self.pair.params.p) {
            Valuation::Finite(v) => v as i64,
            Valuation::Infinite => unreachable!("mix matrices are invertible"),
        };
        v - self.divisor as i64
    }

    /// Original assignment from a frame assignment.
    pub fn pull_back(&self, y: &[BigInt]) -> Vec<BigInt> {
        let p = self.pair.params.p;
        let mut x = vec![BigInt::zero(); self.s_original];
        for (g, yg) in self.groups.iter().zip(y) {
            if yg.is_zero() {
                continue;
            }
            for &(i, e) in g {
                x[i] = if e == 0 { yg.clone() } else { yg * pow_p(p, e) };
            }
        }
        x
    }

    /// Recompute the frame coefficients from the original pair.
    pub fn check(&self, original: &FormPair) -> Result<()> {
        let p = original.params.p;
        let k = original.params.k as u32;
        let d = pow_p(p, self.divisor);
        let [l1, l2, m1, m2] = &self.mix;
        for (g, grp) in self.groups.iter().enumerate() {
            let mut a = BigInt::zero();
            let mut b = BigInt::zero();
            for &(i, e) in grp {
                let f = pow_p(p, k * e);
                a += &original.a[i] * &f;
                b += &original.b[i] * &f;
            }
            let (na, ra) = (l1 * &a + l2 * &b).div_rem(&d);
            let (nb, rb) = (m1 * &a + m2 * &b).div_rem(&d);
            if !ra.is_zero() || !rb.is_zero() || na != self.pair.a[g] || nb != self.pair.b[g] {
                return Err(Error::Verification {
                    check: "frame",
                    detail: format!("frame variable {} does not match its group", g + 1),
                });
            }
        }
        Ok(())
    }
}
