//! Hensel lifting through the two variables of a certificate pair.
//!
//! With `M = (a_i x_i^k, a_j x_j^k; b_i x_i^k, b_j x_j^k)` and residual `R`,
//! the increment `w = -M^{-1} R` has valuation at least `tau + 1` once
//! `v(R) >= v(det M) + tau + 1`, and `x_i <- x_i u_i` with `u_i^k = 1 + w_i`
//! changes the residual by exactly `M w`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::forms::FormPair;
use crate::padic::{inv_mod, kth_root_of, pow_p, valuation, Residue, Valuation};

use super::verify::residuals_mod;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftReport {
    pub x: Vec<BigInt>,
    /// Residual valuation before the first step and after every step.
    pub valuations: Vec<u32>,
}

fn val(x: &BigInt, p: u64, cap: u32) -> u32 {
    match valuation(x, p) {
        Valuation::Infinite => cap,
        Valuation::Finite(v) => (v as u32).min(cap),
    }
}

/// Lift `x` until both residuals vanish modulo `p^target`, adjusting only
/// `x_i` and `x_j`.
pub fn lift_solution(pair: &FormPair, x: &[BigInt], (i, j): (usize, usize), target: u32) -> Result<LiftReport> {
    let params = pair.params;
    let p = params.p;
    let gamma = params.gamma;
    let kb = BigInt::from(params.k);
    let det_base = &pair.a[i] * &pair.b[j] - &pair.a[j] * &pair.b[i];
    let e = match (valuation(&det_base, p), valuation(&x[i], p), valuation(&x[j], p)) {
        (Valuation::Finite(d), Valuation::Finite(vi), Valuation::Finite(vj)) => (d + params.k * (vi + vj)) as u32,
        _ => {
            return Err(Error::Verification { check: "rank", detail: "certificate pair has a zero determinant".into() })
        }
    };
    // working modulus: enough room for the division by p^e
    let work = target + e + 1;
    let m = pow_p(p, work);
    let mut x: Vec<BigInt> = x.iter().map(|v| v.mod_floor(&m)).collect();
    let (ra, rb) = residuals_mod(pair, &x, work);
    let mut v = val(&ra, p, work).min(val(&rb, p, work));
    let mut valuations = vec![v.min(target)];
    if v < e + gamma && v < target {
        return Err(Error::Verification {
            check: "lift",
            detail: format!("residual valuation {v} below determinant valuation {e} + {gamma}"),
        });
    }
    while v < target {
        let (ra, rb) = residuals_mod(pair, &x, work);
        let xi = x[i].modpow(&kb, &m);
        let xj = x[j].modpow(&kb, &m);
        let (m11, m12) = (&pair.a[i] * &xi, &pair.a[j] * &xj);
        let (m21, m22) = (&pair.b[i] * &xi, &pair.b[j] * &xj);
        let det = &m11 * &m22 - &m12 * &m21;
        let pe = pow_p(p, e);
        let (dq, dr) = det.div_rem(&pe);
        debug_assert!(dr.is_zero());
        let dinv = inv_mod(&dq, &m).ok_or_else(|| Error::Verification {
            check: "lift",
            detail: "determinant lost its valuation".into(),
        })?;
        // adj(M) R
        let ta = &m22 * &ra - &m12 * &rb;
        let tb = -&m21 * &ra + &m11 * &rb;
        // one digit per step: the increment is truncated modulo p^(v+1)
        let step = v + 1;
        let ms = pow_p(p, step);
        let mut w = Vec::with_capacity(2);
        for t in [ta, tb] {
            let (q, r) = t.div_rem(&pe);
            if !r.is_zero() {
                return Err(Error::Verification { check: "lift", detail: "adjugate product not divisible".into() });
            }
            w.push((-(q * &dinv)).mod_floor(&ms));
        }
        for (idx, wv) in [i, j].into_iter().zip(w) {
            let target_res = Residue::new(BigInt::from(1) + wv, p, step);
            let u = kth_root_of(&target_res, &params, step)?;
            x[idx] = (&x[idx] * u.value).mod_floor(&m);
        }
        let (na, nb) = residuals_mod(pair, &x, work);
        let nv = val(&na, p, work).min(val(&nb, p, work));
        if nv <= v {
            return Err(Error::Verification {
                check: "lift",
                detail: format!("residual valuation did not increase ({v} -> {nv})"),
            });
        }
        valuations.push(nv.min(target));
        v = nv;
    }
    let mt = pow_p(p, target);
    for xv in x.iter_mut() {
        *xv = xv.mod_floor(&mt);
    }
    Ok(LiftReport { x, valuations })
}
