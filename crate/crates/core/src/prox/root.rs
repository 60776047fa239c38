//! Safeguarded solver for `phi(y) = target` with `phi` nondecreasing.
//!
//! The bracket is shrunk in three phases: geometric descent towards zero when
//! the lower end is 0, geometric bisection while the bracket spans more than a
//! factor of two, then arithmetic bisection down to a relative width. A few
//! Newton steps polish the result; a step is kept only if it stays inside the
//! bracket and lowers the residual. Relative termination keeps roots accurate
//! to a few ulps even near `1e-300`, where an absolute tolerance would swamp
//! the answer.

use crate::error::{Error, Result};

use super::ProxConfig;

/// Smallest positive bracket point probed during descent; anything below is
/// reported as this value and treated as underflow by the drivers.
const DESCENT_FLOOR: f64 = f64::MIN_POSITIVE;

/// Solve `phi(y) = target` on `[lo, hi]`, assuming `phi` is nondecreasing there
/// and `phi(lo) <= target`. Returns `hi` when `phi(hi) <= target`.
pub fn solve_increasing<P, D>(phi: P, dphi: D, target: f64, lo: f64, hi: f64, cfg: &ProxConfig) -> Result<f64>
where
    P: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Bracket(format!("invalid bracket [{lo}, {hi}]")));
    }
    let f_hi = phi(hi);
    if f_hi.is_nan() {
        return Err(Error::Bracket(format!("phi({hi}) is NaN")));
    }
    if f_hi <= target {
        return Ok(hi);
    }
    let f_lo = phi(lo);
    if f_lo > target {
        return Err(Error::Bracket(format!(
            "phi({lo}) = {f_lo} exceeds target {target}"
        )));
    }
    if f_lo == target {
        return Ok(lo);
    }

    let (mut lo, mut hi) = (lo, hi);
    let mut budget = cfg.max_bisections;

    // Phase 1: find a positive lower end without spending ~1000 halvings.
    if lo == 0.0 {
        let mut shift = 1i32;
        loop {
            let m = (hi * 2f64.powi(-shift)).max(DESCENT_FLOOR);
            if m >= hi {
                return Ok(hi);
            }
            let v = phi(m);
            if v == target {
                return Ok(m);
            }
            if v < target {
                lo = m;
                break;
            }
            hi = m;
            if m == DESCENT_FLOOR {
                return Ok(m);
            }
            budget = budget.saturating_sub(1);
            if shift < 1 << 10 {
                shift *= 2;
            }
        }
    }

    // Phase 2: bisect in log space until lo and hi share a binade.
    while hi > 2.0 * lo && budget > 0 {
        let m = lo.sqrt() * hi.sqrt();
        if !(m > lo && m < hi) {
            break;
        }
        let v = phi(m);
        if v == target {
            return Ok(m);
        }
        if v < target {
            lo = m;
        } else {
            hi = m;
        }
        budget -= 1;
    }

    // Phase 3: plain bisection to relative width.
    while hi - lo > cfg.rel_tol * hi && budget > 0 {
        let m = lo + 0.5 * (hi - lo);
        if !(m > lo && m < hi) {
            break;
        }
        let v = phi(m);
        if v == target {
            return Ok(m);
        }
        if v < target {
            lo = m;
        } else {
            hi = m;
        }
        budget -= 1;
    }

    let res = |y: f64| (phi(y) - target).abs();
    let (mut y, mut r) = {
        let (rl, rh) = (res(lo), res(hi));
        if rl <= rh {
            (lo, rl)
        } else {
            (hi, rh)
        }
    };
    for _ in 0..cfg.newton_polish_steps {
        if r == 0.0 {
            break;
        }
        let d = dphi(y);
        if !(d.is_finite() && d > 0.0) {
            break;
        }
        let next = y - (phi(y) - target) / d;
        if !(next >= lo && next <= hi) {
            break;
        }
        let rn = res(next);
        if rn < r {
            y = next;
            r = rn;
        } else {
            break;
        }
    }
    Ok(y)
}
