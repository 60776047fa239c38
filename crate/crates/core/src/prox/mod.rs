//! Proximal mappings of `t f` and projections onto `A = R x {0}` and
//! `B = epi f` in the plane.

mod root;

pub use root::solve_increasing;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funlib::ConvexFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxConfig {
    /// Residual bound `|phi(p) - x| <= abs_tol * max(1, |x|)` the result meets.
    pub abs_tol: f64,
    /// Relative bracket width at which bisection hands over to Newton.
    pub rel_tol: f64,
    pub max_bisections: usize,
    pub newton_polish_steps: usize,
}

impl Default for ProxConfig {
    fn default() -> Self {
        ProxConfig {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            max_bisections: 200,
            newton_polish_steps: 3,
        }
    }
}

impl ProxConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) || !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParameter("tolerances must be positive and finite".into()));
        }
        if self.max_bisections < 60 {
            return Err(Error::InvalidParameter(format!(
                "max_bisections must be at least 60, got {}",
                self.max_bisections
            )));
        }
        Ok(())
    }

    /// Copy with `rel_tol` tightened to at most `tol`.
    pub fn tightened(&self, tol: f64) -> Self {
        ProxConfig {
            rel_tol: self.rel_tol.min(tol),
            ..*self
        }
    }
}

/// A point `(x, r)` of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub r: f64,
}

impl PlanePoint {
    pub const ORIGIN: PlanePoint = PlanePoint { x: 0.0, r: 0.0 };

    pub fn new(x: f64, r: f64) -> Self {
        PlanePoint { x, r }
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.r * self.r
    }

    pub fn dist_sq(&self, other: &PlanePoint) -> f64 {
        let (dx, dr) = (self.x - other.x, self.r - other.r);
        dx * dx + dr * dr
    }
}

fn check_finite(what: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteInput(format!("{what} = {v}")))
    }
}

/// Largest abscissa the root-finder may probe; keeps `f'` finite at a
/// bounded domain's edge.
fn upper_bracket(a: f64, sup: f64) -> f64 {
    if sup.is_finite() {
        a.min(sup * (1.0 - 1e-12))
    } else {
        a
    }
}

/// The minimiser of `t f(y) + (x - y)^2 / 2`.
///
/// Uses the closed form when the function has one; otherwise see
/// [`prox_by_root`].
pub fn prox<F: ConvexFunction + ?Sized>(f: &F, t: f64, x: f64, cfg: &ProxConfig) -> Result<f64> {
    check_args(t, x)?;
    if let Some(p) = f.closed_form_prox(t, x) {
        return Ok(p);
    }
    prox_by_root(f, t, x, cfg)
}

fn check_args(t: f64, x: f64) -> Result<()> {
    check_finite("x", x)?;
    check_finite("t", t)?;
    if t <= 0.0 {
        return Err(Error::InvalidParameter(format!("prox step t must be positive, got {t}")));
    }
    Ok(())
}

/// Prox via the threshold test and root-finding on `y + t f'(y) = |x|`,
/// ignoring any closed form.
pub fn prox_by_root<F: ConvexFunction + ?Sized>(f: &F, t: f64, x: f64, cfg: &ProxConfig) -> Result<f64> {
    check_args(t, x)?;
    let a = x.abs();
    if a == 0.0 || a <= t * f.right_derivative_at_zero() {
        return Ok(0.0);
    }
    let dom = f.domain();
    if dom.hi == 0.0 {
        return Ok(0.0);
    }
    let hi = upper_bracket(a, dom.hi);
    let y = solve_increasing(
        |y| y + t * f.derivative(y),
        |y| 1.0 + t * f.second_derivative(y),
        a,
        0.0,
        hi,
        cfg,
    )?;
    Ok(y.copysign(x))
}

/// Nearest point of `epi f` to `pt`.
///
/// Points already in the epigraph are returned unchanged. Otherwise the result
/// is `(y, f(y))` with `y` solving `|x| = y + (f(y) - r) f'(y)` and
/// `0 <= y < |x|`, with `y = 0` exactly when `x = 0` or when `pt` lies in the
/// normal cone of a kink at the origin.
pub fn project_epigraph<F: ConvexFunction + ?Sized>(f: &F, pt: PlanePoint, cfg: &ProxConfig) -> Result<PlanePoint> {
    check_finite("x", pt.x)?;
    check_finite("r", pt.r)?;
    let dom = f.domain();
    let fx = f.value(pt.x).finite().ok_or(Error::OutsideDomain {
        x: pt.x,
        lo: dom.lo,
        hi: dom.hi,
    })?;
    if pt.r >= fx {
        return Ok(pt);
    }
    let a = pt.x.abs();
    let r = pt.r;
    if a == 0.0 || (r < 0.0 && a <= -r * f.right_derivative_at_zero()) {
        return Ok(PlanePoint::ORIGIN);
    }
    let value = |y: f64| f.value(y).finite().unwrap_or(f64::INFINITY);

    // On [y_r, |x|] we have f >= r, which makes the map increasing.
    let lo = if r > 0.0 {
        solve_increasing(value, |y| f.derivative(y), r, 0.0, a, cfg)?
    } else {
        0.0
    };
    let hi = upper_bracket(a, dom.hi).max(lo);
    let y = solve_increasing(
        |y| y + (value(y) - r) * f.derivative(y),
        |y| {
            let d = f.derivative(y);
            1.0 + d * d + (value(y) - r) * f.second_derivative(y)
        },
        a,
        lo,
        hi,
        cfg,
    )?;
    Ok(PlanePoint::new(y.copysign(pt.x), value(y)))
}

/// Projection onto the abscissa.
pub fn project_a(pt: PlanePoint) -> PlanePoint {
    PlanePoint::new(pt.x, 0.0)
}

/// Reflection through the abscissa.
pub fn reflect_a(pt: PlanePoint) -> PlanePoint {
    PlanePoint::new(pt.x, -pt.r)
}
