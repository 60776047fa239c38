//! Catalog of even scalar convex test functions with `f(0) = 0` and `f > 0`
//! elsewhere, together with the asymptotic metadata the rate predictors use.
//!
//! Every entry carries hand-coded first and second derivatives. Evaluation is
//! arranged to avoid cancellation near the origin (e.g. `cosh(x) - 1` is
//! computed as `2 sinh(x/2)^2`) because the interesting behaviour of the
//! algorithms lives at tiny `|x|`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// A value in `(-inf, +inf]`. `+inf` marks points outside the domain and is
/// never produced by floating overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PosInfinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::PosInfinity)
    }
}

/// Closed interval of the real line; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn symmetric(half_width: f64) -> Self {
        Interval {
            lo: -half_width,
            hi: half_width,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// The interface the prox engine and the drivers need from a convex function.
///
/// Implemented by catalog entries and by the composites `a f + b f^2 / 2`
/// that arise from alternating projections and Douglas-Rachford steps.
pub trait ConvexFunction: Sync {
    /// Name plus parameters, e.g. `power_p_scaled:1.5`.
    fn label(&self) -> String;
    fn domain(&self) -> Interval;
    fn value(&self, x: f64) -> ExtendedReal;
    /// Derivative on the domain interior away from kinks.
    fn derivative(&self, x: f64) -> f64;
    fn second_derivative(&self, x: f64) -> f64;
    /// `f'_+(0)`, possibly `+inf`.
    fn right_derivative_at_zero(&self) -> f64;
    /// Prox of `t f` at `x` when an exact formula is known.
    fn closed_form_prox(&self, _t: f64, _x: f64) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionKind {
    /// Indicator of `{0}`.
    IndicatorZero,
    Abs,
    /// `|x|^q`.
    PowerQ { q: f64 },
    /// `|x|^p / p`.
    PowerPScaled { p: f64 },
    /// `R - sqrt(R^2 - x^2)` on `[-R, R]`.
    Circle { radius: f64 },
    /// `exp(|x|) - |x| - 1`.
    ExpAbs,
    /// `cosh(x) - 1`.
    CoshShifted,
    /// `exp(-1/x^2)` on `[-sqrt(2/3), sqrt(2/3)]`.
    Flat,
}

/// Coarse PPA behaviour of `x_{n+1} = prox_f(x_n)` from a positive start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PpaCategory {
    Finite,
    Superlinear { order: f64 },
    Linear { rate: f64 },
    Sublinear,
    Logarithmic { exponent: f64, constant: f64 },
}

/// Analytic metadata attached to every catalog entry.
///
/// `map_*` describe the limit `f(x) f'(x) / x^q -> c_q`, `dra_*` the limit
/// `f'(x) / x^q -> c`. A `None` exponent with a `Some(0.0)` constant records
/// the degenerate case where the quotient vanishes for every exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryMeta {
    /// `liminf_{x -> 0+} f(x)/x^2`, may be `+inf`.
    pub lambda: f64,
    pub map_exponent_q: Option<f64>,
    pub map_constant_cq: Option<f64>,
    pub dra_exponent_q: Option<f64>,
    pub dra_constant_c: Option<f64>,
    pub ppa_category: Option<PpaCategory>,
    /// Lipschitz modulus of `(df)^{-1}` at 0; only known in closed form for `x^2`.
    pub alpha0: Option<f64>,
}

/// Rate of `x_n = x_{n+1} + r c x_{n+1}^s (1 + o(1))` for the power-law step
/// `f'(x) ~ c x^s`. Shared by the PPA metadata (`r = 1`) and the DRA predictor.
pub(crate) fn power_law_category(s: f64, c: f64, r: f64) -> PpaCategory {
    if s < 1.0 {
        PpaCategory::Superlinear { order: 1.0 / s }
    } else if s == 1.0 {
        PpaCategory::Linear {
            rate: 1.0 / (1.0 + r * c),
        }
    } else {
        let e = 1.0 / (s - 1.0);
        PpaCategory::Logarithmic {
            exponent: e,
            constant: ((s - 1.0) * r * c).powf(-e),
        }
    }
}

/// An immutable catalog entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarConvexFunction {
    kind: FunctionKind,
    domain: Interval,
}

pub const CATALOG_NAMES: [&str; 8] = [
    "indicator_zero",
    "abs",
    "power_q",
    "power_p_scaled",
    "circle",
    "exp_abs",
    "cosh_shifted",
    "flat",
];

fn flat_half_width() -> f64 {
    (2.0f64 / 3.0).sqrt()
}

fn expect_params(name: &str, params: &[f64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::InvalidParameter(format!(
            "`{name}` takes {n} parameter(s), got {}",
            params.len()
        )));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "`{name}` parameters must be finite"
        )));
    }
    Ok(())
}

/// Look up a catalog entry. `power_p` is accepted as a short alias of
/// `power_p_scaled`.
pub fn catalog_get(name: &str, params: &[f64]) -> Result<ScalarConvexFunction> {
    let kind = match name {
        "indicator_zero" => {
            expect_params(name, params, 0)?;
            FunctionKind::IndicatorZero
        }
        "abs" => {
            expect_params(name, params, 0)?;
            FunctionKind::Abs
        }
        "power_q" => {
            expect_params(name, params, 1)?;
            if params[0] <= 1.0 {
                return Err(Error::InvalidParameter(format!("power_q needs q > 1, got {}", params[0])));
            }
            FunctionKind::PowerQ { q: params[0] }
        }
        "power_p_scaled" | "power_p" => {
            expect_params(name, params, 1)?;
            if params[0] <= 1.0 {
                return Err(Error::InvalidParameter(format!("power_p_scaled needs p > 1, got {}", params[0])));
            }
            FunctionKind::PowerPScaled { p: params[0] }
        }
        "circle" => {
            expect_params(name, params, 1)?;
            if params[0] <= 0.0 {
                return Err(Error::InvalidParameter(format!("circle needs R > 0, got {}", params[0])));
            }
            FunctionKind::Circle { radius: params[0] }
        }
        "exp_abs" => {
            expect_params(name, params, 0)?;
            FunctionKind::ExpAbs
        }
        "cosh_shifted" => {
            expect_params(name, params, 0)?;
            FunctionKind::CoshShifted
        }
        "flat" => {
            expect_params(name, params, 0)?;
            FunctionKind::Flat
        }
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    Ok(ScalarConvexFunction::new(kind))
}

impl ScalarConvexFunction {
    pub fn new(kind: FunctionKind) -> Self {
        let domain = match kind {
            FunctionKind::IndicatorZero => Interval { lo: 0.0, hi: 0.0 },
            FunctionKind::Circle { radius } => Interval::symmetric(radius),
            FunctionKind::Flat => Interval::symmetric(flat_half_width()),
            _ => Interval::REAL_LINE,
        };
        ScalarConvexFunction { kind, domain }
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FunctionKind::IndicatorZero => "indicator_zero",
            FunctionKind::Abs => "abs",
            FunctionKind::PowerQ { .. } => "power_q",
            FunctionKind::PowerPScaled { .. } => "power_p_scaled",
            FunctionKind::Circle { .. } => "circle",
            FunctionKind::ExpAbs => "exp_abs",
            FunctionKind::CoshShifted => "cosh_shifted",
            FunctionKind::Flat => "flat",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self.kind {
            FunctionKind::PowerQ { q } => vec![q],
            FunctionKind::PowerPScaled { p } => vec![p],
            FunctionKind::Circle { radius } => vec![radius],
            _ => Vec::new(),
        }
    }

    /// `f` on the domain closure; callers guarantee `x` is inside.
    pub(crate) fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        match self.kind {
            FunctionKind::IndicatorZero => 0.0,
            FunctionKind::Abs => a,
            FunctionKind::PowerQ { q } => a.powf(q),
            FunctionKind::PowerPScaled { p } => a.powf(p) / p,
            FunctionKind::Circle { radius } => {
                let root = ((radius - a) * (radius + a)).max(0.0).sqrt();
                a * a / (radius + root)
            }
            FunctionKind::ExpAbs => {
                if a < 0.5 {
                    // sum_{k>=2} a^k / k!
                    let mut term = a * a / 2.0;
                    let mut sum = 0.0;
                    for k in 3..=26 {
                        sum += term;
                        term *= a / k as f64;
                    }
                    sum
                } else {
                    a.exp_m1() - a
                }
            }
            FunctionKind::CoshShifted => {
                let s = (0.5 * a).sinh();
                2.0 * s * s
            }
            FunctionKind::Flat => {
                if a == 0.0 {
                    0.0
                } else {
                    (-1.0 / (a * a)).exp()
                }
            }
        }
    }

    /// The subdifferential at the origin, `[-f'_+(0), f'_+(0)]`.
    pub fn subgradient_at_zero(&self) -> Interval {
        Interval::symmetric(self.right_derivative_at_zero())
    }

    /// `f''_+(0)` understood as `lim_{x -> 0+} f'(x)/x`, in `[0, +inf]`.
    pub fn second_right_derivative_at_zero(&self) -> Option<f64> {
        match self.kind {
            FunctionKind::IndicatorZero => None,
            FunctionKind::Abs => Some(f64::INFINITY),
            FunctionKind::PowerQ { q } => Some(piecewise_at_two(q, 2.0)),
            FunctionKind::PowerPScaled { p } => Some(piecewise_at_two(p, 1.0)),
            FunctionKind::Circle { radius } => Some(1.0 / radius),
            FunctionKind::ExpAbs | FunctionKind::CoshShifted => Some(1.0),
            FunctionKind::Flat => Some(0.0),
        }
    }

    pub fn has_closed_form_prox(&self) -> bool {
        self.closed_form_prox(1.0, 1.0).is_some()
    }

    /// `f^2 / 2`, whose PPA sequence coincides with the alternating-projection
    /// sequence for `epi f`.
    pub fn half_square(&self) -> Composite<'_> {
        Composite::new(self, 0.0, 1.0)
    }

    pub fn theory_meta(&self) -> TheoryMeta {
        theory_meta(self)
    }
}

/// `inf` below 2, `at_two` at 2, `0` above.
fn piecewise_at_two(exponent: f64, at_two: f64) -> f64 {
    if exponent < 2.0 {
        f64::INFINITY
    } else if exponent == 2.0 {
        at_two
    } else {
        0.0
    }
}

impl fmt::Display for ScalarConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        for (i, p) in self.params().iter().enumerate() {
            f.write_str(if i == 0 { ":" } else { "," })?;
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl ConvexFunction for ScalarConvexFunction {
    fn label(&self) -> String {
        self.to_string()
    }

    fn domain(&self) -> Interval {
        self.domain
    }

    fn value(&self, x: f64) -> ExtendedReal {
        if self.domain.contains(x) {
            ExtendedReal::Finite(self.eval(x))
        } else {
            ExtendedReal::PosInfinity
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        let a = x.abs();
        let sign = if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            return 0.0;
        };
        let d = match self.kind {
            FunctionKind::IndicatorZero => 0.0,
            FunctionKind::Abs => 1.0,
            FunctionKind::PowerQ { q } => q * a.powf(q - 1.0),
            FunctionKind::PowerPScaled { p } => a.powf(p - 1.0),
            FunctionKind::Circle { radius } => a / ((radius - a) * (radius + a)).max(0.0).sqrt(),
            FunctionKind::ExpAbs => a.exp_m1(),
            FunctionKind::CoshShifted => a.sinh(),
            // 2 a^-3 exp(-1/a^2), kept in log form so tiny `a` gives 0, not NaN
            FunctionKind::Flat => 2.0 * (-1.0 / (a * a) - 3.0 * a.ln()).exp(),
        };
        sign * d
    }

    fn second_derivative(&self, x: f64) -> f64 {
        let a = x.abs();
        match self.kind {
            FunctionKind::IndicatorZero | FunctionKind::Abs => 0.0,
            FunctionKind::PowerQ { q } => q * (q - 1.0) * a.powf(q - 2.0),
            FunctionKind::PowerPScaled { p } => (p - 1.0) * a.powf(p - 2.0),
            FunctionKind::Circle { radius } => {
                let s = (radius - a) * (radius + a);
                radius * radius / (s * s.sqrt())
            }
            FunctionKind::ExpAbs => a.exp(),
            FunctionKind::CoshShifted => a.cosh(),
            FunctionKind::Flat => {
                if a == 0.0 {
                    0.0
                } else {
                    (-1.0 / (a * a) - 6.0 * a.ln()).exp() * (4.0 - 6.0 * a * a)
                }
            }
        }
    }

    fn right_derivative_at_zero(&self) -> f64 {
        match self.kind {
            FunctionKind::IndicatorZero => f64::INFINITY,
            FunctionKind::Abs => 1.0,
            _ => 0.0,
        }
    }

    fn closed_form_prox(&self, t: f64, x: f64) -> Option<f64> {
        match self.kind {
            FunctionKind::IndicatorZero => Some(0.0),
            FunctionKind::Abs => Some(if x.abs() > t { x - t * x.signum() } else { 0.0 }),
            FunctionKind::PowerQ { q } if q == 2.0 => Some(x / (1.0 + 2.0 * t)),
            _ => None,
        }
    }
}

/// `h = linear * f + half_square * f^2 / 2` for a catalog entry `f`.
///
/// With `(0, 1)` this is the function whose PPA reproduces alternating
/// projections; with `(r, 1)` its prox is one Douglas-Rachford step from
/// ordinate `r`.
#[derive(Debug, Clone, Copy)]
pub struct Composite<'a> {
    base: &'a ScalarConvexFunction,
    linear: f64,
    half_square: f64,
}

impl<'a> Composite<'a> {
    pub fn new(base: &'a ScalarConvexFunction, linear: f64, half_square: f64) -> Self {
        Composite {
            base,
            linear,
            half_square,
        }
    }

    pub fn base(&self) -> &ScalarConvexFunction {
        self.base
    }

    fn is_indicator(&self) -> bool {
        matches!(self.base.kind, FunctionKind::IndicatorZero)
    }
}

impl ConvexFunction for Composite<'_> {
    fn label(&self) -> String {
        match (self.linear, self.half_square) {
            (l, h) if l == 0.0 && h == 1.0 => format!("half_square({})", self.base),
            (l, h) => format!("{l}*{}+{h}*half_square({})", self.base, self.base),
        }
    }

    fn domain(&self) -> Interval {
        self.base.domain
    }

    fn value(&self, x: f64) -> ExtendedReal {
        match self.base.value(x) {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(self.linear * v + 0.5 * self.half_square * v * v),
            ExtendedReal::PosInfinity => ExtendedReal::PosInfinity,
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        (self.linear + self.half_square * self.base.eval(x)) * self.base.derivative(x)
    }

    fn second_derivative(&self, x: f64) -> f64 {
        let d = self.base.derivative(x);
        (self.linear + self.half_square * self.base.eval(x)) * self.base.second_derivative(x)
            + self.half_square * d * d
    }

    fn right_derivative_at_zero(&self) -> f64 {
        if self.is_indicator() {
            f64::INFINITY
        } else if self.linear == 0.0 {
            0.0
        } else {
            self.linear * self.base.right_derivative_at_zero()
        }
    }

    fn closed_form_prox(&self, _t: f64, _x: f64) -> Option<f64> {
        self.is_indicator().then_some(0.0)
    }
}

/// Analytic metadata for a catalog entry. Absent values stay `None`.
pub fn theory_meta(f: &ScalarConvexFunction) -> TheoryMeta {
    let half = 0.5;
    let (lambda, map, dra, alpha0) = match f.kind {
        FunctionKind::IndicatorZero => (f64::INFINITY, (None, None), (None, None), None),
        FunctionKind::Abs => (f64::INFINITY, (Some(1.0), Some(1.0)), (Some(0.0), Some(1.0)), None),
        FunctionKind::PowerQ { q } => (
            piecewise_at_two(q, 1.0),
            (Some(2.0 * q - 1.0), Some(q)),
            (Some(q - 1.0), Some(q)),
            (q == 2.0).then_some(0.5),
        ),
        FunctionKind::PowerPScaled { p } => (
            piecewise_at_two(p, half),
            (Some(2.0 * p - 1.0), Some(1.0 / p)),
            (Some(p - 1.0), Some(1.0)),
            None,
        ),
        FunctionKind::Circle { radius } => (
            half / radius,
            (Some(3.0), Some(half / (radius * radius))),
            (Some(1.0), Some(1.0 / radius)),
            None,
        ),
        FunctionKind::ExpAbs | FunctionKind::CoshShifted => {
            (half, (Some(3.0), Some(half)), (Some(1.0), Some(1.0)), None)
        }
        FunctionKind::Flat => (0.0, (None, Some(0.0)), (None, Some(0.0)), None),
    };

    let ppa_category = if f.right_derivative_at_zero() > 0.0 {
        Some(PpaCategory::Finite)
    } else {
        match dra {
            (Some(s), Some(c)) => Some(power_law_category(s, c, 1.0)),
            (None, Some(c)) if c == 0.0 => Some(PpaCategory::Sublinear),
            _ => None,
        }
    };

    TheoryMeta {
        lambda,
        map_exponent_q: map.0,
        map_constant_cq: map.1,
        dra_exponent_q: dra.0,
        dra_constant_c: dra.1,
        ppa_category,
        alpha0,
    }
}
