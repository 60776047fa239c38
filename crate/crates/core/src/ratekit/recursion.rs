//! Sequence tools for recursions `b_{n+1} = b_n - d_n g(b_n)` with
//! `g(x) = x^q`: the transform `H` (an antiderivative of `-1/g`), Stolz-Cesàro
//! bounds, and the two-sided and envelope inequalities that follow from them.

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative slack allowed in every inequality checked here.
pub const CHAIN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecursionModel {
    pub q: f64,
}

impl RecursionModel {
    pub fn new(q: f64) -> Result<Self> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::InvalidParameter(format!("recursion exponent q must be >= 1, got {q}")));
        }
        Ok(RecursionModel { q })
    }

    pub fn g(&self, x: f64) -> f64 {
        x.powf(self.q)
    }

    /// `x^{1-q}/(q-1)`, or `-ln x` when `q = 1`.
    pub fn h(&self, x: f64) -> f64 {
        if self.q == 1.0 {
            -x.ln()
        } else {
            x.powf(1.0 - self.q) / (self.q - 1.0)
        }
    }

    pub fn h_inv(&self, t: f64) -> f64 {
        if self.q == 1.0 {
            (-t).exp()
        } else {
            ((self.q - 1.0) * t).powf(-1.0 / (self.q - 1.0))
        }
    }

    /// `H(to) - H(from)` without cancellation when `to` is close to `from`.
    pub fn h_increment(&self, from: f64, to: f64) -> f64 {
        let log_ratio = ((to - from) / from).ln_1p();
        if self.q == 1.0 {
            -log_ratio
        } else {
            self.h(from) * ((1.0 - self.q) * log_ratio).exp_m1()
        }
    }
}

pub fn make_recursion_model(q: f64) -> Result<RecursionModel> {
    RecursionModel::new(q)
}

/// Tail estimates of the four quantities in the Stolz-Cesàro chain
/// `liminf da/db <= liminf a/b <= limsup a/b <= limsup da/db`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StolzBounds {
    pub liminf_diff: f64,
    pub liminf_ratio: f64,
    pub limsup_ratio: f64,
    pub limsup_diff: f64,
    /// First index of the tail window.
    pub tail_start: usize,
}

/// Estimates over the second half of the window.
///
/// The ratio `a_n/b_n` is measured relative to the tail start `m`, as
/// `(a_n - a_m)/(b_n - b_m)` over the last quarter of the window: it has the
/// same limit and, being a mediant of the difference quotients, satisfies the
/// chain exactly on a finite window.
pub fn stolz_bounds(a: &[f64], b: &[f64]) -> Result<StolzBounds> {
    if a.len() != b.len() {
        return Err(Error::Precondition(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    if a.len() < 32 {
        return Err(Error::Precondition(format!("need at least 32 terms, got {}", a.len())));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("sequence contains non-finite values".into()));
    }
    let increasing = b.windows(2).all(|w| w[1] > w[0]);
    let decreasing = b.windows(2).all(|w| w[1] < w[0]);
    if !increasing && !decreasing {
        return Err(Error::Precondition("b must be strictly monotone".into()));
    }
    let m = a.len() / 2;
    let mut bounds = StolzBounds {
        liminf_diff: f64::INFINITY,
        liminf_ratio: f64::INFINITY,
        limsup_ratio: f64::NEG_INFINITY,
        limsup_diff: f64::NEG_INFINITY,
        tail_start: m,
    };
    let ratio_start = m + (a.len() - m) / 2;
    for n in m..a.len() - 1 {
        let d = (a[n + 1] - a[n]) / (b[n + 1] - b[n]);
        bounds.liminf_diff = bounds.liminf_diff.min(d);
        bounds.limsup_diff = bounds.limsup_diff.max(d);
        if n + 1 >= ratio_start {
            let r = (a[n + 1] - a[m]) / (b[n + 1] - b[m]);
            bounds.liminf_ratio = bounds.liminf_ratio.min(r);
            bounds.limsup_ratio = bounds.limsup_ratio.max(r);
        }
    }
    let chain = [
        bounds.liminf_diff,
        bounds.liminf_ratio,
        bounds.limsup_ratio,
        bounds.limsup_diff,
    ];
    for w in chain.windows(2) {
        if w[0] > w[1] + CHAIN_SLACK * w[0].abs().max(w[1].abs()).max(1.0) {
            return Err(Error::Precondition(format!("Stolz chain violated: {chain:?}")));
        }
    }
    Ok(bounds)
}

/// How the step sizes are recovered from the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SandwichForm {
    /// `b_{n+1} = b_n - d_n g(b_n)`.
    Forward,
    /// `x_n = x_{n+1} + d_n g(x_{n+1})`.
    Backward,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub form: SandwichForm,
    /// Largest relative excess over either side of the inequality, clamped at 0.
    pub max_violation: f64,
    /// Number of indices whose excess is above [`CHAIN_SLACK`].
    pub violations: usize,
    /// `H(b_N)/N` at the last index.
    pub h_over_n: f64,
    /// Mean of `d_n` over the last quarter.
    pub tail_delta: f64,
}

/// Checks the per-step bounds on `H(b_{n+1}) - H(b_n)` implied by the
/// recursion, with `d_n` read off the sequence itself.
pub fn sandwich_check(beta: &[f64], model: &RecursionModel, form: SandwichForm) -> Result<SandwichReport> {
    if beta.len() < 2 {
        return Err(Error::Precondition("need at least two terms".into()));
    }
    if beta.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
        return Err(Error::Precondition("sequence must be positive and finite".into()));
    }
    if beta.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Precondition("sequence must be strictly decreasing".into()));
    }
    let q = model.q;
    let mut max_violation = 0.0f64;
    let mut violations = 0;
    let mut deltas = Vec::with_capacity(beta.len() - 1);
    for w in beta.windows(2) {
        let (cur, next) = (w[0], w[1]);
        let step = cur - next;
        let g_ratio = (cur / next).powf(q);
        let dh = model.h_increment(cur, next);
        let (lower, upper, delta) = match form {
            SandwichForm::Forward => {
                let d = step / model.g(cur);
                (d, d * g_ratio, d)
            }
            SandwichForm::Backward => {
                let d = step / model.g(next);
                (d / g_ratio, d, d)
            }
        };
        deltas.push(delta);
        let excess = ((lower - dh) / dh.abs()).max((dh - upper) / dh.abs()).max(0.0);
        if excess > CHAIN_SLACK {
            violations += 1;
        }
        max_violation = max_violation.max(excess);
    }
    let n = beta.len() - 1;
    let tail = &deltas[deltas.len() - (deltas.len() / 4).max(1)..];
    Ok(SandwichReport {
        form,
        max_violation,
        violations,
        h_over_n: model.h(beta[n]) / n as f64,
        tail_delta: tail.iter().sum::<f64>() / tail.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeSide {
    Upper,
    Lower,
}

/// The envelope `H^{-1}(n s)` written out explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeForm {
    /// `constant / n^exponent`.
    Power { constant: f64, exponent: f64 },
    /// `gamma^n`.
    Geometric { gamma: f64 },
}

impl EnvelopeForm {
    pub fn eval(&self, n: usize) -> f64 {
        match *self {
            EnvelopeForm::Power { constant, exponent } => constant * (n as f64).powf(-exponent),
            EnvelopeForm::Geometric { gamma } => gamma.powi(n as i32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub side: EnvelopeSide,
    /// Slope `rho - eps` (upper) or `rho + eps` (lower) inside `H^{-1}`.
    pub slope: f64,
    pub form: EnvelopeForm,
    /// Smallest `m` with the envelope holding for every `n` in `[m, len)`.
    pub first_index: Option<usize>,
}

/// `b_n <= H^{-1}(n (rho - eps))` (upper) or `b_n >= H^{-1}(n (rho + eps))`
/// (lower) from some index on.
pub fn envelope_check(beta: &[f64], rho: f64, q: f64, side: EnvelopeSide, eps: f64) -> Result<EnvelopeReport> {
    let model = RecursionModel::new(q)?;
    if !(eps > 0.0) || !eps.is_finite() || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!("need finite rho and eps > 0, got rho={rho}, eps={eps}")));
    }
    let slope = match side {
        EnvelopeSide::Upper => {
            if eps >= rho {
                return Err(Error::InvalidParameter(format!("upper envelope needs 0 < eps < rho, got eps={eps}, rho={rho}")));
            }
            rho - eps
        }
        EnvelopeSide::Lower => rho + eps,
    };
    let form = if q == 1.0 {
        EnvelopeForm::Geometric { gamma: (-slope).exp() }
    } else {
        EnvelopeForm::Power {
            constant: ((q - 1.0) * slope).powf(-1.0 / (q - 1.0)),
            exponent: 1.0 / (q - 1.0),
        }
    };
    let holds = |n: usize| {
        let e = model.h_inv(n as f64 * slope);
        let b = beta[n];
        match side {
            EnvelopeSide::Upper => b <= e * (1.0 + CHAIN_SLACK),
            EnvelopeSide::Lower => b >= e * (1.0 - CHAIN_SLACK),
        }
    };
    let mut first_index = None;
    for n in (0..beta.len()).rev() {
        if holds(n) {
            first_index = Some(n);
        } else {
            break;
        }
    }
    Ok(EnvelopeReport {
        side,
        slope,
        form,
        first_index,
    })
}
