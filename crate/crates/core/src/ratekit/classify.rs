//! Empirical rate classification of a decreasing positive sequence from its
//! tail.

use serde::Serialize;

use crate::error::{Error, Result};

/// Ratios above this count as tending to 1.
pub const RATIO_ONE_CUT: f64 = 0.98;
/// Maximum spread of tail ratios for a linear verdict.
pub const LINEAR_SPREAD: f64 = 1e-3;
/// Allowed distance of difference ratios from 1 for a logarithmic verdict.
pub const LOG_D_TOL: f64 = 0.02;
/// Largest tail window, in samples.
pub const TAIL_CAP: usize = 10_000;
/// Minimum length unless the sequence is visibly superlinear.
pub const MIN_LEN: usize = 64;

const SUPERLINEAR_RATIO: f64 = 0.01;
const ORDER_RUN_RATIO: f64 = 0.1;
const ORDER_MAX_POINTS: usize = 6;
const DIAGNOSTIC_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateCategory {
    Finite,
    Superlinear,
    Linear,
    Sublinear,
    Logarithmic,
    Inconclusive,
}

impl RateCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            RateCategory::Finite => "finite",
            RateCategory::Superlinear => "superlinear",
            RateCategory::Linear => "linear",
            RateCategory::Sublinear => "sublinear",
            RateCategory::Logarithmic => "logarithmic",
            RateCategory::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Last ratios `x_{n+1}/x_n`.
    pub ratio_tail: Vec<f64>,
    /// Last difference ratios `(x_{n+1} - x_{n+2})/(x_n - x_{n+1})`.
    pub diff_ratio_tail: Vec<f64>,
    /// Positive terms used.
    pub samples: usize,
    /// Points entering the order regression (superlinear only).
    pub order_points: usize,
    pub low_sample_count: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub category: RateCategory,
    /// Order `q` from the regression of `ln ln(1/x_n)` on `n`; superlinear only.
    pub estimated_order: Option<f64>,
    /// Tail value of `x_{n+1}/x_n`.
    pub estimated_ratio_c: Option<f64>,
    /// `e` in `x_n ~ C n^{-e}`, from a log-log fit over the tail.
    pub estimated_exponent: Option<f64>,
    /// Tail mean of `x_n n^e`.
    pub estimated_constant: Option<f64>,
    /// Half-open index range `[start, end)` the tail statistics use.
    pub tail_window: (usize, usize),
    pub diagnostics: Diagnostics,
}

/// Least-squares slope of `y` on `x`.
pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

fn last_n(v: &[f64], n: usize) -> Vec<f64> {
    v[v.len().saturating_sub(n)..].to_vec()
}

/// Classify the convergence of `xs` to 0.
///
/// `xs` must be nonnegative and nonincreasing; an exact zero reports
/// `finite`. Sequences shorter than [`MIN_LEN`] are accepted only when their
/// last ratio is already below 0.01, since superlinear traces reach the
/// underflow floor after a few dozen terms.
pub fn classify_rate(xs: &[f64]) -> Result<RateReport> {
    if xs.len() < 4 {
        return Err(Error::Precondition(format!("need at least 4 terms, got {}", xs.len())));
    }
    if xs.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::Precondition("terms must be finite and nonnegative".into()));
    }
    if xs.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Precondition("sequence must be nonincreasing".into()));
    }
    let positive = xs.iter().take_while(|&&x| x > 0.0).count();
    let ratios: Vec<f64> = xs[..positive].windows(2).map(|w| w[1] / w[0]).collect();
    let diff_ratios: Vec<f64> = xs[..positive]
        .windows(3)
        .map(|w| (w[1] - w[2]) / (w[0] - w[1]))
        .collect();
    let diagnostics = |order_points: usize, low: bool| Diagnostics {
        ratio_tail: last_n(&ratios, DIAGNOSTIC_SAMPLES),
        diff_ratio_tail: last_n(&diff_ratios, DIAGNOSTIC_SAMPLES),
        samples: positive,
        order_points,
        low_sample_count: low,
    };

    if positive < xs.len() {
        return Ok(RateReport {
            category: RateCategory::Finite,
            estimated_order: None,
            estimated_ratio_c: Some(0.0),
            estimated_exponent: None,
            estimated_constant: None,
            tail_window: (positive, xs.len()),
            diagnostics: diagnostics(0, false),
        });
    }

    let n = xs.len();
    let last_ratio = *ratios.last().expect("at least three ratios");
    let superlinear_tail = last_ratio < SUPERLINEAR_RATIO
        && ratios[ratios.len() - 3..].windows(2).all(|w| w[1] <= w[0]);
    if superlinear_tail {
        return Ok(superlinear_report(xs, &ratios, diagnostics));
    }
    if n < MIN_LEN {
        return Err(Error::Precondition(format!(
            "need at least {MIN_LEN} terms for a non-superlinear tail, got {n}"
        )));
    }

    let tail_len = (n / 4).min(TAIL_CAP);
    let start = n - tail_len;
    let r_tail = &ratios[start - 1..];
    let d_tail = &diff_ratios[start - 2..];
    let r_min = r_tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let r_max = r_tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let r_mean = r_tail.iter().sum::<f64>() / r_tail.len() as f64;

    let mut report = RateReport {
        category: RateCategory::Inconclusive,
        estimated_order: None,
        estimated_ratio_c: Some(last_ratio),
        estimated_exponent: None,
        estimated_constant: None,
        tail_window: (start, n),
        diagnostics: diagnostics(0, false),
    };

    if r_max - r_min < LINEAR_SPREAD && (0.001..=RATIO_ONE_CUT).contains(&r_mean) {
        report.category = RateCategory::Linear;
        report.estimated_ratio_c = Some(r_mean);
        return Ok(report);
    }

    let rising = r_tail[r_tail.len() - 1] >= r_tail[0];
    if r_min > RATIO_ONE_CUT && rising {
        let log_like = d_tail.iter().all(|d| (d - 1.0).abs() <= LOG_D_TOL);
        report.category = if log_like {
            RateCategory::Logarithmic
        } else {
            RateCategory::Sublinear
        };
        let ln_n: Vec<f64> = (start..n).map(|i| (i as f64).ln()).collect();
        let ln_x: Vec<f64> = xs[start..].iter().map(|x| x.ln()).collect();
        let e = -ls_slope(&ln_n, &ln_x);
        let c = (start..n).map(|i| xs[i] * (i as f64).powf(e)).sum::<f64>() / tail_len as f64;
        report.estimated_exponent = Some(e);
        report.estimated_constant = Some(c);
    }
    Ok(report)
}

fn superlinear_report<D>(xs: &[f64], ratios: &[f64], diagnostics: D) -> RateReport
where
    D: Fn(usize, bool) -> Diagnostics,
{
    let n = xs.len();
    // trailing run of fast-contracting steps, then at most the last few points
    let mut run_start = n - 1;
    while run_start >= 1 && ratios[run_start - 1] < ORDER_RUN_RATIO {
        run_start -= 1;
    }
    let first = run_start.max(n.saturating_sub(ORDER_MAX_POINTS));
    let idx: Vec<usize> = (first..n).filter(|&i| xs[i] < 1.0).collect();
    let estimated_order = if idx.len() >= 3 {
        let t: Vec<f64> = idx.iter().map(|&i| i as f64).collect();
        let y: Vec<f64> = idx.iter().map(|&i| (-xs[i].ln()).ln()).collect();
        Some(ls_slope(&t, &y).exp())
    } else {
        None
    };
    RateReport {
        category: RateCategory::Superlinear,
        estimated_order: estimated_order.filter(|&q| q > 1.1),
        estimated_ratio_c: ratios.last().copied(),
        estimated_exponent: None,
        estimated_constant: None,
        tail_window: (first, n),
        diagnostics: diagnostics(idx.len(), idx.len() < 5),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_is_linear() {
        let xs: Vec<f64> = (0..500).map(|n| 3f64.powi(-n)).collect();
        let r = classify_rate(&xs).unwrap();
        assert_eq!(r.category, RateCategory::Linear);
        assert!((r.estimated_ratio_c.unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn double_exponential_is_superlinear() {
        let xs: Vec<f64> = (0..10).map(|n| 2f64.powi(-(1 << n))).collect();
        let r = classify_rate(&xs).unwrap();
        assert_eq!(r.category, RateCategory::Superlinear);
        assert!((r.estimated_order.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_sqrt_is_logarithmic() {
        let xs: Vec<f64> = (1..=100_000).map(|n| 1.0 / (n as f64).sqrt()).collect();
        let r = classify_rate(&xs).unwrap();
        assert_eq!(r.category, RateCategory::Logarithmic);
        assert!((r.estimated_exponent.unwrap() - 0.5).abs() < 0.01);
        assert!((r.estimated_constant.unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn zero_is_finite() {
        let r = classify_rate(&[2.5, 1.5, 0.5, 0.0]).unwrap();
        assert_eq!(r.category, RateCategory::Finite);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(classify_rate(&[1.0, 0.5]).is_err());
        assert!(classify_rate(&[1.0, 0.5, 0.6, 0.1]).is_err());
        assert!(classify_rate(&[1.0, 0.9, 0.8, 0.7]).is_err());
        assert!(classify_rate(&[1.0, -0.5, -0.6, -0.7]).is_err());
    }

    #[test]
    fn slope_of_line() {
        assert!((ls_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }
}
