//! Trace-level checks of specific bounds: the `n f(x_n)^2 -> 0` property of
//! alternating projections, the superlinear PPA majorant, and linear-rate
//! bounds for the proximal point algorithm.

use serde::Serialize;

use crate::drivers::{Algorithm, AnyTrace, ScalarTrace};
use crate::error::{Error, Result};
use crate::funlib::ConvexFunction;

use super::classify::ls_slope;

pub const GULER_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GulerReport {
    /// `n f(x_n)^2` for `n = 1..=N`.
    pub products: Vec<f64>,
    pub final_value: f64,
    /// Log-log slope of the products over the second half of the trace.
    pub tail_slope: f64,
    pub tail_decreasing: bool,
    pub threshold: f64,
    pub tends_to_zero: bool,
}

/// `n f(x_n)^2` along a MAP trace, with a verdict on whether it tends to 0.
pub fn guler_product<'a, F: ConvexFunction + ?Sized>(
    trace: impl Into<AnyTrace<'a>>,
    f: &F,
    threshold: f64,
) -> Result<GulerReport> {
    let trace = trace.into();
    if trace.algorithm() != Algorithm::Map {
        return Err(Error::Precondition("the product check applies to MAP traces only".into()));
    }
    if trace.function() != f.label() {
        return Err(Error::Precondition(format!(
            "trace was generated by `{}`, not `{}`",
            trace.function(),
            f.label()
        )));
    }
    let xs = trace.xs();
    if xs.len() < 8 {
        return Err(Error::Precondition(format!("need at least 8 terms, got {}", xs.len())));
    }
    let products: Vec<f64> = xs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, &x)| {
            let v = f.value(x).finite().unwrap_or(f64::INFINITY);
            n as f64 * v * v
        })
        .collect();
    let half = products.len() / 2;
    let tail = &products[half..];
    let tail_decreasing = tail.windows(2).all(|w| w[1] <= w[0]);
    let (ln_n, ln_p): (Vec<f64>, Vec<f64>) = tail
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| (((half + i + 1) as f64).ln(), p.ln()))
        .unzip();
    let tail_slope = if ln_n.len() >= 2 { ls_slope(&ln_n, &ln_p) } else { f64::NAN };
    let final_value = *products.last().expect("nonempty");
    Ok(GulerReport {
        final_value,
        tail_slope,
        tail_decreasing,
        threshold,
        tends_to_zero: tail_decreasing && final_value < threshold,
        products,
    })
}

/// `ln` of the PPA majorant `rho_n` for `f = |x|^q`, `1 < q < 2`, started at
/// `x_0 = rho0`.
pub fn ppa_superlinear_majorant_ln(q: f64, rho0: f64, n: u32) -> Result<f64> {
    if !(q > 1.0 && q < 2.0) {
        return Err(Error::InvalidParameter(format!("majorant needs 1 < q < 2, got {q}")));
    }
    if !(rho0 > 0.0 && rho0 <= 0.5) {
        return Err(Error::InvalidParameter(format!("majorant needs 0 < rho0 <= 0.5, got {rho0}")));
    }
    let a = (1.0 / (q - 1.0)).powi(n as i32);
    Ok(a * rho0.ln() - (a - 1.0) / (2.0 - q) * q.ln())
}

/// `rho_n = rho0^a (1/q)^{(a-1)/(2-q)}` with `a = (q-1)^{-n}`; underflows to 0
/// for large `n`, see [`ppa_superlinear_majorant_ln`].
pub fn ppa_superlinear_majorant(q: f64, rho0: f64, n: u32) -> Result<f64> {
    Ok(ppa_superlinear_majorant_ln(q, rho0, n)?.exp())
}

/// Linear-rate bounds for the proximal point iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinearBound {
    /// `alpha0 / sqrt(1 + alpha0^2 (1 + 2 lambda - 2 eps))`.
    Sharper { lambda: f64, alpha0: f64, eps: f64 },
    /// `alpha0 / sqrt(1 + alpha0^2)`.
    Rockafellar { alpha0: f64 },
}

impl LinearBound {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LinearBound::Sharper { lambda, alpha0, eps } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::InvalidParameter(format!("lambda must be in (0, inf), got {lambda}")));
                }
                let (lo, hi) = (0.5 / lambda, 1.0 / lambda);
                if !(alpha0 >= lo * (1.0 - 1e-12) && alpha0 <= hi * (1.0 + 1e-12)) {
                    return Err(Error::InvalidParameter(format!(
                        "alpha0 = {alpha0} outside [{lo}, {hi}]"
                    )));
                }
                if !(eps >= 0.0 && eps < lambda) {
                    return Err(Error::InvalidParameter(format!("eps must be in [0, lambda), got {eps}")));
                }
            }
            LinearBound::Rockafellar { alpha0 } => {
                if !(alpha0 > 0.0 && alpha0.is_finite()) {
                    return Err(Error::InvalidParameter(format!("alpha0 must be positive, got {alpha0}")));
                }
            }
        }
        Ok(())
    }

    pub fn ratio(&self) -> f64 {
        match *self {
            LinearBound::Sharper { lambda, alpha0, eps } => {
                alpha0 / (1.0 + alpha0 * alpha0 * (1.0 + 2.0 * lambda - 2.0 * eps)).sqrt()
            }
            LinearBound::Rockafellar { alpha0 } => alpha0 / (1.0 + alpha0 * alpha0).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearBoundReport {
    pub bound: LinearBound,
    pub ratio_bound: f64,
    pub max_observed_ratio: f64,
    /// Smallest `m` with `x_{n+1} <= bound * x_n` for every `n >= m`.
    pub first_index: Option<usize>,
}

pub fn linear_rate_bound_check(trace: &ScalarTrace, bound: LinearBound) -> Result<LinearBoundReport> {
    if trace.algorithm != Algorithm::Ppa {
        return Err(Error::Precondition("linear-rate bounds apply to PPA traces".into()));
    }
    bound.validate()?;
    let ratio_bound = bound.ratio();
    let holds = |w: &[f64]| w[1] <= ratio_bound * w[0] * (1.0 + 1e-12);
    let mut first_index = None;
    for (n, w) in trace.xs.windows(2).enumerate().rev() {
        if holds(w) {
            first_index = Some(n);
        } else {
            break;
        }
    }
    let max_observed_ratio = trace
        .xs
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    Ok(LinearBoundReport {
        bound,
        ratio_bound,
        max_observed_ratio,
        first_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drivers::{run_map, run_ppa};
    use crate::funlib::catalog_get;
    use crate::prox::ProxConfig;

    #[test]
    fn majorant_examples() {
        assert!((ppa_superlinear_majorant(1.5, 0.5, 0).unwrap() - 0.5).abs() < 1e-15);
        let v = ppa_superlinear_majorant(1.5, 0.5, 2).unwrap();
        assert!((v - 0.0625 * (2.0f64 / 3.0).powi(6)).abs() < 1e-15);
        assert!(ppa_superlinear_majorant(2.5, 0.5, 2).is_err());
        assert!(ppa_superlinear_majorant(1.5, 0.9, 2).is_err());
    }

    #[test]
    fn majorant_dominates_trace() {
        let f = catalog_get("power_q", &[1.5]).unwrap();
        let t = run_ppa(&f, 0.5, 20, &ProxConfig::default()).unwrap();
        for (n, &x) in t.xs.iter().enumerate().skip(1) {
            assert!(x.ln() < ppa_superlinear_majorant_ln(1.5, 0.5, n as u32).unwrap(), "n={n}");
        }
    }

    #[test]
    fn linear_bounds_on_square() {
        let f = catalog_get("power_q", &[2.0]).unwrap();
        let t = run_ppa(&f, 1.0, 200, &ProxConfig::default()).unwrap();
        let b = LinearBound::Sharper { lambda: 1.0, alpha0: 0.5, eps: 0.0 };
        let rep = linear_rate_bound_check(&t, b).unwrap();
        assert!((rep.ratio_bound - 1.0 / 7f64.sqrt()).abs() < 1e-15);
        assert_eq!(rep.first_index, Some(0));
        let rep = linear_rate_bound_check(&t, LinearBound::Rockafellar { alpha0: 0.5 }).unwrap();
        assert!((rep.ratio_bound - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(rep.first_index, Some(0));
        let b = LinearBound::Sharper { lambda: 10.0, alpha0: 0.05, eps: 0.0 };
        assert_eq!(linear_rate_bound_check(&t, b).unwrap().first_index, None);
        let b = LinearBound::Sharper { lambda: 10.0, alpha0: 0.5, eps: 0.0 };
        assert!(linear_rate_bound_check(&t, b).is_err());
    }

    #[test]
    fn guler_on_square_root_rate() {
        let f = catalog_get("power_p_scaled", &[2.0]).unwrap();
        let t = run_map(&f, 1.0, 10_000, &ProxConfig::default()).unwrap();
        let rep = guler_product(&t, &f, GULER_THRESHOLD).unwrap();
        assert!(rep.tends_to_zero);
        assert!((rep.final_value - 2.5e-5).abs() < 1e-6, "{}", rep.final_value);
        assert!((rep.tail_slope + 1.0).abs() < 0.05, "{}", rep.tail_slope);
        let t = run_ppa(&f, 1.0, 100, &ProxConfig::default()).unwrap();
        assert!(guler_product(&t, &f, GULER_THRESHOLD).is_err());
    }
}
