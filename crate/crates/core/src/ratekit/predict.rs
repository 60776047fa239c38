//! Theoretical rate predictions for each (algorithm, function) pair, and the
//! numerical estimate of the Douglas-Rachford ordinate limit `r_inf`.

use serde::Serialize;

use crate::drivers::{Algorithm, PlaneTrace, StopReason};
use crate::error::{Error, Result};
use crate::funlib::{ConvexFunction, ScalarConvexFunction, TheoryMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictedCategory {
    Finite,
    Superlinear,
    Linear,
    Sublinear,
    Logarithmic,
}

impl PredictedCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            PredictedCategory::Finite => "finite",
            PredictedCategory::Superlinear => "superlinear",
            PredictedCategory::Linear => "linear",
            PredictedCategory::Sublinear => "sublinear",
            PredictedCategory::Logarithmic => "logarithmic",
        }
    }
}

/// A rate or constant that depends on `r_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RinfDependence {
    /// Linear rate `1/(1 + r_inf * curvature)`.
    LinearRate { curvature: f64 },
    /// Constant `((s - 1) r_inf c)^{-1/(s-1)}` of `x_n ~ C n^{-1/(s-1)}`.
    PowerConstant { s: f64, c: f64 },
}

impl RinfDependence {
    pub fn eval(&self, r_inf: f64) -> f64 {
        match *self {
            RinfDependence::LinearRate { curvature } => 1.0 / (1.0 + r_inf * curvature),
            RinfDependence::PowerConstant { s, c } => ((s - 1.0) * r_inf * c).powf(-1.0 / (s - 1.0)),
        }
    }

    pub fn formula(&self) -> String {
        match *self {
            RinfDependence::LinearRate { curvature } => format!("1/(1 + r_inf*{curvature})"),
            RinfDependence::PowerConstant { s, c } => {
                format!("(({} * r_inf * {c}))^(-1/{})", s - 1.0, s - 1.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePrediction {
    pub algorithm: Algorithm,
    pub function: String,
    pub category: Option<PredictedCategory>,
    /// Order of superlinear convergence.
    pub order: Option<f64>,
    /// Limit of `x_{n+1}/x_n` for linear convergence.
    pub rate: Option<f64>,
    /// `e` in `x_n ~ C n^{-e}`.
    pub exponent: Option<f64>,
    /// `C` in `x_n ~ C n^{-e}`.
    pub constant: Option<f64>,
    pub r_inf: Option<f64>,
    pub r_inf_dependence: Option<RinfDependence>,
    pub constant_formula: Option<String>,
    pub source: &'static str,
    pub available: bool,
    pub note: Option<String>,
}

impl RatePrediction {
    fn empty(algorithm: Algorithm, f: &ScalarConvexFunction, source: &'static str) -> Self {
        RatePrediction {
            algorithm,
            function: f.label(),
            category: None,
            order: None,
            rate: None,
            exponent: None,
            constant: None,
            r_inf: None,
            r_inf_dependence: None,
            constant_formula: None,
            source,
            available: true,
            note: None,
        }
    }

    fn unavailable(mut self, note: impl Into<String>) -> Self {
        self.available = false;
        self.note = Some(note.into());
        self
    }
}

/// Rate of `x_n = x_{n+1} + r c x_{n+1}^s (1 + o(1))`, with `r` possibly unknown.
fn apply_power_law(mut p: RatePrediction, s: f64, c: f64, r: Option<f64>, r_symbolic: bool) -> RatePrediction {
    if s < 1.0 {
        p.category = Some(PredictedCategory::Superlinear);
        p.order = Some(1.0 / s);
        return p;
    }
    let dep = if s == 1.0 {
        p.category = Some(PredictedCategory::Linear);
        RinfDependence::LinearRate { curvature: c }
    } else {
        p.category = Some(PredictedCategory::Logarithmic);
        p.exponent = Some(1.0 / (s - 1.0));
        RinfDependence::PowerConstant { s, c }
    };
    if r_symbolic {
        p.r_inf_dependence = Some(dep);
        p.constant_formula = Some(dep.formula());
    }
    if let Some(r) = r {
        let v = dep.eval(r);
        match dep {
            RinfDependence::LinearRate { .. } => p.rate = Some(v),
            RinfDependence::PowerConstant { .. } => p.constant = Some(v),
        }
    } else {
        p.note = Some("constant needs an r_inf estimate".into());
    }
    p
}

/// The theory-side rate for `algorithm` on `f`.
///
/// DRA rates for `f''_+(0) < inf` depend on `r_inf`; pass an estimate to get
/// numbers, otherwise only the category and the formula are filled in.
pub fn predict(algorithm: Algorithm, f: &ScalarConvexFunction, r_inf_estimate: Option<f64>) -> Result<RatePrediction> {
    if let Some(r) = r_inf_estimate {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("r_inf must be positive and finite, got {r}")));
        }
    }
    let meta: TheoryMeta = f.theory_meta();
    let kink = f.right_derivative_at_zero() > 0.0;
    let pred = match algorithm {
        Algorithm::Ppa => {
            let p = RatePrediction::empty(algorithm, f, "ppa: finite iff f'(0+) > 0, else power law of f'");
            if kink {
                RatePrediction {
                    category: Some(PredictedCategory::Finite),
                    ..p
                }
            } else {
                match (meta.dra_exponent_q, meta.dra_constant_c) {
                    (Some(s), Some(c)) => apply_power_law(p, s, c, Some(1.0), false),
                    (None, Some(c)) if c == 0.0 => RatePrediction {
                        category: Some(PredictedCategory::Sublinear),
                        note: Some("f'(x)/x^s -> 0 for every s: slower than any power".into()),
                        ..p
                    },
                    _ => p.unavailable("no derivative asymptotics recorded"),
                }
            }
        }
        Algorithm::Map => {
            let p = RatePrediction::empty(algorithm, f, "map: limit of f f'/x^q");
            if kink {
                p.unavailable("f'(0+) > 0: the sets meet at an angle; no sublinear analysis applies")
            } else {
                match (meta.map_exponent_q, meta.map_constant_cq) {
                    (Some(q), Some(cq)) if q > 1.0 && cq > 0.0 && cq.is_finite() => {
                        let e = 1.0 / (q - 1.0);
                        RatePrediction {
                            category: Some(PredictedCategory::Logarithmic),
                            exponent: Some(e),
                            constant: Some(((q - 1.0) * cq).powf(-e)),
                            constant_formula: Some(format!("(({} * {cq}))^(-1/{})", q - 1.0, q - 1.0)),
                            ..p
                        }
                    }
                    (None, Some(cq)) if cq == 0.0 => RatePrediction {
                        category: Some(PredictedCategory::Sublinear),
                        note: Some("f f'/x^q -> 0 for every q: slower than any power".into()),
                        ..p
                    },
                    _ => p.unavailable("no (q, c_q) pair recorded"),
                }
            }
        }
        Algorithm::Dra => {
            let mut p = RatePrediction::empty(algorithm, f, "dra: power law of f' scaled by r_inf");
            p.r_inf = r_inf_estimate;
            if kink {
                p.unavailable("f'(0+) > 0: finite convergence to a point of the fixed-point set")
            } else {
                match (meta.dra_exponent_q, meta.dra_constant_c) {
                    (Some(s), Some(c)) => apply_power_law(p, s, c, r_inf_estimate, true),
                    (None, Some(c)) if c == 0.0 => RatePrediction {
                        category: Some(PredictedCategory::Sublinear),
                        note: Some("f'(x)/x^s -> 0 for every s: slower than any power".into()),
                        ..p
                    },
                    _ => p.unavailable("no derivative asymptotics recorded"),
                }
            }
        }
    };
    Ok(pred)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RInfEstimate {
    pub r_hat: f64,
    /// `r_N - r_{N - N/10}`; a trailing increment, not a rigorous bound.
    pub uncertainty: f64,
    pub steps: usize,
}

/// Minimum number of steps for a budget-terminated trace.
pub const R_INF_MIN_STEPS: usize = 1000;

/// `r_inf` read off the last ordinate of a DRA trace.
///
/// Traces that stopped by underflow or at an exact zero are accepted at any
/// length, since their ordinate has already settled.
pub fn estimate_r_infinity(trace: &PlaneTrace) -> Result<RInfEstimate> {
    if trace.algorithm != Algorithm::Dra {
        return Err(Error::Precondition("r_inf is defined for DRA traces only".into()));
    }
    let steps = trace.zs.len().saturating_sub(1);
    let settled = matches!(trace.stop_reason, StopReason::Underflow | StopReason::FixedPoint);
    if steps < R_INF_MIN_STEPS && !settled {
        return Err(Error::Precondition(format!(
            "need at least {R_INF_MIN_STEPS} steps, got {steps}"
        )));
    }
    if steps == 0 {
        return Err(Error::Precondition("trace has no steps".into()));
    }
    if let Some(i) = trace.zs.windows(2).position(|w| w[1].r < w[0].r) {
        return Err(Error::TraceIntegrity(format!(
            "r decreases at step {}: {} -> {}",
            i + 1,
            trace.zs[i].r,
            trace.zs[i + 1].r
        )));
    }
    let r_hat = trace.zs[steps].r;
    let k = (steps / 10).max(1);
    Ok(RInfEstimate {
        r_hat,
        uncertainty: r_hat - trace.zs[steps - k].r,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funlib::catalog_get;
    use crate::prox::PlanePoint;

    fn pf(name: &str, params: &[f64]) -> ScalarConvexFunction {
        catalog_get(name, params).unwrap()
    }

    #[test]
    fn map_predictions() {
        let p = predict(Algorithm::Map, &pf("power_p_scaled", &[2.0]), None).unwrap();
        assert_eq!(p.category, Some(PredictedCategory::Logarithmic));
        assert_eq!(p.exponent, Some(0.5));
        assert!((p.constant.unwrap() - 1.0).abs() < 1e-15);
        let p = predict(Algorithm::Map, &pf("power_p_scaled", &[1.5]), None).unwrap();
        assert_eq!(p.exponent, Some(1.0));
        assert!((p.constant.unwrap() - 1.5).abs() < 1e-15);
        let p = predict(Algorithm::Map, &pf("circle", &[2.0]), None).unwrap();
        assert!((p.constant.unwrap() - 2.0).abs() < 1e-15);
        let p = predict(Algorithm::Map, &pf("flat", &[]), None).unwrap();
        assert_eq!(p.category, Some(PredictedCategory::Sublinear));
        assert!(!predict(Algorithm::Map, &pf("abs", &[]), None).unwrap().available);
    }

    #[test]
    fn dra_predictions() {
        let p = predict(Algorithm::Dra, &pf("power_p_scaled", &[3.0]), Some(0.8)).unwrap();
        assert_eq!(p.category, Some(PredictedCategory::Logarithmic));
        assert_eq!(p.exponent, Some(1.0));
        assert!((p.constant.unwrap() - 1.0 / 0.8).abs() < 1e-15);
        let p = predict(Algorithm::Dra, &pf("circle", &[2.0]), Some(0.5)).unwrap();
        assert_eq!(p.category, Some(PredictedCategory::Linear));
        assert!((p.rate.unwrap() - 1.0 / (1.0 + 0.5 / 2.0)).abs() < 1e-15);
        let p = predict(Algorithm::Dra, &pf("circle", &[2.0]), None).unwrap();
        assert!(p.rate.is_none() && p.r_inf_dependence.is_some());
        let p = predict(Algorithm::Dra, &pf("power_p_scaled", &[1.5]), None).unwrap();
        assert_eq!(p.category, Some(PredictedCategory::Superlinear));
        assert_eq!(p.order, Some(2.0));
        assert!(predict(Algorithm::Dra, &pf("circle", &[2.0]), Some(-1.0)).is_err());
    }

    #[test]
    fn ppa_predictions() {
        let p = predict(Algorithm::Ppa, &pf("power_q", &[1.5]), None).unwrap();
        assert_eq!(p.category, Some(PredictedCategory::Superlinear));
        assert_eq!(p.order, Some(2.0));
        let p = predict(Algorithm::Ppa, &pf("power_q", &[2.0]), None).unwrap();
        assert_eq!(p.rate, Some(1.0 / 3.0));
        let p = predict(Algorithm::Ppa, &pf("power_q", &[3.0]), None).unwrap();
        assert!((p.constant.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let p = predict(Algorithm::Ppa, &pf("abs", &[]), None).unwrap();
        assert_eq!(p.category, Some(PredictedCategory::Finite));
        let p = predict(Algorithm::Ppa, &pf("indicator_zero", &[]), None).unwrap();
        assert_eq!(p.category, Some(PredictedCategory::Finite));
    }

    fn synthetic(rs: &[f64], stop: StopReason) -> PlaneTrace {
        let zs: Vec<PlanePoint> = rs
            .iter()
            .enumerate()
            .map(|(i, &r)| PlanePoint::new(1.0 / (i + 1) as f64, r))
            .collect();
        PlaneTrace {
            algorithm: Algorithm::Dra,
            function: "synthetic".into(),
            z0: zs[0],
            shadow_xs: zs.iter().map(|z| z.x).collect(),
            zs,
            stop_reason: stop,
        }
    }

    #[test]
    fn r_inf_estimates() {
        let mut rs = vec![0.0];
        rs.extend(std::iter::repeat(0.7).take(1500));
        let e = estimate_r_infinity(&synthetic(&rs, StopReason::Budget)).unwrap();
        assert_eq!(e.r_hat, 0.7);
        assert_eq!(e.uncertainty, 0.0);

        assert!(matches!(
            estimate_r_infinity(&synthetic(&rs[..20], StopReason::Budget)),
            Err(Error::Precondition(_))
        ));
        assert!(estimate_r_infinity(&synthetic(&rs[..20], StopReason::Underflow)).is_ok());

        let mut bad = rs.clone();
        bad[700] = 0.1;
        assert!(matches!(
            estimate_r_infinity(&synthetic(&bad, StopReason::Budget)),
            Err(Error::TraceIntegrity(_))
        ));
    }
}
