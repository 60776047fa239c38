//! Iteration drivers for the proximal point algorithm (PPA), alternating
//! projections (MAP) and Douglas-Rachford (DRA) between the abscissa and an
//! epigraph.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funlib::{Composite, ConvexFunction, ScalarConvexFunction};
use crate::prox::{project_a, project_epigraph, prox, reflect_a, PlanePoint, ProxConfig};

/// Iterates below this are not recorded; the run stops with
/// [`StopReason::Underflow`].
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Relative root-finder tolerance used for every step.
pub const STEP_REL_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ppa,
    Map,
    Dra,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Ppa => "ppa",
            Algorithm::Map => "map",
            Algorithm::Dra => "dra",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `max_iter` steps were taken.
    Budget,
    /// The next iterate fell below [`UNDERFLOW_FLOOR`].
    Underflow,
    /// An exact zero was reached.
    FixedPoint,
    /// The step returned the current iterate unchanged.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarTrace {
    pub algorithm: Algorithm,
    pub function: String,
    pub x0: f64,
    pub xs: Vec<f64>,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneTrace {
    pub algorithm: Algorithm,
    pub function: String,
    pub z0: PlanePoint,
    pub zs: Vec<PlanePoint>,
    pub shadow_xs: Vec<f64>,
    pub stop_reason: StopReason,
}

impl PlaneTrace {
    pub fn rs(&self) -> Vec<f64> {
        self.zs.iter().map(|z| z.r).collect()
    }
}

fn check_start(x0: f64, cfg: &ProxConfig) -> Result<()> {
    cfg.validate()?;
    if !x0.is_finite() {
        return Err(Error::NonFiniteInput(format!("x0 = {x0}")));
    }
    if x0 < 0.0 {
        return Err(Error::InvalidParameter(format!("x0 must be nonnegative, got {x0}")));
    }
    Ok(())
}

fn check_in_domain<F: ConvexFunction + ?Sized>(f: &F, x0: f64) -> Result<()> {
    let dom = f.domain();
    if dom.contains(x0) {
        Ok(())
    } else {
        Err(Error::OutsideDomain {
            x: x0,
            lo: dom.lo,
            hi: dom.hi,
        })
    }
}

/// How a step ended, or `None` to keep going.
fn classify_step(current: f64, next: f64) -> Result<Option<StopReason>> {
    if next == 0.0 {
        return Ok(Some(StopReason::FixedPoint));
    }
    if next < UNDERFLOW_FLOOR {
        return Ok(Some(StopReason::Underflow));
    }
    if next == current {
        return Ok(Some(StopReason::Stalled));
    }
    if next > current {
        return Err(Error::TraceIntegrity(format!(
            "iterate increased from {current} to {next}"
        )));
    }
    Ok(None)
}

/// `x_{n+1} = prox_f(x_n)` from `x0`.
///
/// The prox is defined on the whole line, so `x0` may lie outside the domain
/// (the first step then lands inside it).
pub fn run_ppa<F: ConvexFunction + ?Sized>(f: &F, x0: f64, max_iter: usize, cfg: &ProxConfig) -> Result<ScalarTrace> {
    check_start(x0, cfg)?;
    let step_cfg = cfg.tightened(STEP_REL_TOL);
    let mut xs = vec![x0];
    let mut stop = StopReason::Budget;
    let mut x = x0;
    if x0 == 0.0 {
        stop = StopReason::FixedPoint;
    }
    while stop == StopReason::Budget && xs.len() <= max_iter {
        let next = prox(f, 1.0, x, &step_cfg)?;
        match classify_step(x, next)? {
            Some(StopReason::FixedPoint) => {
                xs.push(next);
                stop = StopReason::FixedPoint;
            }
            Some(reason) => stop = reason,
            None => {
                xs.push(next);
                x = next;
            }
        }
    }
    Ok(ScalarTrace {
        algorithm: Algorithm::Ppa,
        function: f.label(),
        x0,
        xs,
        stop_reason: stop,
    })
}

/// `a_{n+1} = P_A P_B a_n` from `a_0 = (x0, 0)`.
pub fn run_map<F: ConvexFunction + ?Sized>(f: &F, x0: f64, max_iter: usize, cfg: &ProxConfig) -> Result<PlaneTrace> {
    check_start(x0, cfg)?;
    check_in_domain(f, x0)?;
    let step_cfg = cfg.tightened(STEP_REL_TOL);
    let z0 = PlanePoint::new(x0, 0.0);
    run_plane(Algorithm::Map, f.label(), z0, max_iter, |z| {
        Ok(project_a(project_epigraph(f, z, &step_cfg)?))
    })
}

/// `z_{n+1} = z_n - P_A z_n + P_B R_A z_n` from `z_0 = (x0, 0)`.
pub fn run_dra(f: &ScalarConvexFunction, x0: f64, max_iter: usize, cfg: &ProxConfig) -> Result<PlaneTrace> {
    check_start(x0, cfg)?;
    check_in_domain(f, x0)?;
    let step_cfg = cfg.tightened(STEP_REL_TOL);
    let z0 = PlanePoint::new(x0, 0.0);
    run_plane(Algorithm::Dra, f.label(), z0, max_iter, |z| {
        let pa = project_a(z);
        let pb = project_epigraph(f, reflect_a(z), &step_cfg)?;
        Ok(PlanePoint::new(z.x - pa.x + pb.x, z.r - pa.r + pb.r))
    })
}

/// DRA through the scalar recursion: `x_{n+1}` is the prox of
/// `r_n f + f^2/2` at `x_n`, and `r_{n+1} = r_n + f(x_{n+1})`.
pub fn run_dra_reduced(f: &ScalarConvexFunction, x0: f64, max_iter: usize, cfg: &ProxConfig) -> Result<PlaneTrace> {
    check_start(x0, cfg)?;
    check_in_domain(f, x0)?;
    let step_cfg = cfg.tightened(STEP_REL_TOL);
    let z0 = PlanePoint::new(x0, 0.0);
    run_plane(Algorithm::Dra, f.label(), z0, max_iter, |z| {
        let step = Composite::new(f, z.r, 1.0);
        let x = prox(&step, 1.0, z.x, &step_cfg)?;
        Ok(PlanePoint::new(x, z.r + f.eval(x)))
    })
}

fn run_plane<S>(algorithm: Algorithm, function: String, z0: PlanePoint, max_iter: usize, mut step: S) -> Result<PlaneTrace>
where
    S: FnMut(PlanePoint) -> Result<PlanePoint>,
{
    let mut zs = vec![z0];
    let mut stop = if z0.x == 0.0 { StopReason::FixedPoint } else { StopReason::Budget };
    let mut z = z0;
    if stop == StopReason::FixedPoint {
        // (0, 0) is fixed by both operators; record one step to show it.
        zs.push(step(z)?);
    }
    while stop == StopReason::Budget && zs.len() <= max_iter {
        let next = step(z)?;
        match classify_step(z.x, next.x)? {
            Some(StopReason::FixedPoint) => {
                zs.push(next);
                stop = StopReason::FixedPoint;
            }
            Some(reason) => stop = reason,
            None => {
                zs.push(next);
                z = next;
            }
        }
    }
    let shadow_xs = zs.iter().map(|z| z.x).collect();
    Ok(PlaneTrace {
        algorithm,
        function,
        z0,
        zs,
        shadow_xs,
        stop_reason: stop,
    })
}

/// Either kind of trace, for checks that accept both.
#[derive(Debug, Clone, Copy)]
pub enum AnyTrace<'a> {
    Scalar(&'a ScalarTrace),
    Plane(&'a PlaneTrace),
}

impl<'a> From<&'a ScalarTrace> for AnyTrace<'a> {
    fn from(t: &'a ScalarTrace) -> Self {
        AnyTrace::Scalar(t)
    }
}

impl<'a> From<&'a PlaneTrace> for AnyTrace<'a> {
    fn from(t: &'a PlaneTrace) -> Self {
        AnyTrace::Plane(t)
    }
}

impl AnyTrace<'_> {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            AnyTrace::Scalar(t) => t.algorithm,
            AnyTrace::Plane(t) => t.algorithm,
        }
    }

    pub fn function(&self) -> &str {
        match self {
            AnyTrace::Scalar(t) => &t.function,
            AnyTrace::Plane(t) => &t.function,
        }
    }

    pub fn xs(&self) -> &[f64] {
        match self {
            AnyTrace::Scalar(t) => &t.xs,
            AnyTrace::Plane(t) => &t.shadow_xs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FejerReport {
    pub algorithm: Algorithm,
    pub steps: usize,
    /// Largest excess of the left side of the Fejér inequality over the right,
    /// clamped at 0.
    pub max_violation: f64,
    /// MAP only: largest value of `x_{n+1}(x_{n+1} - x_n) + f(x_{n+1})^2`,
    /// which should be `<= 0`.
    pub map_step_max: Option<f64>,
}

/// Fejér inequalities towards the solution 0 (PPA) or `(0, 0)` (MAP).
pub fn check_fejer<'a, F: ConvexFunction + ?Sized>(trace: impl Into<AnyTrace<'a>>, f: &F) -> Result<FejerReport> {
    let trace = trace.into();
    if trace.algorithm() == Algorithm::Dra {
        return Err(Error::Precondition(
            "no Fejér inequality towards the intersection is available for DRA traces".into(),
        ));
    }
    if trace.function() != f.label() {
        return Err(Error::Precondition(format!(
            "trace was generated by `{}`, not `{}`",
            trace.function(),
            f.label()
        )));
    }
    let xs = trace.xs();
    let mut max_violation = 0.0f64;
    let mut map_step_max = f64::NEG_INFINITY;
    for w in xs.windows(2) {
        let (x, y) = (w[0], w[1]);
        let d = x - y;
        let excess = match trace.algorithm() {
            Algorithm::Ppa => y * y + d * d - x * x,
            _ => {
                let fy = f.value(y).finite().ok_or_else(|| {
                    Error::TraceIntegrity(format!("iterate {y} outside the domain"))
                })?;
                map_step_max = map_step_max.max(y * (y - x) + fy * fy);
                y * y + fy * fy + d * d + fy * fy - x * x
            }
        };
        max_violation = max_violation.max(excess);
    }
    Ok(FejerReport {
        algorithm: trace.algorithm(),
        steps: xs.len().saturating_sub(1),
        max_violation,
        map_step_max: (trace.algorithm() == Algorithm::Map && xs.len() > 1).then_some(map_step_max),
    })
}

/// Indices kept when writing a long trace: every `stride`-th index, the last
/// `tail` indices, and the final index.
pub fn decimation_indices(len: usize, stride: usize, tail: usize) -> Vec<usize> {
    if len == 0 {
        return Vec::new();
    }
    let stride = stride.max(1);
    let tail_start = len.saturating_sub(tail);
    (0..len)
        .filter(|&i| i % stride == 0 || i >= tail_start || i == len - 1)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funlib::catalog_get;

    fn cfg() -> ProxConfig {
        ProxConfig::default()
    }

    #[test]
    fn ppa_examples() {
        let sq = catalog_get("power_q", &[2.0]).unwrap();
        let t = run_ppa(&sq, 1.0, 5, &cfg()).unwrap();
        assert_eq!(t.xs.len(), 6);
        for (n, x) in t.xs.iter().enumerate() {
            assert!((x - 3f64.powi(-(n as i32))).abs() < 1e-16);
        }
        assert_eq!(t.stop_reason, StopReason::Budget);

        let abs = catalog_get("abs", &[]).unwrap();
        let t = run_ppa(&abs, 2.5, 100, &cfg()).unwrap();
        assert_eq!(t.xs, vec![2.5, 1.5, 0.5, 0.0]);
        assert_eq!(t.stop_reason, StopReason::FixedPoint);

        let ind = catalog_get("indicator_zero", &[]).unwrap();
        let t = run_ppa(&ind, 5.0, 100, &cfg()).unwrap();
        assert_eq!(t.xs, vec![5.0, 0.0]);
    }

    #[test]
    fn start_validation() {
        let sq = catalog_get("power_q", &[2.0]).unwrap();
        assert!(matches!(run_ppa(&sq, f64::NAN, 5, &cfg()), Err(Error::NonFiniteInput(_))));
        assert!(matches!(run_ppa(&sq, -1.0, 5, &cfg()), Err(Error::InvalidParameter(_))));
        let c = catalog_get("circle", &[1.0]).unwrap();
        assert!(matches!(run_map(&c, 2.0, 5, &cfg()), Err(Error::OutsideDomain { .. })));
        assert!(matches!(run_dra(&c, 2.0, 5, &cfg()), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn map_examples() {
        let c = catalog_get("circle", &[1.0]).unwrap();
        let t = run_map(&c, 1.0, 50, &cfg()).unwrap();
        for (n, x) in t.shadow_xs.iter().enumerate() {
            assert!((x - 1.0 / ((n + 1) as f64).sqrt()).abs() < 1e-14, "n={n}");
        }
        assert!(t.zs.iter().all(|z| z.r == 0.0));

        let p = catalog_get("power_p_scaled", &[1.5]).unwrap();
        let t = run_map(&p, 1.0, 1, &cfg()).unwrap();
        assert!((t.shadow_xs[1] - (33f64.sqrt() - 3.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn dra_examples() {
        let c = catalog_get("circle", &[1.0]).unwrap();
        let t = run_dra(&c, 1.0, 1, &cfg()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((t.zs[1].x - h).abs() < 1e-15);
        assert!((t.zs[1].r - (1.0 - h)).abs() < 1e-15);

        let p = catalog_get("power_p_scaled", &[2.0]).unwrap();
        let t = run_dra(&p, 1.0, 1, &cfg()).unwrap();
        let x = t.zs[1].x;
        assert!((x * x * x / 2.0 + x - 1.0).abs() < 1e-15);

        let t = run_dra(&p, 0.0, 10, &cfg()).unwrap();
        assert!(t.zs.iter().all(|z| *z == PlanePoint::ORIGIN));
        assert_eq!(t.stop_reason, StopReason::FixedPoint);
    }

    #[test]
    fn dra_routes_agree() {
        for (name, params) in [("circle", vec![1.0]), ("power_p_scaled", vec![3.0]), ("abs", vec![])] {
            let f = catalog_get(name, &params).unwrap();
            let a = run_dra(&f, 1.0, 200, &cfg()).unwrap();
            let b = run_dra_reduced(&f, 1.0, 200, &cfg()).unwrap();
            assert_eq!(a.zs.len(), b.zs.len(), "{name}");
            for (u, v) in a.zs.iter().zip(&b.zs) {
                assert!((u.x - v.x).abs() < 1e-14 && (u.r - v.r).abs() < 1e-14, "{name}");
            }
        }
    }

    #[test]
    fn dra_reaches_zero_on_abs() {
        let abs = catalog_get("abs", &[]).unwrap();
        let t = run_dra(&abs, 1.0, 100, &cfg()).unwrap();
        assert_eq!(t.stop_reason, StopReason::FixedPoint);
        assert_eq!(*t.shadow_xs.last().unwrap(), 0.0);
    }

    #[test]
    fn superlinear_dra_underflows() {
        let p = catalog_get("power_p_scaled", &[1.5]).unwrap();
        let t = run_dra(&p, 1.0, 1000, &cfg()).unwrap();
        assert_eq!(t.stop_reason, StopReason::Underflow);
        assert!(t.shadow_xs.iter().all(|&x| x >= UNDERFLOW_FLOOR));
        assert!(t.zs.len() < 30);
    }

    #[test]
    fn fejer_reports() {
        let sq = catalog_get("power_q", &[2.0]).unwrap();
        let t = run_ppa(&sq, 1.0, 100, &cfg()).unwrap();
        let rep = check_fejer(&t, &sq).unwrap();
        assert!(rep.max_violation <= 1e-12);
        assert_eq!(rep.map_step_max, None);

        let p = catalog_get("power_p_scaled", &[2.0]).unwrap();
        let t = run_map(&p, 1.0, 1000, &cfg()).unwrap();
        let rep = check_fejer(&t, &p).unwrap();
        assert!(rep.max_violation <= 1e-9);
        assert!(rep.map_step_max.unwrap() <= 1e-15);

        let t = run_dra(&p, 1.0, 10, &cfg()).unwrap();
        assert!(matches!(check_fejer(&t, &p), Err(Error::Precondition(_))));
        let t = run_map(&p, 1.0, 10, &cfg()).unwrap();
        assert!(matches!(check_fejer(&t, &sq), Err(Error::Precondition(_))));
    }

    #[test]
    fn decimation() {
        assert_eq!(decimation_indices(10, 4, 2), vec![0, 4, 8, 9]);
        assert_eq!(decimation_indices(10, 1, 0), (0..10).collect::<Vec<_>>());
        assert_eq!(decimation_indices(7, 10, 0), vec![0, 6]);
        assert!(decimation_indices(0, 3, 3).is_empty());
    }
}
