//! Experiment cells behind the CLI subcommands, kept free of I/O so tests can
//! drive them directly.

use rayon::prelude::*;
use serde::Serialize;

use crate::drivers::{run_dra, run_map, Algorithm, PlaneTrace};
use crate::error::Result;
use crate::funlib::{catalog_get, ScalarConvexFunction};
use crate::prox::ProxConfig;
use crate::ratekit::{estimate_r_infinity, predict, RInfEstimate, RatePrediction};

/// `size` equally spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, size: usize) -> Vec<f64> {
    match size {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..size)
            .map(|i| lo + (hi - lo) * i as f64 / (size - 1) as f64)
            .collect(),
    }
}

/// First `terms` iterates of a trace; `None` past its end.
pub fn padded(xs: &[f64], terms: usize) -> Vec<Option<f64>> {
    (0..terms).map(|n| xs.get(n).copied()).collect()
}

/// `x_map / x_dra` term by term; `None` once either trace has ended.
pub fn quotients(map: &[Option<f64>], dra: &[Option<f64>]) -> Vec<Option<f64>> {
    map.iter()
        .zip(dra)
        .map(|(m, d)| match (m, d) {
            (Some(m), Some(d)) if *d > 0.0 => Some(m / d),
            _ => None,
        })
        .collect()
}

/// MAP and DRA runs on the same function from the same start.
pub struct Comparison {
    pub map: PlaneTrace,
    pub dra: PlaneTrace,
    pub quotient: Vec<Option<f64>>,
}

pub fn compare(f: &ScalarConvexFunction, x0: f64, iters: usize, cfg: &ProxConfig) -> Result<Comparison> {
    let map = run_map(f, x0, iters, cfg)?;
    let dra = run_dra(f, x0, iters, cfg)?;
    let terms = iters + 1;
    let quotient = quotients(&padded(&map.shadow_xs, terms), &padded(&dra.shadow_xs, terms));
    Ok(Comparison { map, dra, quotient })
}

/// One grid column of the figure data: the first `terms` MAP and DRA iterates
/// for `f = |x|^p / p`.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureCell {
    pub p: f64,
    pub map: Vec<Option<f64>>,
    pub dra: Vec<Option<f64>>,
}

impl FigureCell {
    pub fn quotient(&self) -> Vec<Option<f64>> {
        quotients(&self.map, &self.dra)
    }
}

/// Figure cells for every `p` in `grid`, computed in parallel and returned in
/// grid order.
pub fn figure_cells(grid: &[f64], x0: f64, terms: usize, cfg: &ProxConfig) -> Result<Vec<FigureCell>> {
    grid.par_iter()
        .map(|&p| {
            let f = catalog_get("power_p_scaled", &[p])?;
            let steps = terms.saturating_sub(1);
            let map = run_map(&f, x0, steps, cfg)?;
            let dra = run_dra(&f, x0, steps, cfg)?;
            Ok(FigureCell {
                p,
                map: padded(&map.shadow_xs, terms),
                dra: padded(&dra.shadow_xs, terms),
            })
        })
        .collect()
}

/// Prediction for one cell, running a DRA calibration trace first when the
/// DRA rate depends on `r_inf`.
pub fn predict_cell(
    algorithm: Algorithm,
    f: &ScalarConvexFunction,
    x0: f64,
    calibration_iters: usize,
    cfg: &ProxConfig,
) -> Result<(RatePrediction, Option<RInfEstimate>)> {
    let symbolic = predict(algorithm, f, None)?;
    if symbolic.r_inf_dependence.is_none() {
        return Ok((symbolic, None));
    }
    let trace = run_dra(f, x0, calibration_iters, cfg)?;
    let est = estimate_r_infinity(&trace)?;
    Ok((predict(algorithm, f, Some(est.r_hat))?, Some(est)))
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub regime: &'static str,
    pub representative: f64,
    pub statement: &'static str,
    pub predictions: Vec<RatePrediction>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tables {
    /// PPA on `|x|^q`.
    pub ppa_power_q: Vec<TableRow>,
    /// MAP and DRA on `|x|^p / p`.
    pub map_dra_power_p: Vec<TableRow>,
}

/// Both summary tables, filled from [`predict`] at a representative
/// parameter per regime. DRA constants are left symbolic in `r_inf`.
pub fn tables() -> Result<Tables> {
    let ppa_rows = [
        ("1<q<2", 1.5, "superlinear with order 1/(q-1)"),
        ("q=2", 2.0, "linear with rate 1/3"),
        ("2<q", 3.0, "logarithmic"),
    ];
    let mut ppa_power_q = Vec::new();
    for (regime, q, statement) in ppa_rows {
        let f = catalog_get("power_q", &[q])?;
        ppa_power_q.push(TableRow {
            regime,
            representative: q,
            statement,
            predictions: vec![predict(Algorithm::Ppa, &f, None)?],
        });
    }
    let p_rows = [
        ("1<p<2", 1.5, "MAP logarithmic; DRA superlinear with order 1/(p-1)"),
        ("p=2", 2.0, "MAP logarithmic; DRA linear with rate 1/(1+r_inf)"),
        ("2<p", 3.0, "MAP logarithmic; DRA logarithmic with x_n ~ (1/n)^(1/(p-2))"),
    ];
    let mut map_dra_power_p = Vec::new();
    for (regime, p, statement) in p_rows {
        let f = catalog_get("power_p_scaled", &[p])?;
        map_dra_power_p.push(TableRow {
            regime,
            representative: p,
            statement,
            predictions: vec![predict(Algorithm::Map, &f, None)?, predict(Algorithm::Dra, &f, None)?],
        });
    }
    Ok(Tables {
        ppa_power_q,
        map_dra_power_p,
    })
}
