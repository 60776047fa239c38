use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::drivers::{decimation_indices, AnyTrace};
use crate::error::{Error, Result};

use super::experiments::FigureCell;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Write `n,x,r`, leaving `r` blank for scalar traces.
pub fn write_trace_csv(path: &Path, trace: AnyTrace<'_>, stride: usize, tail: usize) -> Result<usize> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "x", "r"])?;
    let xs = trace.xs();
    let indices = decimation_indices(xs.len(), stride, tail);
    for &i in &indices {
        let r = match trace {
            AnyTrace::Scalar(_) => String::new(),
            AnyTrace::Plane(t) => fmt_f64(t.zs[i].r),
        };
        w.write_record([i.to_string(), fmt_f64(xs[i]), r])?;
    }
    w.flush()?;
    Ok(indices.len())
}

#[derive(Debug, Deserialize)]
struct TraceRow {
    n: usize,
    x: f64,
    #[allow(dead_code)]
    r: Option<f64>,
}

/// The `x` column of a dense trace CSV.
pub fn read_trace_xs(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut xs = Vec::new();
    for (i, row) in rdr.deserialize::<TraceRow>().enumerate() {
        let row = row?;
        if row.n != i {
            return Err(Error::Usage(format!(
                "{}: expected n = {i}, found {}; classification needs an undecimated trace",
                path.display(),
                row.n
            )));
        }
        xs.push(row.x);
    }
    if xs.is_empty() {
        return Err(Error::Usage(format!("{}: no rows", path.display())));
    }
    Ok(xs)
}

/// Missing values are written as 0 with `underflow = 1`.
fn clamp(v: Option<f64>) -> (String, &'static str) {
    match v {
        Some(v) => (fmt_f64(v), "0"),
        None => (fmt_f64(0.0), "1"),
    }
}

pub fn write_quotient_csv(
    path: &Path,
    map: &[Option<f64>],
    dra: &[Option<f64>],
    quotient: &[Option<f64>],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "x_map", "x_dra", "quotient", "underflow"])?;
    for n in 0..quotient.len() {
        let (m, _) = clamp(map[n]);
        let (d, _) = clamp(dra[n]);
        let (q, flag) = clamp(quotient[n]);
        w.write_record([n.to_string(), m, d, q, flag.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format `p,n,x,underflow` for one algorithm.
pub fn write_figure1_csv(path: &Path, cells: &[FigureCell], dra: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["p", "n", "x", "underflow"])?;
    for cell in cells {
        let xs = if dra { &cell.dra } else { &cell.map };
        for (n, &x) in xs.iter().enumerate() {
            let (v, flag) = clamp(x);
            w.write_record([fmt_f64(cell.p), n.to_string(), v, flag.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Long-format `p,n,quotient,underflow`.
pub fn write_figure2_csv(path: &Path, cells: &[FigureCell]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["p", "n", "quotient", "underflow"])?;
    for cell in cells {
        for (n, q) in cell.quotient().into_iter().enumerate() {
            let (v, flag) = clamp(q);
            w.write_record([fmt_f64(cell.p), n.to_string(), v, flag.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [1.0 / 3.0, 1e-300, 0.1, 2.0f64.sqrt(), 5e-324] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
