//! Command-line experiment runner.
//!
//! ```text
//! slowrate <subcommand> [--alg ppa|map|dra] [--function name:params] [--x0 F] [--iters N] [--stride K] [--out DIR]
//! ```

pub mod experiments;
pub mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::drivers::{self, Algorithm, AnyTrace, StopReason, UNDERFLOW_FLOOR};
use crate::error::{Error, Result};
use crate::funlib::{catalog_get, ScalarConvexFunction};
use crate::prox::ProxConfig;
use crate::ratekit::classify_rate;

use experiments::{compare, figure_cells, predict_cell, tables, uniform_grid};
use output::{
    read_trace_xs, write_figure1_csv, write_figure2_csv, write_json, write_quotient_csv, write_trace_csv,
};

/// A catalog entry as written on the command line, e.g. `power_p:1.5`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionSpec {
    pub name: String,
    pub params: Vec<f64>,
}

impl FunctionSpec {
    pub fn build(&self) -> Result<ScalarConvexFunction> {
        catalog_get(&self.name, &self.params)
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (s, None),
        };
        if name.is_empty() {
            return Err(Error::Usage(format!("empty function name in `{s}`")));
        }
        let params = match rest {
            None => Vec::new(),
            Some(r) => r
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Usage(format!("bad parameter `{p}` in `{s}`")))
                })
                .collect::<Result<_>>()?,
        };
        let spec = FunctionSpec {
            name: name.to_string(),
            params,
        };
        spec.build()?;
        Ok(spec)
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            f.write_str(if i == 0 { ":" } else { "," })?;
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

fn parse_function(s: &str) -> std::result::Result<FunctionSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive finite number, got `{s}`")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "slowrate", version, about = "Convergence-rate experiments for PPA, MAP and DRA")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm and write its trace.
    Run(RunArgs),
    /// Classify the rate of a trace CSV.
    Classify(ClassifyArgs),
    /// Write the theoretical rate prediction.
    Predict(PredictArgs),
    /// Run MAP and DRA side by side and write their quotient.
    Compare(CompareArgs),
    /// MAP and DRA iterates over a grid of exponents p.
    Figure1(FigureArgs),
    /// MAP/DRA quotients over a grid of exponents p.
    Figure2(FigureArgs),
    /// Summary tables of predicted rates.
    Table(TableArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ToleranceArgs {
    /// Relative root-finder tolerance (steps never use more than 1e-15).
    #[arg(long, default_value_t = 1e-14)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-14)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_bisections: usize,
}

impl ToleranceArgs {
    fn config(&self) -> Result<ProxConfig> {
        let cfg = ProxConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_bisections: self.max_bisections,
            ..ProxConfig::default()
        };
        cfg.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub alg: Algorithm,
    #[arg(long, value_parser = parse_function)]
    pub function: FunctionSpec,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub x0: f64,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    /// Keep every k-th iterate (plus a dense tail) in the CSV.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Iterates at the end always written when decimating.
    #[arg(long, default_value_t = 1000)]
    pub tail: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub tol: ToleranceArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long, value_enum)]
    pub alg: Algorithm,
    #[arg(long, value_parser = parse_function)]
    pub function: FunctionSpec,
    /// Start of the DRA calibration run used to estimate r_inf.
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub x0: f64,
    /// Length of the DRA calibration run.
    #[arg(long, default_value_t = 100_000)]
    pub iters: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub tol: ToleranceArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long, value_parser = parse_function)]
    pub function: FunctionSpec,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub x0: f64,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub tol: ToleranceArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FigureArgs {
    #[arg(long, default_value_t = 1.05)]
    pub p_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub p_max: f64,
    #[arg(long, default_value_t = 41)]
    pub grid_size: usize,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub x0: f64,
    /// Number of terms per curve, starting at n = 0.
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub tol: ToleranceArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TableArgs {
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    command: &'static str,
    config: &'a RunArgs,
    function: String,
    steps: usize,
    rows_written: usize,
    stop_reason: StopReason,
    underflow_floor: f64,
    final_x: f64,
}

#[derive(Debug, Serialize)]
struct FigureManifest<'a> {
    command: &'static str,
    config: &'a FigureArgs,
    grid: Vec<f64>,
    files: Vec<&'static str>,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let cfg = args.tol.config()?;
    if args.iters == 0 {
        return Err(Error::Usage("--iters must be at least 1".into()));
    }
    let f = args.function.build()?;
    ensure_dir(&args.out)?;
    let csv = args.out.join("trace.csv");
    let (rows, steps, stop, final_x) = match args.alg {
        Algorithm::Ppa => {
            let t = drivers::run_ppa(&f, args.x0, args.iters, &cfg)?;
            let rows = write_trace_csv(&csv, AnyTrace::Scalar(&t), args.stride, args.tail)?;
            (rows, t.xs.len() - 1, t.stop_reason, *t.xs.last().unwrap_or(&args.x0))
        }
        Algorithm::Map | Algorithm::Dra => {
            let t = if args.alg == Algorithm::Map {
                drivers::run_map(&f, args.x0, args.iters, &cfg)?
            } else {
                drivers::run_dra(&f, args.x0, args.iters, &cfg)?
            };
            let rows = write_trace_csv(&csv, AnyTrace::Plane(&t), args.stride, args.tail)?;
            (rows, t.zs.len() - 1, t.stop_reason, *t.shadow_xs.last().unwrap_or(&args.x0))
        }
    };
    write_json(
        &args.out.join("manifest.json"),
        &RunManifest {
            command: "run",
            config: args,
            function: f.to_string(),
            steps,
            rows_written: rows,
            stop_reason: stop,
            underflow_floor: UNDERFLOW_FLOOR,
            final_x,
        },
    )
}

fn cmd_classify(args: &ClassifyArgs) -> Result<()> {
    let xs = read_trace_xs(&args.input)?;
    let report = classify_rate(&xs)?;
    ensure_dir(&args.out)?;
    write_json(&args.out.join("rate_report.json"), &report)
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let cfg = args.tol.config()?;
    let f = args.function.build()?;
    let (prediction, r_inf) = predict_cell(args.alg, &f, args.x0, args.iters, &cfg)?;
    #[derive(Serialize)]
    struct Out<'a> {
        prediction: crate::ratekit::RatePrediction,
        r_inf_estimate: Option<crate::ratekit::RInfEstimate>,
        config: &'a PredictArgs,
    }
    ensure_dir(&args.out)?;
    write_json(
        &args.out.join("prediction.json"),
        &Out {
            prediction,
            r_inf_estimate: r_inf,
            config: args,
        },
    )
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let cfg = args.tol.config()?;
    let f = args.function.build()?;
    let c = compare(&f, args.x0, args.iters, &cfg)?;
    ensure_dir(&args.out)?;
    write_trace_csv(&args.out.join("map_trace.csv"), AnyTrace::Plane(&c.map), 1, 0)?;
    write_trace_csv(&args.out.join("dra_trace.csv"), AnyTrace::Plane(&c.dra), 1, 0)?;
    let terms = args.iters + 1;
    write_quotient_csv(
        &args.out.join("quotient.csv"),
        &experiments::padded(&c.map.shadow_xs, terms),
        &experiments::padded(&c.dra.shadow_xs, terms),
        &c.quotient,
    )
}

fn figure(args: &FigureArgs, which: &'static str) -> Result<()> {
    let cfg = args.tol.config()?;
    if !(args.p_min > 1.0 && args.p_max >= args.p_min) || args.grid_size == 0 || args.iters == 0 {
        return Err(Error::Usage(
            "need 1 < p-min <= p-max, grid-size >= 1 and iters >= 1".into(),
        ));
    }
    let grid = uniform_grid(args.p_min, args.p_max, args.grid_size);
    let cells = figure_cells(&grid, args.x0, args.iters, &cfg)?;
    ensure_dir(&args.out)?;
    let files = if which == "figure1" {
        write_figure1_csv(&args.out.join("figure1_map.csv"), &cells, false)?;
        write_figure1_csv(&args.out.join("figure1_dra.csv"), &cells, true)?;
        vec!["figure1_map.csv", "figure1_dra.csv"]
    } else {
        write_figure2_csv(&args.out.join("figure2_quotient.csv"), &cells)?;
        vec!["figure2_quotient.csv"]
    };
    write_json(
        &args.out.join(format!("{which}_manifest.json")),
        &FigureManifest {
            command: which,
            config: args,
            grid,
            files,
        },
    )
}

fn cmd_table(args: &TableArgs) -> Result<()> {
    ensure_dir(&args.out)?;
    write_json(&args.out.join("tables.json"), &tables()?)
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Figure1(a) => figure(a, "figure1"),
        Command::Figure2(a) => figure(a, "figure2"),
        Command::Table(a) => cmd_table(a),
    }
}

/// Process exit code for an error: 2 for usage problems, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_)
        | Error::UnknownFunction(_)
        | Error::InvalidParameter(_)
        | Error::NonFiniteInput(_)
        | Error::OutsideDomain { .. } => 2,
        _ => 1,
    }
}

/// Parse `std::env::args`, run, and return the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn function_specs() {
        let s: FunctionSpec = "power_p:1.5".parse().unwrap();
        assert_eq!(s.params, vec![1.5]);
        assert_eq!(s.build().unwrap().name(), "power_p_scaled");
        let s: FunctionSpec = "abs".parse().unwrap();
        assert!(s.params.is_empty());
        assert_eq!(s.to_string(), "abs");
        assert!("circle:x".parse::<FunctionSpec>().is_err());
        assert!("nope:1".parse::<FunctionSpec>().is_err());
        assert!("power_p:0.5".parse::<FunctionSpec>().is_err());
        assert!(":1".parse::<FunctionSpec>().is_err());
    }

    #[test]
    fn cli_parses() {
        let cli = Cli::try_parse_from([
            "slowrate", "run", "--alg", "map", "--function", "circle:1.0", "--x0", "1", "--iters", "100",
        ])
        .unwrap();
        match cli.command {
            Command::Run(a) => {
                assert_eq!(a.alg, Algorithm::Map);
                assert_eq!(a.iters, 100);
            }
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["slowrate", "run", "--alg", "xyz"]).is_err());
        assert!(Cli::try_parse_from(["slowrate", "run", "--alg", "map", "--function", "sin"]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Usage("x".into())), 2);
        assert_eq!(exit_code(&Error::Bracket("x".into())), 1);
    }
}
