use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn slowrate(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slowrate"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn ok(args: &[&str], out: &Path) {
    let o = slowrate(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_map_circle_writes_closed_form_trace() {
    let dir = TempDir::new().unwrap();
    ok(&["run", "--alg", "map", "--function", "circle:1", "--iters", "200"], dir.path());
    let rows = rows(&dir.path().join("trace.csv"));
    assert_eq!(rows.len(), 201);
    for row in &rows {
        let n: f64 = row[0].parse().unwrap();
        let x: f64 = row[1].parse().unwrap();
        assert!((x - 1.0 / (n + 1.0).sqrt()).abs() < 1e-13, "row {n}");
        assert!(!row[2].is_empty());
    }
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["stop_reason"], "budget");
}

#[test]
fn run_ppa_leaves_r_blank() {
    let dir = TempDir::new().unwrap();
    ok(&["run", "--alg", "ppa", "--function", "abs", "--x0", "2.5"], dir.path());
    let rows = rows(&dir.path().join("trace.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[2].is_empty()));
    assert_eq!(rows[3][1].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn compare_quotient_grows() {
    let dir = TempDir::new().unwrap();
    ok(&["compare", "--function", "power_p_scaled:1.5", "--iters", "40"], dir.path());
    let rows = rows(&dir.path().join("quotient.csv"));
    assert_eq!(rows.len(), 41);
    let live: Vec<f64> = rows.iter().filter(|r| &r[4] == "0").map(|r| r[3].parse().unwrap()).collect();
    // the first step coincides (r_0 = 0), so the quotient is 1 at n = 0 and 1
    assert_eq!(live[1], 1.0);
    assert!(live[1..].windows(2).all(|w| w[1] > w[0]));
    assert!(*live.last().unwrap() > 100.0);
    assert!(rows.iter().skip(live.len()).all(|r| &r[4] == "1"));
    assert!(dir.path().join("map_trace.csv").exists() && dir.path().join("dra_trace.csv").exists());
}

#[test]
fn table_lists_all_regimes() {
    let dir = TempDir::new().unwrap();
    ok(&["table"], dir.path());
    let t = json(&dir.path().join("tables.json"));
    assert_eq!(t["ppa_power_q"].as_array().unwrap().len(), 3);
    let rows = t["map_dra_power_p"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["predictions"][1]["category"], "superlinear");
    assert_eq!(rows[1]["predictions"][1]["category"], "linear");
}

#[test]
fn figures_cover_the_grid() {
    let dir = TempDir::new().unwrap();
    ok(&["figure1"], dir.path());
    ok(&["figure2"], dir.path());
    for name in ["figure1_map.csv", "figure1_dra.csv", "figure2_quotient.csv"] {
        let rows = rows(&dir.path().join(name));
        assert_eq!(rows.len(), 41 * 100, "{name}");
        for r in &rows {
            assert!(r[2].parse::<f64>().unwrap().is_finite(), "{name}");
        }
    }
    assert!(dir.path().join("figure1_manifest.json").exists());
    assert!(dir.path().join("figure2_manifest.json").exists());
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        ok(&["figure2", "--grid-size", "9"], dir.path());
        ok(&["run", "--alg", "dra", "--function", "power_p_scaled:2", "--iters", "300"], dir.path());
    }
    for name in ["figure2_quotient.csv", "trace.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let code = |args: &[&str]| slowrate(args, dir.path()).status.code();
    assert_eq!(code(&["run", "--alg", "map", "--function", "no_such"]), Some(2));
    assert_eq!(code(&["run", "--alg", "map", "--function", "power_q:0.5"]), Some(2));
    assert_eq!(code(&["run", "--alg", "map", "--function", "circle:1", "--x0", "3"]), Some(2));
    assert_eq!(code(&["run", "--alg", "map", "--function", "abs", "--x0", "-1"]), Some(2));
    // output directory blocked by a regular file
    let blocked = dir.path().join("blocked");
    fs::write(&blocked, "").unwrap();
    let o = slowrate(&["run", "--alg", "ppa", "--function", "abs"], &blocked);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn classify_reads_a_run() {
    let dir = TempDir::new().unwrap();
    ok(&["run", "--alg", "ppa", "--function", "power_q:2", "--iters", "400"], dir.path());
    let trace = dir.path().join("trace.csv");
    ok(&["classify", "--input", trace.to_str().unwrap()], dir.path());
    let r = json(&dir.path().join("rate_report.json"));
    assert_eq!(r["category"], "linear");
    assert!((r["estimated_ratio_c"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-6);
}

#[test]
fn predict_dra_circle_reports_r_inf() {
    let dir = TempDir::new().unwrap();
    ok(&["predict", "--alg", "dra", "--function", "circle:1", "--iters", "5000"], dir.path());
    let p = json(&dir.path().join("prediction.json"));
    let text = p.to_string();
    assert!(text.contains("r_inf"), "{text}");
    assert!(text.contains("0.5095"), "{text}");
}
