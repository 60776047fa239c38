#![allow(dead_code)]

use slowrate::funlib::{catalog_get, ScalarConvexFunction};

/// One entry per catalog family, with the parameters used throughout the tests.
pub fn catalog_samples() -> Vec<ScalarConvexFunction> {
    [
        ("indicator_zero", vec![]),
        ("abs", vec![]),
        ("power_q", vec![1.5]),
        ("power_q", vec![2.0]),
        ("power_q", vec![3.0]),
        ("power_p_scaled", vec![1.5]),
        ("power_p_scaled", vec![2.0]),
        ("power_p_scaled", vec![3.0]),
        ("circle", vec![1.0]),
        ("circle", vec![2.0]),
        ("exp_abs", vec![]),
        ("cosh_shifted", vec![]),
        ("flat", vec![]),
    ]
    .into_iter()
    .map(|(n, p)| catalog_get(n, &p).unwrap())
    .collect()
}

pub fn power_p(p: f64) -> ScalarConvexFunction {
    catalog_get("power_p_scaled", &[p]).unwrap()
}

/// Print the verdict line for an acceptance criterion, then fail the test if
/// it did not pass.
pub fn verdict(criterion: u32, pass: bool, detail: impl AsRef<str>) {
    println!(
        "criterion {criterion}: {} ({})",
        if pass { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    assert!(pass, "criterion {criterion} failed: {}", detail.as_ref());
}
