//! Measuring and predicting convergence rates of scalar sequences.

pub mod checks;
pub mod classify;
pub mod predict;
pub mod recursion;

pub use checks::{
    guler_product, linear_rate_bound_check, ppa_superlinear_majorant, ppa_superlinear_majorant_ln, GulerReport,
    LinearBound, LinearBoundReport, GULER_THRESHOLD,
};
pub use classify::{classify_rate, Diagnostics, RateCategory, RateReport};
pub use predict::{estimate_r_infinity, predict, PredictedCategory, RInfEstimate, RatePrediction, RinfDependence};
pub use recursion::{
    envelope_check, make_recursion_model, sandwich_check, stolz_bounds, EnvelopeForm, EnvelopeReport, EnvelopeSide,
    RecursionModel, SandwichForm, SandwichReport, StolzBounds,
};
