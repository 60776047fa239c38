//! Proximal point, alternating projection and Douglas-Rachford iterations on
//! a scalar epigraph, with tools to measure and predict their convergence
//! rates.

pub mod drivers;
pub mod error;
pub mod expcli;
pub mod funlib;
pub mod prox;
pub mod ratekit;

pub use error::{Error, Result};
