//! Independent numerical oracles for the formal layers.

pub mod freeness;
pub mod quad;
pub mod quad_i;
pub mod report;
pub mod residual;
pub mod selftest;

pub use freeness::{freeness_fit, FitSamples, FitStatus, FreenessOutcome};
pub use quad::{integrate, QuadConfig, QuadError};
pub use quad_i::{quad_i, quad_lambda, sup_relative_deviation, QuadIResult};
pub use report::{Check, ValidationReport};
pub use residual::{order_sweep, order_sweep_with_table, residual, sweep_report, EvalConfig};
pub use selftest::selftest_suite;
