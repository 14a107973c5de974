//! chronolog predicts the execution time of deterministic logic programs.
//!
//! The pipeline has two independent halves. The analyzer derives, per
//! predicate and per cost metric, a platform-independent cost function over
//! the sizes of the input arguments. The calibrator runs a fixed suite of
//! programs with known exact costs on the target machine and solves an
//! overdetermined least-squares system for the time constant of each metric.
//! A prediction is the dot product of the two.

pub mod analysis;
pub mod bench;
pub mod calibrate;
pub mod cli;
pub mod lang;
pub mod metric;
pub mod predict;
pub mod vm;

pub use cli::run_cli;
pub use metric::{CostModel, Metric};
