//! Platform calibration: measure how long each countable event takes on
//! the current machine.
//!
//! The pipeline runs a bundled suite of programs whose event counts are
//! known exactly, times them, stacks counts against durations as an
//! overdetermined linear system, and solves for nanoseconds-per-event by
//! Householder least squares. Builtin and operator constants are measured
//! directly rather than regressed. Results persist as a platform profile.

pub mod fit;
pub mod matrix;
pub mod profile_file;
pub mod suite;

pub use fit::{calibrate_builtins, collect_samples, fit_model, CollectOptions, ModelFit, SampleMatrix};
pub use matrix::{least_squares, residual_stats, Householder, Mat, MatrixError, ResidualStats};
pub use profile_file::{export_csv, PlatformProfile, StoredFit};
pub use suite::{builtin_calibration_suite, default_sizes, gen_int_list, CalibrationProgram};

use crate::vm::TimingError;

#[derive(Debug, thiserror::Error)]
pub enum CalibrateError {
    #[error("calibration program `{id}` failed to build: {detail}")]
    Suite { id: String, detail: String },
    #[error("component `{metric}` is redundant on these samples: {detail}")]
    Redundant { metric: String, detail: String },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("cost evaluation for `{id}` at size {size} failed: {detail}")]
    Cost {
        id: String,
        size: i64,
        detail: String,
    },
    #[error(
        "too few usable samples: {m} rows for {v} unknowns \
         ({dropped} dropped by timing diagnostics)"
    )]
    InsufficientSamples {
        m: usize,
        v: usize,
        dropped: usize,
    },
    #[error("model component `{metric}` is not present in the collected samples")]
    ComponentMissing { metric: String },
    #[error(transparent)]
    Timing(#[from] TimingError),
    #[error("profile I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed platform profile: {0}")]
    Profile(String),
}
