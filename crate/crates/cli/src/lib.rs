//! Monte-Carlo experiment harness: configuration, seeding, parallel trials,
//! and CSV/SVG output.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

pub mod output;
pub mod record;
pub mod run;
pub mod spec;

pub use output::{aggregate, emit_csv, emit_svg, plotted_metric, read_csv, SeriesPoint, CSV_COLUMNS};
pub use record::{Method, ResultRecord};
pub use run::{execute, run_experiment, trial_seed};
pub use spec::{AoConfig, ExperimentKind, ExperimentSpec, SweepPoint, SweepValue};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("non-finite result at {0}")]
    NonFinite(String),
    #[error(transparent)]
    Core(#[from] raibfd::Error),
}

impl HarnessError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        HarnessError::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }

    /// Process exit code: 2 for configuration, 3 for I/O, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io { .. } => 3,
            HarnessError::NonFinite(_) | HarnessError::Core(_) => 1,
        }
    }
}
