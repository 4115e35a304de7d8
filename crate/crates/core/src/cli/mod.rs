//! Configuration-driven experiment runner behind the `wavedecay` binary.
//!
//! Each mode reads an [`ExperimentConfig`], writes CSV (and optionally SVG)
//! artifacts into an output directory and returns a [`Report`]. Reports are
//! written once, after every check has run.

mod config;
mod modes;
mod plot;
mod report;
mod verify;

pub use config::{
    parse_config, DampingConfig, EnvelopeConfig, ExperimentConfig, FeedbackConfig, H0Config, InfinityConfig,
    InitialConfig, MediumConfig, Mode, OriginConfig, OutputConfig, ProbeConfig, RaytraceConfig, SimulateConfig,
    SourceConfig, VerifyConfig,
};
pub use modes::run_mode;
pub use plot::{emit_plot, parse_csv, render_svg, Axes, Table};
pub use report::{fmt_f64, write_csv, Check, Report};

use std::path::PathBuf;

use thiserror::Error;

/// Environment variable capping the worker-thread count (0 = automatic).
pub const THREADS_ENV: &str = "WAVEDECAY_THREADS";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid value for {key}: {constraint}")]
    Validation { key: String, constraint: String },
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("malformed CSV: {0}")]
    MalformedCsv(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("{failed} check(s) failed")]
    ChecksFailed { failed: usize },
}

impl CliError {
    /// 1 = configuration or I/O, 2 = numerical, 3 = failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } | CliError::Io { .. } => 1,
            CliError::MalformedCsv(_) | CliError::Numeric(_) => 2,
            CliError::ChecksFailed { .. } => 3,
        }
    }
}

macro_rules! numeric_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Numeric(e.to_string())
            }
        }
    )*};
}

numeric_from!(
    crate::envelope::EnvelopeError,
    crate::feedback::FeedbackError,
    crate::feedback::MonotoneError,
    crate::wavesim::SimError,
    crate::raytrace::RayError
);

/// Configures the global thread pool from [`THREADS_ENV`]. Unset, empty or 0
/// leaves the pool size automatic.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(());
    }
    let n: usize = raw.parse().map_err(|_| CliError::Validation {
        key: THREADS_ENV.into(),
        constraint: format!("non-negative integer, got '{raw}'"),
    })?;
    if n > 0 {
        // a second initialization (e.g. in tests) keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
