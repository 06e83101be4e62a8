//! Experiment runner: configuration, the experiment catalogue and report
//! output (CSV, JSON, SVG).

pub mod config;
pub mod emit;
pub mod experiments;
pub mod report;

use std::path::PathBuf;

pub use config::{ExperimentConfig, ExperimentId, Format, Overrides};
pub use experiments::run;
pub use report::{Cell, Check, ExperimentReport, Fit};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid {field}: {message}")]
    Usage { field: String, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("numeric failure: {0}")]
    Numeric(String),
}
