//! Files, configuration and orchestration for the proactive anomaly
//! detection pipeline built on [`protad_core`].
//!
//! Series are CSV with one column per schema feature; schemas, models,
//! detectors and reports are JSON. Every JSON document carries a
//! `format_version`.

pub mod commands;
pub mod config;
pub mod error;
pub mod files;
pub mod persist;
pub mod report;

pub use config::PipelineConfig;
pub use error::{CliError, Result};
pub use protad_core as core;
