//! The run report every subcommand adds its section to.

use std::{collections::BTreeMap, path::Path};

use protad_core::{
    data::RawSeries,
    detect::{LatencySummary, SegmentLatency, Threshold},
    forecaster::Losses,
    metrics::MetricReport,
    spectral::HullReport,
};
use serde::{Deserialize, Serialize};

use crate::{
    config::PipelineConfig,
    error::Result,
    files::{read_json, write_json, FORMAT_VERSION},
};

pub const REPORT_FILE: &str = "run_report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub train_timesteps: usize,
    pub test_timesteps: Option<usize>,
    pub continuous: usize,
    pub discrete: usize,
    /// Fraction of labeled test timesteps.
    pub anomaly_ratio: Option<f64>,
}

impl DataSummary {
    pub fn new(train: &RawSeries, test: Option<&RawSeries>) -> Self {
        DataSummary {
            train_timesteps: train.timesteps(),
            test_timesteps: test.map(RawSeries::timesteps),
            continuous: train.schema().continuous_count(),
            discrete: train.schema().discrete_count(),
            anomaly_ratio: test.and_then(RawSeries::anomaly_ratio),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub continuous: f64,
    pub discrete: f64,
    pub total: f64,
}

impl From<Losses> for LossRow {
    fn from(l: Losses) -> Self {
        LossRow {
            continuous: l.continuous,
            discrete: l.discrete,
            total: l.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub iterations: usize,
    pub first: Option<LossRow>,
    pub last: Option<LossRow>,
    pub min_total: Option<f64>,
}

impl TrainingSummary {
    pub fn new(trace: &[Losses]) -> Self {
        TrainingSummary {
            iterations: trace.len(),
            first: trace.first().copied().map(Into::into),
            last: trace.last().copied().map(Into::into),
            min_total: trace.iter().map(|l| l.total).reduce(f64::min),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSummary {
    /// Timestep of the first forecast.
    pub offset: usize,
    pub timesteps: usize,
    pub flagged: usize,
    pub latency: Option<Vec<SegmentLatency>>,
    pub latency_summary: Option<LatencySummary>,
}

/// Everything learned about one pipeline run. Sections stay `null` until
/// the subcommand producing them has run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format_version: u32,
    pub config: Option<PipelineConfig>,
    pub data: Option<DataSummary>,
    pub training: Option<TrainingSummary>,
    pub threshold: Option<Threshold>,
    pub detection: Option<DetectionSummary>,
    pub metrics: Option<MetricReport>,
    pub hull: Option<HullReport>,
    /// Wall-clock seconds per subcommand.
    pub timings: BTreeMap<String, f64>,
}

impl Default for RunReport {
    fn default() -> Self {
        RunReport {
            format_version: FORMAT_VERSION,
            config: None,
            data: None,
            training: None,
            threshold: None,
            detection: None,
            metrics: None,
            hull: None,
            timings: BTreeMap::new(),
        }
    }
}

impl RunReport {
    /// Loads the report in `dir`, or starts an empty one.
    pub fn open(dir: &Path) -> Result<Self> {
        let path = dir.join(REPORT_FILE);
        if path.exists() {
            read_json(&path)
        } else {
            Ok(RunReport::default())
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(REPORT_FILE), self)
    }
}
