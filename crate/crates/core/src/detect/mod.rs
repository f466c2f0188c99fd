//! Threshold detectors and the forecast-then-score detection loop.
//!
//! A detector is fitted on raw training rows (continuous values in their
//! original units, discrete columns as integer codes). Its threshold is the
//! most extreme training score, so every training row is normal by
//! construction. At test time the detector only ever sees forecasts.

pub mod ecod;
pub mod gmm;
pub mod svdd;

use alloc::{format, vec::Vec};
use serde::{Deserialize, Serialize};

use crate::{
    data::{Normalizer, RawSeries},
    forecaster::{forecast_series, ForecastModel},
    metrics::segments,
    Error, Matrix, Result,
};

pub use ecod::EcodModel;
pub use gmm::{GmmConfig, GmmModel};
pub use svdd::{SvddConfig, SvddModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Gmm,
    Ecod,
    Svdd,
}

impl DetectorKind {
    /// Which side of the threshold counts as normal.
    pub fn orientation(self) -> Orientation {
        match self {
            DetectorKind::Gmm => Orientation::NormalHigh,
            DetectorKind::Ecod | DetectorKind::Svdd => Orientation::AnomalyHigh,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// Low scores are anomalous (log-likelihoods).
    NormalHigh,
    /// High scores are anomalous (tail or distance scores).
    AnomalyHigh,
}

/// A calibrated decision boundary. A score equal to `value` is normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub orientation: Orientation,
}

impl Threshold {
    #[inline]
    pub fn is_anomaly(&self, score: f64) -> bool {
        match self.orientation {
            Orientation::NormalHigh => score < self.value,
            Orientation::AnomalyHigh => score > self.value,
        }
    }
}

/// Threshold at the most extreme training score: the minimum for
/// normal-high detectors, the maximum for anomaly-high ones.
pub fn calibrate(kind: DetectorKind, train_scores: &[f64]) -> Result<Threshold> {
    if train_scores.is_empty() {
        return Err(Error::data("no training scores to calibrate on"));
    }
    if let Some(i) = train_scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::InvalidData {
            message: "non-finite training score".into(),
            row: Some(i),
            column: None,
        });
    }
    let orientation = kind.orientation();
    let value = match orientation {
        Orientation::NormalHigh => train_scores.iter().copied().fold(f64::INFINITY, f64::min),
        Orientation::AnomalyHigh => train_scores
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(Threshold { value, orientation })
}

/// Fitting parameters for each detector kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub kind: DetectorKind,
    pub gmm: GmmConfig,
    pub svdd: SvddConfig,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            kind: DetectorKind::Gmm,
            gmm: GmmConfig::default(),
            svdd: SvddConfig::default(),
        }
    }
}

/// A fitted scoring model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scorer {
    Gmm(GmmModel),
    Ecod(EcodModel),
    Svdd(SvddModel),
}

impl Scorer {
    pub fn kind(&self) -> DetectorKind {
        match self {
            Scorer::Gmm(_) => DetectorKind::Gmm,
            Scorer::Ecod(_) => DetectorKind::Ecod,
            Scorer::Svdd(_) => DetectorKind::Svdd,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Scorer::Gmm(m) => m.dim(),
            Scorer::Ecod(m) => m.dim(),
            Scorer::Svdd(m) => m.dim(),
        }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            Scorer::Gmm(m) => m.score(x),
            Scorer::Ecod(m) => m.score(x),
            Scorer::Svdd(m) => m.score(x),
        }
    }
}

/// A scorer plus its calibrated threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub scorer: Scorer,
    pub threshold: Threshold,
}

impl Detector {
    /// Fits the configured scorer on raw training rows and calibrates on
    /// their scores.
    pub fn fit(train: &Matrix, config: &DetectorConfig) -> Result<Self> {
        let scorer = match config.kind {
            DetectorKind::Gmm => Scorer::Gmm(gmm::fit(train, &config.gmm)?),
            DetectorKind::Ecod => Scorer::Ecod(ecod::fit(train)?),
            DetectorKind::Svdd => Scorer::Svdd(svdd::fit(train, &config.svdd)?),
        };
        let scores: Vec<f64> = train.iter_rows().map(|r| scorer.score(r)).collect();
        let threshold = calibrate(config.kind, &scores)?;
        Ok(Detector { scorer, threshold })
    }

    pub fn kind(&self) -> DetectorKind {
        self.scorer.kind()
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.scorer.score(x)
    }

    pub fn is_anomaly(&self, x: &[f64]) -> bool {
        self.threshold.is_anomaly(self.score(x))
    }

    /// Scores and flags every row of `rows`.
    pub fn classify(&self, rows: &Matrix) -> Result<(Vec<f64>, Vec<bool>)> {
        if rows.cols() != self.scorer.dim() {
            return Err(Error::ShapeMismatch {
                what: "detector input width",
                expected: self.scorer.dim(),
                actual: rows.cols(),
            });
        }
        let scores: Vec<f64> = rows.iter_rows().map(|r| self.score(r)).collect();
        let flags = scores.iter().map(|&s| self.threshold.is_anomaly(s)).collect();
        Ok((scores, flags))
    }
}

/// Timing of the first flag around one labeled segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentLatency {
    pub start: usize,
    pub end: usize,
    /// First flagged timestep minus `start`; negative when the flag falls in
    /// the lookback before the segment, `None` when nothing was flagged.
    pub latency: Option<i64>,
}

/// Per-timestep outcome of proactive detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    /// Timestep of the first score; equals the window length.
    pub offset: usize,
    pub scores: Vec<f64>,
    pub flags: Vec<bool>,
    pub latency: Option<Vec<SegmentLatency>>,
}

impl DetectionResult {
    pub fn flagged(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// Flags padded with `false` for the first `offset` timesteps.
    pub fn full_length_flags(&self) -> Vec<bool> {
        let mut out = alloc::vec![false; self.offset];
        out.extend_from_slice(&self.flags);
        out
    }
}

/// Latency of the first flag for each labeled segment.
///
/// `flags[i]` refers to timestep `offset + i`. The search for segment
/// `[s, e)` starts `lookback` steps before `s`, but never before the end of
/// the previous segment.
pub fn segment_latencies(
    labels: &[bool],
    flags: &[bool],
    offset: usize,
    lookback: usize,
) -> Vec<SegmentLatency> {
    let mut prev_end = 0;
    let mut out = Vec::new();
    for seg in segments(labels) {
        let from = seg.start.saturating_sub(lookback).max(prev_end).max(offset);
        let first = (from..seg.end).find(|&t| flags.get(t - offset).copied().unwrap_or(false));
        out.push(SegmentLatency {
            start: seg.start,
            end: seg.end,
            latency: first.map(|t| t as i64 - seg.start as i64),
        });
        prev_end = seg.end;
    }
    out
}

/// Forecasts every test timestep from observed history, scores the
/// forecasts, and flags those beyond the threshold. Ground-truth test rows
/// never reach the detector; labels only feed the latency summary.
pub fn proactive_detect(
    model: &ForecastModel,
    normalizer: &Normalizer,
    detector: &Detector,
    test: &RawSeries,
    lookback: usize,
) -> Result<DetectionResult> {
    if detector.scorer.dim() != test.schema().width() {
        return Err(Error::ShapeMismatch {
            what: "detector space vs forecast space",
            expected: detector.scorer.dim(),
            actual: test.schema().width(),
        });
    }
    let forecasts = forecast_series(model, normalizer, test)?;
    let (scores, flags) = detector.classify(forecasts.values())?;
    let offset = model.shape().window;
    let latency = test
        .labels()
        .map(|labels| segment_latencies(labels, &flags, offset, lookback));
    Ok(DetectionResult {
        offset,
        scores,
        flags,
        latency,
    })
}

/// Mean, min and max of the defined latencies, plus the count of segments
/// detected no later than their first labeled point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub segments: usize,
    pub detected: usize,
    pub early_or_on_time: usize,
    pub mean: Option<f64>,
    pub min: Option<i64>,
    pub max: Option<i64>,
}

impl LatencySummary {
    pub fn from_latencies(lat: &[SegmentLatency]) -> Self {
        let found: Vec<i64> = lat.iter().filter_map(|l| l.latency).collect();
        LatencySummary {
            segments: lat.len(),
            detected: found.len(),
            early_or_on_time: found.iter().filter(|&&l| l <= 0).count(),
            mean: (!found.is_empty())
                .then(|| found.iter().sum::<i64>() as f64 / found.len() as f64),
            min: found.iter().copied().min(),
            max: found.iter().copied().max(),
        }
    }
}

impl core::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            DetectorKind::Gmm => "gmm",
            DetectorKind::Ecod => "ecod",
            DetectorKind::Svdd => "svdd",
        })
    }
}

impl core::str::FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gmm" => Ok(DetectorKind::Gmm),
            "ecod" => Ok(DetectorKind::Ecod),
            "svdd" | "deepsvdd" => Ok(DetectorKind::Svdd),
            other => Err(Error::config(format!("unknown detector kind {other:?}"))),
        }
    }
}
