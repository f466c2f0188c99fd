//! The pipeline stages behind each subcommand.

use std::{path::Path, time::Instant};

use protad_core::{
    data::{generate, make_windows, Normalizer, RawSeries},
    detect::{proactive_detect, segment_latencies, Detector, DetectionResult, LatencySummary},
    forecaster::{train as train_model, TrainOutcome},
    metrics::MetricReport,
    spectral::{forecastability_report, HullReport},
};
use serde::{Deserialize, Serialize};

use crate::{
    config::PipelineConfig,
    error::{CliError, Result},
    files::{
        load_csv, load_flags, load_labels, load_schema, write_csv, write_indexed, write_json,
        write_labels, write_text, FORMAT_VERSION,
    },
    persist::{DetectorFile, ModelFile},
    report::{DataSummary, DetectionSummary, RunReport, TrainingSummary},
};

pub const MODEL_FILE: &str = "model.json";
pub const DETECTOR_FILE: &str = "detector.json";

fn record(
    cfg: &PipelineConfig,
    stage: &str,
    started: Instant,
    update: impl FnOnce(&mut RunReport),
) -> Result<()> {
    let mut report = RunReport::open(&cfg.output_dir)?;
    report.config = Some(cfg.clone());
    update(&mut report);
    report
        .timings
        .insert(stage.to_string(), started.elapsed().as_secs_f64());
    report.save(&cfg.output_dir)
}

fn load_train(cfg: &PipelineConfig) -> Result<RawSeries> {
    let schema = load_schema(&cfg.schema_path())?;
    load_csv(&cfg.train_path(), &schema)
}

/// Writes `train.csv`, `test.csv`, `labels.csv` and `schema.json`.
pub fn synth(cfg: &PipelineConfig) -> Result<(RawSeries, RawSeries)> {
    let started = Instant::now();
    let (train, test) = generate(&cfg.synth, cfg.seed)?;
    let dir = &cfg.output_dir;
    write_csv(&dir.join("train.csv"), &train)?;
    write_csv(&dir.join("test.csv"), &test)?;
    write_labels(&dir.join("labels.csv"), test.labels().unwrap_or(&[]))?;
    write_json(&dir.join("schema.json"), train.schema())?;
    record(cfg, "synth", started, |r| {
        r.data = Some(DataSummary::new(&train, Some(&test)));
    })?;
    Ok((train, test))
}

/// Trains the forecaster on the normalized training series and writes
/// `model.json` and `loss_trace.csv`.
pub fn train(cfg: &PipelineConfig) -> Result<TrainOutcome> {
    let started = Instant::now();
    let series = load_train(cfg)?;
    let normalizer = Normalizer::fit(&series)?;
    let windows = make_windows(&normalizer.apply(&series)?, cfg.window)?;
    let outcome = train_model(&windows, &cfg.train)?;
    ModelFile::new(series.schema(), &normalizer, &outcome.model).save(&cfg.out(MODEL_FILE))?;

    let mut trace = String::from("iteration,loss_continuous,loss_discrete,loss_total\n");
    for (i, l) in outcome.loss_trace.iter().enumerate() {
        trace.push_str(&format!("{i},{},{},{}\n", l.continuous, l.discrete, l.total));
    }
    write_text(&cfg.out("loss_trace.csv"), &trace)?;
    record(cfg, "train", started, |r| {
        r.training = Some(TrainingSummary::new(&outcome.loss_trace));
        if r.data.is_none() {
            r.data = Some(DataSummary::new(&series, None));
        }
    })?;
    Ok(outcome)
}

/// Fits the configured detector on raw training rows and writes
/// `detector.json`.
pub fn calibrate(cfg: &PipelineConfig) -> Result<Detector> {
    let started = Instant::now();
    let series = load_train(cfg)?;
    let detector = Detector::fit(series.values(), &cfg.detector)?;
    DetectorFile {
        format_version: FORMAT_VERSION,
        schema: series.schema().clone(),
        detector: detector.clone(),
    }
    .save(&cfg.out(DETECTOR_FILE))?;
    record(cfg, "calibrate", started, |r| r.threshold = Some(detector.threshold))?;
    Ok(detector)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectReport {
    pub format_version: u32,
    pub threshold: protad_core::detect::Threshold,
    #[serde(flatten)]
    pub detection: DetectionSummary,
}

/// Forecasts the test series, scores every forecast and writes
/// `scores.csv`, `flags.csv` and `detect_report.json`.
///
/// Labels are read only after detection, for the latency summary.
pub fn detect(cfg: &PipelineConfig) -> Result<DetectionResult> {
    let started = Instant::now();
    let model_file = ModelFile::load(&cfg.out(MODEL_FILE))?;
    let detector_file = DetectorFile::load(&cfg.out(DETECTOR_FILE))?;
    if model_file.schema != detector_file.schema {
        return Err(CliError::Data(
            "model and detector were fitted on different schemas".into(),
        ));
    }
    let test = load_csv(&cfg.test_path(), &model_file.schema)?;
    let model = model_file.model()?;
    let mut result = proactive_detect(
        &model,
        &model_file.normalizer,
        &detector_file.detector,
        &test,
        cfg.metrics.lookback,
    )?;

    let labels_path = cfg.labels_path();
    let labeled = if labels_path.exists() {
        let labels = load_labels(&labels_path)?;
        if labels.len() != test.timesteps() {
            return Err(CliError::Data(format!(
                "{}: {} labels for {} test rows",
                labels_path.display(),
                labels.len(),
                test.timesteps()
            )));
        }
        result.latency = Some(segment_latencies(
            &labels,
            &result.flags,
            result.offset,
            cfg.metrics.lookback,
        ));
        Some(test.clone().with_labels(labels)?)
    } else {
        None
    };

    write_indexed(&cfg.out("scores.csv"), "score", result.offset, &result.scores)?;
    write_indexed(
        &cfg.out("flags.csv"),
        "flag",
        result.offset,
        result.flags.iter().map(|&f| u8::from(f)),
    )?;
    let summary = DetectionSummary {
        offset: result.offset,
        timesteps: result.flags.len(),
        flagged: result.flagged(),
        latency_summary: result.latency.as_deref().map(LatencySummary::from_latencies),
        latency: result.latency.clone(),
    };
    write_json(
        &cfg.out("detect_report.json"),
        &DetectReport {
            format_version: FORMAT_VERSION,
            threshold: detector_file.detector.threshold,
            detection: summary.clone(),
        },
    )?;
    let train = load_csv(&cfg.train_path(), &model_file.schema).ok();
    record(cfg, "detect", started, |r| {
        r.detection = Some(summary);
        r.threshold = Some(detector_file.detector.threshold);
        if let Some(train) = &train {
            r.data = Some(DataSummary::new(train, Some(labeled.as_ref().unwrap_or(&test))));
        }
    })?;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub format_version: u32,
    #[serde(flatten)]
    pub metrics: MetricReport,
}

/// Scores predictions against labels. A `timestep` column in the prediction
/// file aligns each flag with its label; without one the lengths must match.
pub fn evaluate(pred: &Path, labels: &Path) -> Result<MetricReport> {
    let (times, flags) = load_flags(pred, "flag")?;
    let truth = load_labels(labels)?;
    let truth = match times {
        Some(times) => times
            .iter()
            .map(|&t| {
                truth.get(t).copied().ok_or_else(|| {
                    CliError::Data(format!(
                        "{}: timestep {t} has no label ({} labels)",
                        pred.display(),
                        truth.len()
                    ))
                })
            })
            .collect::<Result<Vec<bool>>>()?,
        None if truth.len() == flags.len() => truth,
        None => {
            return Err(CliError::Data(format!(
                "{} predictions but {} labels",
                flags.len(),
                truth.len()
            )))
        }
    };
    Ok(MetricReport::compute(&flags, &truth)?)
}

/// Evaluates `pred` (default: the `flags.csv` of the last detection) and
/// writes `metrics.json`.
pub fn eval(cfg: &PipelineConfig, pred: Option<&Path>, labels: Option<&Path>) -> Result<MetricReport> {
    let started = Instant::now();
    let pred = pred.map_or_else(|| cfg.out("flags.csv"), Path::to_path_buf);
    let labels = labels.map_or_else(|| cfg.labels_path(), Path::to_path_buf);
    let report = evaluate(&pred, &labels)?;
    write_json(
        &cfg.out("metrics.json"),
        &MetricsFile {
            format_version: FORMAT_VERSION,
            metrics: report.clone(),
        },
    )?;
    record(cfg, "eval", started, |r| r.metrics = Some(report.clone()))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullFile {
    pub format_version: u32,
    #[serde(flatten)]
    pub report: HullReport,
}

/// Runs the forecastability analysis and writes `hull_report.json` and the
/// plot table `hull_points.csv`.
pub fn spectral(cfg: &PipelineConfig) -> Result<HullReport> {
    let started = Instant::now();
    let train = load_train(cfg)?;
    let labels = load_labels(&cfg.labels_path())?;
    let test = load_csv(&cfg.test_path(), train.schema())?.with_labels(labels)?;
    let report = forecastability_report(&train, &test, &cfg.spectral)?;
    write_json(
        &cfg.out("hull_report.json"),
        &HullFile {
            format_version: FORMAT_VERSION,
            report: report.clone(),
        },
    )?;

    let bins = cfg.spectral.segment_length / 2 + 1;
    let mut csv = String::from("feature,segment_end_index,inside");
    for k in 1..=bins {
        csv.push_str(&format!(",a{k}"));
    }
    csv.push('\n');
    for f in &report.features {
        for p in &f.points {
            csv.push_str(&format!("{},{},{}", f.feature, p.end_index, u8::from(p.inside)));
            for a in &p.magnitudes {
                csv.push_str(&format!(",{a}"));
            }
            csv.push('\n');
        }
    }
    write_text(&cfg.out("hull_points.csv"), &csv)?;
    record(cfg, "spectral", started, |r| r.hull = Some(report.clone()))?;
    Ok(report)
}
