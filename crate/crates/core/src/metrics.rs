//! Segment-aware evaluation: F1-@K, F1-Composite and F1-Range.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A maximal run of positive labels, `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    fn overlap(&self, other: &Segment) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        hi.saturating_sub(lo)
    }
}

/// Maximal runs of `true`, in order.
pub fn segments(labels: &[bool]) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut start = None;
    for (t, &l) in labels.iter().enumerate() {
        match (l, start) {
            (true, None) => start = Some(t),
            (false, Some(s)) => {
                out.push(Segment { start: s, end: t });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Segment {
            start: s,
            end: labels.len(),
        });
    }
    out
}

fn check_lengths(pred: &[bool], truth: &[bool]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::ShapeMismatch {
            what: "prediction length",
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    Ok(())
}

/// Point adjustment at `k`: a truth segment whose detected fraction
/// strictly exceeds `k` is marked detected in full.
pub fn point_adjust_at_k(pred: &[bool], truth: &[bool], k: f64) -> Result<Vec<bool>> {
    check_lengths(pred, truth)?;
    let mut adjusted = pred.to_vec();
    for seg in segments(truth) {
        let hits = pred[seg.start..seg.end].iter().filter(|&&p| p).count();
        if hits as f64 / seg.len() as f64 > k {
            adjusted[seg.start..seg.end].iter_mut().for_each(|p| *p = true);
        }
    }
    Ok(adjusted)
}

/// Point-wise precision, recall and F1.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PointScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Confusion-matrix precision/recall/F1; empty denominators give 0.
pub fn point_f1(pred: &[bool], truth: &[bool]) -> Result<PointScores> {
    check_lengths(pred, truth)?;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = if tp + fn_ > 0 {
        tp as f64 / (tp + fn_) as f64
    } else {
        0.0
    };
    Ok(PointScores {
        precision,
        recall,
        f1: harmonic(precision, recall),
    })
}

/// The thresholds 0.0, 0.1, …, 1.0.
pub const K_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// Point-adjusted F1 at every `K` of [`K_GRID`].
pub fn f1_at_k_curve(pred: &[bool], truth: &[bool]) -> Result<[f64; 11]> {
    check_lengths(pred, truth)?;
    let segs = segments(truth);
    let hit_counts: Vec<usize> = segs
        .iter()
        .map(|s| pred[s.start..s.end].iter().filter(|&&p| p).count())
        .collect();
    let pred_pos = pred.iter().filter(|&&p| p).count();
    let truth_pos: usize = segs.iter().map(Segment::len).sum();
    let raw_tp: usize = hit_counts.iter().sum();

    let mut curve = [0.0; 11];
    for (out, &k) in curve.iter_mut().zip(&K_GRID) {
        // adjusting a segment turns its misses into true positives
        let mut tp = raw_tp;
        let mut positives = pred_pos;
        for (seg, &hits) in segs.iter().zip(&hit_counts) {
            if hits as f64 / seg.len() as f64 > k {
                tp += seg.len() - hits;
                positives += seg.len() - hits;
            }
        }
        let precision = if positives > 0 {
            tp as f64 / positives as f64
        } else {
            0.0
        };
        let recall = if truth_pos > 0 {
            tp as f64 / truth_pos as f64
        } else {
            0.0
        };
        *out = harmonic(precision, recall);
    }
    Ok(curve)
}

/// Mean of the point-adjusted F1 over the 11-point `K` grid.
pub fn f1_at_k(pred: &[bool], truth: &[bool]) -> Result<f64> {
    Ok(f1_at_k_curve(pred, truth)?.iter().sum::<f64>() / K_GRID.len() as f64)
}

/// Harmonic mean of point-wise precision and segment-wise recall.
pub fn f1_composite(pred: &[bool], truth: &[bool]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let segs = segments(truth);
    if segs.is_empty() {
        return Err(Error::Undefined("no ground-truth anomaly segments"));
    }
    let precision = point_f1(pred, truth)?.precision;
    let detected = segs
        .iter()
        .filter(|s| pred[s.start..s.end].iter().any(|&p| p))
        .count();
    let recall = detected as f64 / segs.len() as f64;
    Ok(harmonic(precision, recall))
}

/// Range-based precision and recall with existence weight 0, flat
/// positional bias and cardinality factor 1.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RangeScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn range_scores(pred: &[bool], truth: &[bool]) -> Result<RangeScores> {
    check_lengths(pred, truth)?;
    let real = segments(truth);
    if real.is_empty() {
        return Err(Error::Undefined("no ground-truth anomaly segments"));
    }
    let predicted = segments(pred);
    let coverage = |of: &[Segment], by: &[Segment]| -> f64 {
        if of.is_empty() {
            return 0.0;
        }
        of.iter()
            .map(|s| by.iter().map(|o| s.overlap(o)).sum::<usize>() as f64 / s.len() as f64)
            .sum::<f64>()
            / of.len() as f64
    };
    let recall = coverage(&real, &predicted);
    let precision = coverage(&predicted, &real);
    Ok(RangeScores {
        precision,
        recall,
        f1: harmonic(precision, recall),
    })
}

pub fn f1_range(pred: &[bool], truth: &[bool]) -> Result<f64> {
    Ok(range_scores(pred, truth)?.f1)
}

/// All metrics for one prediction against ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub f1_at_k: f64,
    pub f1_composite: f64,
    pub f1_range: f64,
    pub point_f1: f64,
    pub point_precision: f64,
    pub point_recall: f64,
    /// Point-adjusted F1 at K = 0.0, 0.1, …, 1.0.
    pub f1_at_k_curve: Vec<f64>,
}

impl MetricReport {
    pub fn compute(pred: &[bool], truth: &[bool]) -> Result<Self> {
        let curve = f1_at_k_curve(pred, truth)?;
        let point = point_f1(pred, truth)?;
        Ok(MetricReport {
            f1_at_k: curve.iter().sum::<f64>() / curve.len() as f64,
            f1_composite: f1_composite(pred, truth)?,
            f1_range: f1_range(pred, truth)?,
            point_f1: point.f1,
            point_precision: point.precision,
            point_recall: point.recall,
            f1_at_k_curve: curve.to_vec(),
        })
    }
}
