//! Fourier forecastability analysis of short segments.
//!
//! Every segment of length `n` is mapped to the magnitudes of its `n/2 + 1`
//! real-DFT coefficients. Anomaly segments are then compared with training
//! segments in two ways: whether the sets of present frequencies agree, and
//! whether each anomaly magnitude vector lies in the convex hull of the
//! training magnitude vectors.

mod simplex;

use alloc::{collections::BTreeSet, string::String, vec::Vec};
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{data::RawSeries, Error, Matrix, Result};

pub use simplex::in_convex_hull;

pub const SEGMENT_LEN: usize = 6;
pub const DEFAULT_EPSILON: f64 = 1e-9;
pub const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    pub segment_length: usize,
    pub epsilon: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            segment_length: SEGMENT_LEN,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        if self.segment_length < 2 {
            return Err(Error::config("segment_length must be at least 2"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config("epsilon must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// `X_k = Σ_t v_t·exp(−2πi·k·t/n)` for `k = 0..=n/2`, by direct summation.
pub fn rdft(segment: &[f64]) -> Result<Vec<Complex64>> {
    let n = segment.len();
    if n == 0 {
        return Err(Error::data("empty segment"));
    }
    Ok((0..=n / 2)
        .map(|k| {
            segment
                .iter()
                .enumerate()
                .map(|(t, &v)| {
                    let angle = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                    Complex64::new(v * libm::cos(angle), v * libm::sin(angle))
                })
                .sum()
        })
        .collect())
}

/// Reconstructs a real segment of length `n` from its half spectrum.
pub fn irdft(coefficients: &[Complex64], n: usize) -> Result<Vec<f64>> {
    if n == 0 || coefficients.len() != n / 2 + 1 {
        return Err(Error::ShapeMismatch {
            what: "half spectrum length",
            expected: n / 2 + 1,
            actual: coefficients.len(),
        });
    }
    Ok((0..n)
        .map(|t| {
            let mut acc = 0.0;
            for (k, x) in coefficients.iter().enumerate() {
                // bins other than DC and Nyquist stand for a conjugate pair
                let weight = if k == 0 || 2 * k == n { 1.0 } else { 2.0 };
                let angle = 2.0 * PI * ((k * t) % n) as f64 / n as f64;
                acc += weight * (x.re * libm::cos(angle) - x.im * libm::sin(angle));
            }
            acc / n as f64
        })
        .collect())
}

/// Indices whose magnitude strictly exceeds `epsilon`.
pub fn basis_set(magnitudes: &[f64], epsilon: f64) -> Vec<usize> {
    magnitudes
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > epsilon)
        .map(|(k, _)| k)
        .collect()
}

/// A segment, its coefficient magnitudes and its basis set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    /// Index of the last point of the segment in its source series.
    pub end: usize,
    pub values: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub basis: Vec<usize>,
}

impl SpectralSample {
    pub fn new(end: usize, values: Vec<f64>, config: &SpectralConfig) -> Result<Self> {
        if values.len() != config.segment_length {
            return Err(Error::ShapeMismatch {
                what: "segment length",
                expected: config.segment_length,
                actual: values.len(),
            });
        }
        let magnitudes: Vec<f64> = rdft(&values)?.iter().map(|x| x.norm()).collect();
        let basis = basis_set(&magnitudes, config.epsilon);
        Ok(SpectralSample {
            end,
            values,
            magnitudes,
            basis,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentMode {
    /// Every stride-1 window.
    Train,
    /// Windows whose last point is labeled anomalous.
    Anomaly,
}

/// Windows of `len` points as `(end index, values)`.
pub fn extract_segments(
    values: &[f64],
    labels: Option<&[bool]>,
    mode: SegmentMode,
    len: usize,
) -> Result<Vec<(usize, Vec<f64>)>> {
    if len == 0 || values.len() < len {
        return Err(Error::SeriesTooShort {
            timesteps: values.len(),
            required: len.max(1),
        });
    }
    let keep: &dyn Fn(usize) -> bool = match (mode, labels) {
        (SegmentMode::Train, _) => &|_| true,
        (SegmentMode::Anomaly, Some(l)) => {
            if l.len() != values.len() {
                return Err(Error::ShapeMismatch {
                    what: "label length",
                    expected: values.len(),
                    actual: l.len(),
                });
            }
            &move |t| l[t]
        }
        (SegmentMode::Anomaly, None) => {
            return Err(Error::data("anomaly segments need labels"));
        }
    };
    let out: Vec<(usize, Vec<f64>)> = (len - 1..values.len())
        .filter(|&t| keep(t))
        .map(|t| (t, values[t + 1 - len..=t].to_vec()))
        .collect();
    if out.is_empty() {
        return Err(Error::data("no qualifying segments"));
    }
    Ok(out)
}

/// `true` when the union of training basis sets equals that of the anomaly
/// samples.
pub fn superset_equal(train: &[SpectralSample], anomaly: &[SpectralSample]) -> Result<bool> {
    if train.is_empty() || anomaly.is_empty() {
        return Err(Error::data("superset comparison needs samples on both sides"));
    }
    Ok(union(train) == union(anomaly))
}

fn union(samples: &[SpectralSample]) -> BTreeSet<usize> {
    samples.iter().flat_map(|s| s.basis.iter().copied()).collect()
}

/// The convex polytope spanned by a set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    points: Matrix,
}

impl Polytope {
    pub fn new(points: Matrix) -> Result<Self> {
        if points.rows() == 0 {
            return Err(Error::data("polytope needs at least one point"));
        }
        if points.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::data("polytope points must be finite"));
        }
        Ok(Polytope { points })
    }

    pub fn from_samples(samples: &[SpectralSample]) -> Result<Self> {
        let rows: Vec<&[f64]> = samples.iter().map(|s| s.magnitudes.as_slice()).collect();
        let dim = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            data.extend_from_slice(r);
        }
        Polytope::new(Matrix::from_vec(samples.len(), dim, data)?)
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn contains(&self, query: &[f64]) -> Result<bool> {
        in_convex_hull(&self.points, query, FEASIBILITY_TOL)
    }
}

/// Shorthand for [`Polytope::contains`] without keeping the polytope.
pub fn hull_membership(points: &Matrix, query: &[f64]) -> Result<bool> {
    in_convex_hull(points, query, FEASIBILITY_TOL)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullPoint {
    pub end_index: usize,
    pub inside: bool,
    pub magnitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureHull {
    pub feature: String,
    pub train_samples: usize,
    pub anomaly_samples: usize,
    pub superset_equal: bool,
    pub train_basis: Vec<usize>,
    pub anomaly_basis: Vec<usize>,
    pub outside: usize,
    pub outside_fraction: f64,
    pub points: Vec<HullPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullReport {
    pub segment_length: usize,
    pub epsilon: f64,
    pub features: Vec<FeatureHull>,
    pub anomaly_samples: usize,
    pub outside: usize,
    pub pooled_outside_fraction: f64,
}

fn samples(
    values: &[f64],
    labels: Option<&[bool]>,
    mode: SegmentMode,
    config: &SpectralConfig,
) -> Result<Vec<SpectralSample>> {
    extract_segments(values, labels, mode, config.segment_length)?
        .into_iter()
        .map(|(end, v)| SpectralSample::new(end, v, config))
        .collect()
}

/// Per continuous channel: the training polytope of magnitude vectors and
/// the membership of every anomaly-ending test segment.
pub fn forecastability_report(
    train: &RawSeries,
    test: &RawSeries,
    config: &SpectralConfig,
) -> Result<HullReport> {
    config.validate()?;
    let schema = train.schema();
    if schema != test.schema() {
        return Err(Error::data("train and test schemas differ"));
    }
    if schema.continuous_count() == 0 {
        return Err(Error::data("spectral analysis needs continuous features"));
    }
    let labels = test
        .labels()
        .ok_or_else(|| Error::data("spectral analysis needs test labels"))?;

    let mut features = Vec::with_capacity(schema.continuous_count());
    for (col, name) in schema.continuous().iter().enumerate() {
        let train_vals = train.values().column(col);
        let test_vals = test.values().column(col);
        let train_s = samples(&train_vals, None, SegmentMode::Train, config)?;
        let anomaly_s = samples(&test_vals, Some(labels), SegmentMode::Anomaly, config)?;
        let polytope = Polytope::from_samples(&train_s)?;
        let points = anomaly_s
            .iter()
            .map(|s| {
                Ok(HullPoint {
                    end_index: s.end,
                    inside: polytope.contains(&s.magnitudes)?,
                    magnitudes: s.magnitudes.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let outside = points.iter().filter(|p| !p.inside).count();
        features.push(FeatureHull {
            feature: name.clone(),
            train_samples: train_s.len(),
            anomaly_samples: anomaly_s.len(),
            superset_equal: superset_equal(&train_s, &anomaly_s)?,
            train_basis: union(&train_s).into_iter().collect(),
            anomaly_basis: union(&anomaly_s).into_iter().collect(),
            outside,
            outside_fraction: outside as f64 / anomaly_s.len() as f64,
            points,
        });
    }
    let anomaly_samples: usize = features.iter().map(|f| f.anomaly_samples).sum();
    let outside: usize = features.iter().map(|f| f.outside).sum();
    Ok(HullReport {
        segment_length: config.segment_length,
        epsilon: config.epsilon,
        features,
        anomaly_samples,
        outside,
        pooled_outside_fraction: outside as f64 / anomaly_samples as f64,
    })
}
