//! Series containers, preprocessing and windowing.

mod schema;
pub mod synth;

use alloc::{format, vec::Vec};
use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result};

pub use schema::{DiscreteFeature, FeatureSchema};
pub use synth::{generate, generate_with_clean, AnomalySpec, SynthConfig, SynthDataset};

/// A multivariate series: continuous values followed by integer-coded
/// discrete columns, plus optional per-timestep anomaly labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSeries {
    schema: FeatureSchema,
    values: Matrix,
    labels: Option<Vec<bool>>,
}

impl RawSeries {
    /// Validates that the matrix width matches the schema and that every
    /// value is finite and every discrete cell is an in-range integer code.
    pub fn new(schema: FeatureSchema, values: Matrix, labels: Option<Vec<bool>>) -> Result<Self> {
        if values.cols() != schema.width() {
            return Err(Error::ShapeMismatch {
                what: "series width",
                expected: schema.width(),
                actual: values.cols(),
            });
        }
        let c = schema.continuous_count();
        let names = schema.column_names();
        for (t, row) in values.iter_rows().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidData {
                        message: "non-finite value".into(),
                        row: Some(t),
                        column: Some(names[j].clone()),
                    });
                }
                if j >= c {
                    let card = schema.discrete()[j - c].cardinality;
                    if v < 0.0 || libm::trunc(v) != v || v >= card as f64 {
                        return Err(Error::InvalidData {
                            message: "discrete value out of cardinality".into(),
                            row: Some(t),
                            column: Some(names[j].clone()),
                        });
                    }
                }
            }
        }
        let series = RawSeries {
            schema,
            values,
            labels: None,
        };
        match labels {
            Some(l) => series.with_labels(l),
            None => Ok(series),
        }
    }

    pub fn with_labels(mut self, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != self.timesteps() {
            return Err(Error::InvalidData {
                message: format!(
                    "label length mismatch: {} labels for {} timesteps",
                    labels.len(),
                    self.timesteps()
                ),
                row: Some(labels.len().min(self.timesteps())),
                column: None,
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn timesteps(&self) -> usize {
        self.values.rows()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        self.values.row(t)
    }

    /// Discrete code of feature `j` at time `t`.
    pub fn code(&self, t: usize, j: usize) -> usize {
        self.values.get(t, self.schema.continuous_count() + j) as usize
    }

    /// Fraction of labeled timesteps, when labels are present.
    pub fn anomaly_ratio(&self) -> Option<f64> {
        let labels = self.labels.as_ref()?;
        if labels.is_empty() {
            return Some(0.0);
        }
        Some(labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64)
    }

    /// Rows `start..end` with matching labels.
    pub fn slice(&self, start: usize, end: usize) -> RawSeries {
        RawSeries {
            schema: self.schema.clone(),
            values: self.values.slice_rows(start, end),
            labels: self.labels.as_ref().map(|l| l[start..end].to_vec()),
        }
    }

    /// Chronological split: the last `fraction` of the rows become the
    /// validation part.
    pub fn split_tail(&self, fraction: f64) -> Result<(RawSeries, RawSeries)> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::config("validation fraction must be in [0, 1)"));
        }
        let n = self.timesteps();
        let tail = (n as f64 * fraction) as usize;
        let cut = n - tail;
        Ok((self.slice(0, cut), self.slice(cut, n)))
    }
}

/// Per-continuous-column min-max scaling fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    ranges: Vec<(f64, f64)>,
}

impl Normalizer {
    pub fn fit(train: &RawSeries) -> Result<Self> {
        if train.timesteps() < 2 {
            return Err(Error::SeriesTooShort {
                timesteps: train.timesteps(),
                required: 1,
            });
        }
        let c = train.schema().continuous_count();
        let mut ranges = alloc::vec![(f64::INFINITY, f64::NEG_INFINITY); c];
        for row in train.values().iter_rows() {
            for (r, &v) in ranges.iter_mut().zip(row) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
        Ok(Normalizer { ranges })
    }

    /// An identity transform for `c` columns.
    pub fn identity(c: usize) -> Self {
        Normalizer {
            ranges: alloc::vec![(0.0, 1.0); c],
        }
    }

    pub fn ranges(&self) -> &[(f64, f64)] {
        &self.ranges
    }

    /// Scales one continuous value. Constant columns map to 0.
    #[inline]
    pub fn scale(&self, col: usize, v: f64) -> f64 {
        let (lo, hi) = self.ranges[col];
        if hi > lo {
            (v - lo) / (hi - lo)
        } else {
            0.0
        }
    }

    /// Inverse of [`Normalizer::scale`]; constant columns map back to their
    /// training value.
    #[inline]
    pub fn unscale(&self, col: usize, v: f64) -> f64 {
        let (lo, hi) = self.ranges[col];
        if hi > lo {
            v * (hi - lo) + lo
        } else {
            lo
        }
    }

    fn check(&self, series: &RawSeries) -> Result<()> {
        let c = series.schema().continuous_count();
        if c != self.ranges.len() {
            return Err(Error::ShapeMismatch {
                what: "normalizer columns",
                expected: self.ranges.len(),
                actual: c,
            });
        }
        Ok(())
    }

    pub fn apply(&self, series: &RawSeries) -> Result<RawSeries> {
        self.check(series)?;
        Ok(self.map(series, |col, v| self.scale(col, v)))
    }

    pub fn invert(&self, series: &RawSeries) -> Result<RawSeries> {
        self.check(series)?;
        Ok(self.map(series, |col, v| self.unscale(col, v)))
    }

    fn map(&self, series: &RawSeries, f: impl Fn(usize, f64) -> f64) -> RawSeries {
        let mut values = series.values().clone();
        let c = self.ranges.len();
        for t in 0..values.rows() {
            for (col, v) in values.row_mut(t)[..c].iter_mut().enumerate() {
                *v = f(col, *v);
            }
        }
        RawSeries {
            schema: series.schema.clone(),
            values,
            labels: series.labels.clone(),
        }
    }
}

/// One-hot encodes every discrete cell: a `timesteps × d × e` tensor in
/// row-major order.
pub fn one_hot(series: &RawSeries) -> Result<Vec<f64>> {
    let schema = series.schema();
    let d = schema.discrete_count();
    if d == 0 {
        return Err(Error::NoDiscreteFeatures);
    }
    let e = schema.embedding_dim();
    let mut out = alloc::vec![0.0; series.timesteps() * d * e];
    for t in 0..series.timesteps() {
        for j in 0..d {
            out[(t * d + j) * e + series.code(t, j)] = 1.0;
        }
    }
    Ok(out)
}

/// Stride-1 sliding windows of length `window` with horizon-1 targets.
///
/// Discrete columns stay as integer codes; the forecaster expands them to
/// one-hot on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowBatch {
    schema: FeatureSchema,
    window: usize,
    inputs: Vec<f64>,
    targets: Matrix,
}

impl WindowBatch {
    pub fn len(&self) -> usize {
        self.targets.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.rows() == 0
    }

    pub fn window_len(&self) -> usize {
        self.window
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    /// Window `i` as `window × (c+d)` row-major values.
    pub fn input(&self, i: usize) -> &[f64] {
        let stride = self.window * self.schema.width();
        &self.inputs[i * stride..(i + 1) * stride]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        self.targets.row(i)
    }
}

/// Builds `timesteps − window` windows; window `i` covers rows
/// `[i, i + window)` and targets row `i + window`.
pub fn make_windows(series: &RawSeries, window: usize) -> Result<WindowBatch> {
    let n = series.timesteps();
    if window == 0 {
        return Err(Error::config("window length must be positive"));
    }
    if n <= window {
        return Err(Error::SeriesTooShort {
            timesteps: n,
            required: window,
        });
    }
    let width = series.schema().width();
    let count = n - window;
    let data = series.values().as_slice();
    let mut inputs = Vec::with_capacity(count * window * width);
    for i in 0..count {
        inputs.extend_from_slice(&data[i * width..(i + window) * width]);
    }
    Ok(WindowBatch {
        schema: series.schema().clone(),
        window,
        inputs,
        targets: series.values().slice_rows(window, n),
    })
}
