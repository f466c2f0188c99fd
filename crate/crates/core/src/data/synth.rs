//! Seeded synthetic datasets with mixed continuous/discrete channels and
//! level-shift anomalies preceded by precursor ramps.

use alloc::{vec, vec::Vec};
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{FeatureSchema, RawSeries};
use crate::{Error, Matrix, Result};

/// Where and how strongly anomalies are injected into the test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnomalySpec {
    pub count: usize,
    pub length: usize,
    /// Level shift in units of the channel amplitude.
    pub magnitude: f64,
    /// Number of unlabeled timesteps before each segment carrying a ramp.
    pub precursor_len: usize,
    /// Peak of the precursor ramp as a fraction of `magnitude`.
    pub precursor_scale: f64,
}

impl Default for AnomalySpec {
    fn default() -> Self {
        AnomalySpec {
            count: 3,
            length: 20,
            magnitude: 3.0,
            precursor_len: 5,
            precursor_scale: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub continuous: usize,
    pub cardinalities: Vec<usize>,
    pub embedding_dim: Option<usize>,
    pub train_len: usize,
    pub test_len: usize,
    /// Base period of the sinusoid; channel `i` uses `period * (1 + 0.37 i)`.
    pub period: f64,
    pub amplitude: f64,
    /// Total drift of the linear trend across train and test, in amplitude units.
    pub trend: f64,
    pub noise: f64,
    /// Probability that a discrete channel keeps its previous code.
    pub stay_prob: f64,
    pub anomaly: AnomalySpec,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            continuous: 2,
            cardinalities: vec![2, 3],
            embedding_dim: None,
            train_len: 2000,
            test_len: 1000,
            period: 24.0,
            amplitude: 1.0,
            trend: 0.5,
            noise: 0.02,
            stay_prob: 0.9,
            anomaly: AnomalySpec::default(),
        }
    }
}

impl SynthConfig {
    pub fn schema(&self) -> Result<FeatureSchema> {
        FeatureSchema::anonymous(self.continuous, &self.cardinalities, self.embedding_dim)
    }

    fn validate(&self) -> Result<()> {
        if self.train_len == 0 || self.test_len == 0 {
            return Err(Error::config("train_len and test_len must be positive"));
        }
        if !(0.0..=1.0).contains(&self.stay_prob) {
            return Err(Error::config("stay_prob must be in [0, 1]"));
        }
        if !(self.period > 0.0) || !self.amplitude.is_finite() || !(self.noise >= 0.0) {
            return Err(Error::config(
                "period must be positive, amplitude finite, noise nonnegative",
            ));
        }
        let a = &self.anomaly;
        if a.count > 0 {
            if a.length == 0 {
                return Err(Error::config("anomaly length must be positive"));
            }
            if a.count * a.length >= self.test_len {
                return Err(Error::config("anomalies would cover the whole test split"));
            }
            if self.test_len / a.count < a.length + a.precursor_len + MIN_GAP {
                return Err(Error::config(
                    "test split too short for the requested anomaly segments",
                ));
            }
            if !a.magnitude.is_finite() || !a.precursor_scale.is_finite() {
                return Err(Error::config("anomaly magnitudes must be finite"));
            }
        }
        Ok(())
    }
}

/// Clean gap kept in front of each precursor.
const MIN_GAP: usize = 10;

/// Train split, labeled test split, and the test split before injection.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub train: RawSeries,
    pub test: RawSeries,
    pub clean_test: RawSeries,
}

/// Generates `(train, test)`; identical config and seed give identical output.
pub fn generate(config: &SynthConfig, seed: u64) -> Result<(RawSeries, RawSeries)> {
    let ds = generate_with_clean(config, seed)?;
    Ok((ds.train, ds.test))
}

/// Like [`generate`] but also returns the uninjected test split. The clean
/// series and the anomaly placement come from separate random streams, so
/// the clean split does not depend on the anomaly spec.
pub fn generate_with_clean(config: &SynthConfig, seed: u64) -> Result<SynthDataset> {
    config.validate()?;
    let schema = config.schema()?;
    let c = config.continuous;
    let cards = &config.cardinalities;
    let width = schema.width();
    let total = config.train_len + config.test_len;

    let mut base = ChaCha8Rng::seed_from_u64(seed);
    base.set_stream(0);

    let channels: Vec<(f64, f64, f64)> = (0..c)
        .map(|i| {
            let period = config.period * (1.0 + 0.37 * i as f64);
            let phase = base.random_range(0.0..2.0 * PI);
            let level = base.random_range(-1.0..1.0) * config.amplitude;
            (period, phase, level)
        })
        .collect();
    let slope = config.trend * config.amplitude / total as f64;

    let mut codes: Vec<usize> = cards.iter().map(|&k| base.random_range(0..k)).collect();
    let mut data = Vec::with_capacity(total * width);
    for t in 0..total {
        let tf = t as f64;
        for &(period, phase, level) in &channels {
            let noise: f64 = base.sample(StandardNormal);
            let v = level
                + slope * tf
                + config.amplitude * libm::sin(2.0 * PI * tf / period + phase)
                + config.noise * noise;
            data.push(v);
        }
        for (code, &k) in codes.iter_mut().zip(cards) {
            if t > 0 && k > 1 && !base.random_bool(config.stay_prob) {
                // uniform over the other k-1 codes
                let step = base.random_range(1..k);
                *code = (*code + step) % k;
            }
            data.push(*code as f64);
        }
    }
    let full = Matrix::from_vec(total, width, data)?;
    let train = RawSeries::new(schema.clone(), full.slice_rows(0, config.train_len), None)?;
    let clean = full.slice_rows(config.train_len, total);

    let mut placement = ChaCha8Rng::seed_from_u64(seed);
    placement.set_stream(1);
    let spec = &config.anomaly;
    let mut injected = clean.clone();
    let mut labels = vec![false; config.test_len];
    if let Some(slot) = config.test_len.checked_div(spec.count) {
        for k in 0..spec.count {
            let lo = k * slot + MIN_GAP + spec.precursor_len;
            let hi = (k + 1) * slot - spec.length;
            let start = placement.random_range(lo..=hi);
            inject(
                &mut injected,
                config,
                start,
                &mut labels,
                c,
                cards,
            );
        }
    }
    let test = RawSeries::new(schema.clone(), injected, Some(labels))?;
    let clean_test = RawSeries::new(schema, clean, Some(vec![false; config.test_len]))?;
    Ok(SynthDataset {
        train,
        test,
        clean_test,
    })
}

fn inject(
    values: &mut Matrix,
    config: &SynthConfig,
    start: usize,
    labels: &mut [bool],
    c: usize,
    cards: &[usize],
) {
    let spec = &config.anomaly;
    let shift = spec.magnitude * config.amplitude;
    let ramp_len = spec.precursor_len;
    for i in 0..ramp_len {
        let t = start - ramp_len + i;
        let dev = spec.precursor_scale * shift * (i + 1) as f64 / ramp_len as f64;
        for v in &mut values.row_mut(t)[..c] {
            *v += dev;
        }
    }
    for t in start..start + spec.length {
        labels[t] = true;
        let row = values.row_mut(t);
        for v in &mut row[..c] {
            *v += shift;
        }
        if c == 0 {
            for (v, &k) in row[c..].iter_mut().zip(cards) {
                *v = ((*v as usize + 1) % k) as f64;
            }
        }
    }
}
