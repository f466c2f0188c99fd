//! Empirical-CDF outlier scoring.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcodModel {
    /// Training values of each dimension, ascending.
    pub sorted: Vec<Vec<f64>>,
    /// Sample skewness of each dimension.
    pub skewness: Vec<f64>,
}

pub fn fit(data: &Matrix) -> Result<EcodModel> {
    if data.rows() == 0 {
        return Err(Error::data("ECOD needs at least one training row"));
    }
    if data.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::data("ECOD training data must be finite"));
    }
    let mut sorted = Vec::with_capacity(data.cols());
    let mut skewness = Vec::with_capacity(data.cols());
    for j in 0..data.cols() {
        let mut col = data.column(j);
        skewness.push(skew(&col));
        col.sort_by(f64::total_cmp);
        sorted.push(col);
    }
    Ok(EcodModel { sorted, skewness })
}

fn skew(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean) * (v - mean) * (v - mean)).sum::<f64>() / n;
    if m2 > 0.0 {
        m3 / libm::pow(m2, 1.5)
    } else {
        0.0
    }
}

impl EcodModel {
    pub fn dim(&self) -> usize {
        self.sorted.len()
    }

    /// Left and right tail probabilities of `v` in dimension `j`, each
    /// clamped to at least `1/(n+1)`.
    pub fn tails(&self, j: usize, v: f64) -> (f64, f64) {
        let col = &self.sorted[j];
        let n = col.len() as f64;
        let at_most = col.partition_point(|&x| x <= v) as f64;
        let below = col.partition_point(|&x| x < v) as f64;
        let floor = 1.0 / (n + 1.0);
        ((at_most / n).max(floor), ((n - below) / n).max(floor))
    }

    /// `max(O_left, O_right, O_auto)`; higher means more anomalous.
    pub fn score(&self, x: &[f64]) -> f64 {
        let (mut left, mut right, mut auto) = (0.0, 0.0, 0.0);
        for (j, &v) in x.iter().enumerate() {
            let (pl, pr) = self.tails(j, v);
            let (ol, or) = (-libm::log(pl), -libm::log(pr));
            left += ol;
            right += or;
            auto += if self.skewness[j] < 0.0 { ol } else { or };
        }
        left.max(right).max(auto)
    }
}
