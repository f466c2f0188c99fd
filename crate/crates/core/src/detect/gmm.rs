//! Diagonal-covariance Gaussian mixture fitted by EM.

use alloc::{format, vec, vec::Vec};
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result};

/// Lower bound on every per-dimension variance.
pub const VARIANCE_FLOOR: f64 = 1e-6;
const MAX_REINITS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmmConfig {
    pub components: usize,
    pub max_iter: usize,
    /// EM stops once the mean per-sample log-likelihood improves by less.
    pub tol: f64,
    pub seed: u64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        GmmConfig {
            components: 4,
            max_iter: 200,
            tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    pub weights: Vec<f64>,
    pub means: Matrix,
    pub variances: Matrix,
    /// Mean per-sample log-likelihood after initialization and after every
    /// EM iteration of the final (uninterrupted) run.
    pub log_likelihood_trace: Vec<f64>,
}

impl GmmModel {
    pub fn dim(&self) -> usize {
        self.means.cols()
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    /// `log Σ_k π_k N(x; μ_k, diag σ²_k)`; higher means more normal.
    pub fn score(&self, x: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.components()];
        self.component_logs(x, &mut buf);
        log_sum_exp(&buf)
    }

    fn component_logs(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = libm::log(self.weights[k])
                + log_normal_diag(x, self.means.row(k), self.variances.row(k));
        }
    }
}

fn log_normal_diag(x: &[f64], mean: &[f64], var: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((&xi, &m), &v) in x.iter().zip(mean).zip(var) {
        let d = xi - m;
        acc += libm::log(2.0 * PI * v) + d * d / v;
    }
    -0.5 * acc
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + libm::log(v.iter().map(|&x| libm::exp(x - max)).sum::<f64>())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding of the component means.
fn kmeans_pp(data: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = data.rows();
    let mut means = Matrix::zeros(k, data.cols());
    let first = rng.random_range(0..n);
    means.row_mut(0).copy_from_slice(data.row(first));
    let mut d2: Vec<f64> = data.iter_rows().map(|r| sq_dist(r, means.row(0))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random_range(0.0..total);
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    idx = i;
                    break;
                }
                u -= w;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        means.row_mut(c).copy_from_slice(data.row(pick));
        for (i, r) in data.iter_rows().enumerate() {
            d2[i] = d2[i].min(sq_dist(r, means.row(c)));
        }
    }
    means
}

fn global_variance(data: &Matrix) -> Vec<f64> {
    let n = data.rows() as f64;
    (0..data.cols())
        .map(|j| {
            let mean = data.iter_rows().map(|r| r[j]).sum::<f64>() / n;
            let var = data.iter_rows().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / n;
            var.max(VARIANCE_FLOOR)
        })
        .collect()
}

/// Fits a `K`-component diagonal GMM by EM from k-means++ seeds.
///
/// A component whose responsibility mass vanishes is re-seeded at the
/// worst-explained point (at most three times); the likelihood trace then
/// restarts, so the returned trace is always nondecreasing.
pub fn fit(data: &Matrix, config: &GmmConfig) -> Result<GmmModel> {
    let (n, dim, k) = (data.rows(), data.cols(), config.components);
    if k == 0 {
        return Err(Error::config("GMM needs at least one component"));
    }
    if n < k {
        return Err(Error::FitFailed(format!(
            "{n} rows cannot support {k} components"
        )));
    }
    if data.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::data("GMM training data must be finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let base_var = global_variance(data);
    let mut variances = Matrix::zeros(k, dim);
    for c in 0..k {
        variances.row_mut(c).copy_from_slice(&base_var);
    }
    let mut model = GmmModel {
        weights: vec![1.0 / k as f64; k],
        means: kmeans_pp(data, k, &mut rng),
        variances,
        log_likelihood_trace: Vec::new(),
    };

    let mut resp = Matrix::zeros(n, k);
    let mut point_ll = vec![0.0; n];
    let mut reinits = 0;
    let mut ll = e_step(&model, data, &mut resp, &mut point_ll);
    model.log_likelihood_trace.push(ll);
    let mut iter = 0;
    while iter < config.max_iter {
        iter += 1;
        if let Some(empty) = m_step(&mut model, data, &resp) {
            reinits += 1;
            if reinits > MAX_REINITS {
                return Err(Error::FitFailed(format!(
                    "component {empty} stayed empty after {MAX_REINITS} reinitializations"
                )));
            }
            let worst = (0..n)
                .min_by(|&a, &b| point_ll[a].total_cmp(&point_ll[b]))
                .unwrap_or(0);
            model.means.row_mut(empty).copy_from_slice(data.row(worst));
            model.variances.row_mut(empty).copy_from_slice(&base_var);
            model.weights[empty] = 1.0 / k as f64;
            let total: f64 = model.weights.iter().sum();
            model.weights.iter_mut().for_each(|w| *w /= total);
            ll = e_step(&model, data, &mut resp, &mut point_ll);
            model.log_likelihood_trace.clear();
            model.log_likelihood_trace.push(ll);
            continue;
        }
        let next = e_step(&model, data, &mut resp, &mut point_ll);
        model.log_likelihood_trace.push(next);
        let gain = next - ll;
        ll = next;
        if gain < config.tol {
            break;
        }
    }
    if !ll.is_finite() {
        return Err(Error::FitFailed("non-finite log-likelihood".into()));
    }
    Ok(model)
}

/// Fills responsibilities and per-point log-likelihoods; returns the mean
/// log-likelihood.
fn e_step(model: &GmmModel, data: &Matrix, resp: &mut Matrix, point_ll: &mut [f64]) -> f64 {
    let k = model.components();
    let mut logs = vec![0.0; k];
    let mut total = 0.0;
    for (i, x) in data.iter_rows().enumerate() {
        model.component_logs(x, &mut logs);
        let lse = log_sum_exp(&logs);
        point_ll[i] = lse;
        total += lse;
        for (r, &l) in resp.row_mut(i).iter_mut().zip(&logs) {
            *r = libm::exp(l - lse);
        }
    }
    total / data.rows() as f64
}

/// Updates weights, means and floored variances. Returns the index of a
/// component with no responsibility mass, leaving the model untouched.
fn m_step(model: &mut GmmModel, data: &Matrix, resp: &Matrix) -> Option<usize> {
    let (n, dim, k) = (data.rows(), data.cols(), model.components());
    let mass: Vec<f64> = (0..k)
        .map(|c| resp.iter_rows().map(|r| r[c]).sum::<f64>())
        .collect();
    if let Some(empty) = mass.iter().position(|&m| m < 1e-10 * n as f64 || m == 0.0) {
        return Some(empty);
    }
    for c in 0..k {
        let mut mean = vec![0.0; dim];
        for (x, r) in data.iter_rows().zip(resp.iter_rows()) {
            for j in 0..dim {
                mean[j] += r[c] * x[j];
            }
        }
        mean.iter_mut().for_each(|m| *m /= mass[c]);
        let mut var = vec![0.0; dim];
        for (x, r) in data.iter_rows().zip(resp.iter_rows()) {
            for j in 0..dim {
                let d = x[j] - mean[j];
                var[j] += r[c] * d * d;
            }
        }
        for v in &mut var {
            *v = (*v / mass[c]).max(VARIANCE_FLOOR);
        }
        model.means.row_mut(c).copy_from_slice(&mean);
        model.variances.row_mut(c).copy_from_slice(&var);
    }
    let total: f64 = mass.iter().sum();
    for (w, m) in model.weights.iter_mut().zip(&mass) {
        *w = m / total;
    }
    None
}
