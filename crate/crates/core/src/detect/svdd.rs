//! A small one-class hypersphere model: a bias-free `input → 32 → 8`
//! encoder with tanh in between, trained to pull embeddings of normal data
//! toward a fixed center.

use alloc::{vec, vec::Vec};

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{
    optim::{AdamConfig, AdamState},
    Error, Matrix, Result,
};

/// Center coordinates closer to zero than this are pushed out to ±this.
const CENTER_EPS: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvddConfig {
    pub hidden: usize,
    pub latent: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for SvddConfig {
    fn default() -> Self {
        SvddConfig {
            hidden: 32,
            latent: 8,
            epochs: 50,
            learning_rate: 1e-3,
            batch_size: 128,
            weight_decay: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvddModel {
    /// Per-dimension standardization fitted on the training rows.
    pub input_mean: Vec<f64>,
    pub input_scale: Vec<f64>,
    pub hidden: usize,
    pub latent: usize,
    /// hidden × input
    pub w1: Vec<f64>,
    /// latent × hidden
    pub w2: Vec<f64>,
    pub center: Vec<f64>,
    pub weight_decay: f64,
}

struct Pass {
    input: Vec<f64>,
    hidden: Vec<f64>,
    out: Vec<f64>,
}

impl SvddModel {
    pub fn dim(&self) -> usize {
        self.input_mean.len()
    }

    fn pass(&self, x: &[f64]) -> Pass {
        let d = self.dim();
        let input: Vec<f64> = (0..d)
            .map(|j| (x[j] - self.input_mean[j]) / self.input_scale[j])
            .collect();
        let hidden: Vec<f64> = (0..self.hidden)
            .map(|k| {
                libm::tanh(
                    self.w1[k * d..(k + 1) * d]
                        .iter()
                        .zip(&input)
                        .map(|(w, u)| w * u)
                        .sum(),
                )
            })
            .collect();
        let out = (0..self.latent)
            .map(|l| {
                self.w2[l * self.hidden..(l + 1) * self.hidden]
                    .iter()
                    .zip(&hidden)
                    .map(|(w, h)| w * h)
                    .sum()
            })
            .collect();
        Pass { input, hidden, out }
    }

    /// Latent embedding of a raw row.
    pub fn embed(&self, x: &[f64]) -> Vec<f64> {
        self.pass(x).out
    }

    /// Squared distance of the embedding to the center.
    pub fn score(&self, x: &[f64]) -> f64 {
        self.embed(x)
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum()
    }

    pub fn mean_score(&self, data: &Matrix) -> f64 {
        data.iter_rows().map(|r| self.score(r)).sum::<f64>() / data.rows() as f64
    }
}

/// Initializes the encoder, fixes the center at the mean initial embedding,
/// then minimizes the mean squared distance plus weight decay with Adam.
pub fn fit(data: &Matrix, config: &SvddConfig) -> Result<SvddModel> {
    let (n, d) = (data.rows(), data.cols());
    if n == 0 || d == 0 {
        return Err(Error::data("SVDD needs nonempty training data"));
    }
    if data.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::data("SVDD training data must be finite"));
    }
    if config.hidden == 0 || config.latent == 0 || config.batch_size == 0 {
        return Err(Error::config("SVDD widths and batch size must be positive"));
    }
    let mut input_mean = vec![0.0; d];
    let mut input_scale = vec![0.0; d];
    for j in 0..d {
        let col = data.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        input_mean[j] = mean;
        input_scale[j] = if var > 1e-12 { libm::sqrt(var) } else { 1.0 };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let b1 = 1.0 / libm::sqrt(d as f64);
    let b2 = 1.0 / libm::sqrt(config.hidden as f64);
    let w1 = (0..config.hidden * d).map(|_| rng.random_range(-b1..b1)).collect();
    let w2 = (0..config.latent * config.hidden)
        .map(|_| rng.random_range(-b2..b2))
        .collect();
    let mut model = SvddModel {
        input_mean,
        input_scale,
        hidden: config.hidden,
        latent: config.latent,
        w1,
        w2,
        center: vec![0.0; config.latent],
        weight_decay: config.weight_decay,
    };

    let mut center = vec![0.0; config.latent];
    for r in data.iter_rows() {
        for (c, v) in center.iter_mut().zip(model.embed(r)) {
            *c += v / n as f64;
        }
    }
    for c in &mut center {
        if c.abs() < CENTER_EPS {
            *c = if *c < 0.0 { -CENTER_EPS } else { CENTER_EPS };
        }
    }
    model.center = center;

    let adam_cfg = AdamConfig {
        learning_rate: config.learning_rate,
        ..AdamConfig::default()
    };
    let mut adam = AdamState::new(adam_cfg, [model.w1.len(), model.w2.len()]);
    let mut order: Vec<usize> = (0..n).collect();
    let mut g1 = vec![0.0; model.w1.len()];
    let mut g2 = vec![0.0; model.w2.len()];
    let (h, l) = (model.hidden, model.latent);
    let mut iteration = 0;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            g1.iter_mut().for_each(|g| *g = 0.0);
            g2.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            let mut loss = 0.0;
            for &i in batch {
                let p = model.pass(data.row(i));
                let diff: Vec<f64> = p.out.iter().zip(&model.center).map(|(a, c)| a - c).collect();
                loss += scale * diff.iter().map(|v| v * v).sum::<f64>();
                let mut d_hidden = vec![0.0; h];
                for li in 0..l {
                    let g = 2.0 * scale * diff[li];
                    for k in 0..h {
                        g2[li * h + k] += g * p.hidden[k];
                        d_hidden[k] += g * model.w2[li * h + k];
                    }
                }
                for k in 0..h {
                    let da = d_hidden[k] * (1.0 - p.hidden[k] * p.hidden[k]);
                    for j in 0..d {
                        g1[k * d + j] += da * p.input[j];
                    }
                }
            }
            for (g, w) in g1.iter_mut().zip(&model.w1) {
                *g += config.weight_decay * w;
            }
            for (g, w) in g2.iter_mut().zip(&model.w2) {
                *g += config.weight_decay * w;
            }
            if !loss.is_finite() || g1.iter().chain(&g2).any(|g| !g.is_finite()) {
                return Err(Error::Diverged { iteration });
            }
            adam.update([&mut model.w1, &mut model.w2], [&g1, &g2]);
            iteration += 1;
        }
    }
    Ok(model)
}
