//! One-step forecaster for mixed continuous/discrete series.
//!
//! Continuous channels are split into a moving-average trend and the
//! remaining seasonal part, each mapped to the next step by a time-axis linear
//! layer. Discrete channels go through one-hot encoding and their own
//! time-axis linear layer. An adaptive graph convolution over all `c + d`
//! feature nodes produces a correction `Z` that is added to both heads.
//! Training minimizes `MSE + λ·CE` with Adam using hand-derived gradients.

mod grad;
mod model;
mod ops;
mod train;

use serde::{Deserialize, Serialize};

use crate::{optim::AdamConfig, Error, Result};

pub use grad::gradients;
pub use model::{ForecastModel, ModelShape, Params, Tensor};
pub use ops::{adjacency, decompose, Forecast, Losses};
pub use train::{forecast_series, persistence_forecast, train, TrainOutcome};

/// Activation applied to the graph convolution output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub(crate) fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => libm::tanh(x),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative given the pre-activation `x` and the output `y`.
    #[inline]
    pub(crate) fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// How the trend and seasonal heads map `N` steps of `c` channels to `c` outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadMode {
    /// One `N → 1` map shared by every channel.
    #[default]
    Shared,
    /// A dense `(N·c) → c` map.
    Full,
}

/// Hyperparameters for [`train`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Weight of the discrete cross-entropy term.
    pub lambda: f64,
    /// Number of Adam updates. `None` runs `epochs` passes over the windows.
    pub iterations: Option<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub kernel_size: usize,
    pub activation: Activation,
    pub head_mode: HeadMode,
    /// Hidden width `h` of the graph convolution.
    pub hidden: usize,
    /// Node-embedding width `b`.
    pub node_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.005,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            lambda: 1.0,
            iterations: None,
            epochs: 5,
            batch_size: 64,
            seed: 0,
            kernel_size: 3,
            activation: Activation::Tanh,
            head_mode: HeadMode::Shared,
            hidden: 256,
            node_dim: 10,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }

    /// Checks the config against a window length.
    pub fn validate(&self, window: usize) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::config("learning_rate must be positive"));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::config("lambda must be nonnegative"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::config("Adam betas must be in [0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("Adam epsilon must be positive"));
        }
        if self.kernel_size % 2 == 0 {
            return Err(Error::config("kernel_size must be odd"));
        }
        if self.kernel_size > window {
            return Err(Error::config("kernel_size must not exceed the window length"));
        }
        if self.batch_size == 0 || self.hidden == 0 || self.node_dim == 0 {
            return Err(Error::config(
                "batch_size, hidden and node_dim must be positive",
            ));
        }
        Ok(())
    }
}
