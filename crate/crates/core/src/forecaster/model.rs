use alloc::{format, vec::Vec};
use core::ops::{Index, IndexMut};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use super::{Activation, HeadMode, TrainConfig};
use crate::{data::FeatureSchema, Error, Result};

/// Dimensions and structural choices of a [`ForecastModel`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelShape {
    /// c
    pub continuous: usize,
    /// Cardinality of each of the d discrete features.
    pub cardinalities: Vec<usize>,
    /// e
    pub embedding_dim: usize,
    /// h
    pub hidden: usize,
    /// b
    pub node_dim: usize,
    /// N
    pub window: usize,
    pub kernel_size: usize,
    pub head_mode: HeadMode,
    pub activation: Activation,
}

impl ModelShape {
    pub fn new(schema: &FeatureSchema, window: usize, config: &TrainConfig) -> Result<Self> {
        config.validate(window)?;
        Ok(ModelShape {
            continuous: schema.continuous_count(),
            cardinalities: schema.cardinalities(),
            embedding_dim: schema.embedding_dim(),
            hidden: config.hidden,
            node_dim: config.node_dim,
            window,
            kernel_size: config.kernel_size,
            head_mode: config.head_mode,
            activation: config.activation,
        })
    }

    pub fn discrete(&self) -> usize {
        self.cardinalities.len()
    }

    /// c + d graph nodes.
    pub fn nodes(&self) -> usize {
        self.continuous + self.cardinalities.len()
    }

    /// Width of one window row.
    pub fn width(&self) -> usize {
        self.nodes()
    }

    /// Flattened per-node history length e·N.
    pub fn node_input(&self) -> usize {
        self.embedding_dim * self.window
    }

    /// Number of entries in `tensor`.
    pub fn len_of(&self, tensor: Tensor) -> usize {
        let (c, d, n) = (self.continuous, self.discrete(), self.window);
        let head_w = match (c, self.head_mode) {
            (0, _) => 0,
            (_, HeadMode::Shared) => n,
            (_, HeadMode::Full) => c * n * c,
        };
        let head_b = match (c, self.head_mode) {
            (0, _) => 0,
            (_, HeadMode::Shared) => 1,
            (_, HeadMode::Full) => c,
        };
        match tensor {
            Tensor::TrendW | Tensor::SeasonalW => head_w,
            Tensor::TrendB | Tensor::SeasonalB => head_b,
            Tensor::DiscreteW => {
                if d > 0 {
                    n
                } else {
                    0
                }
            }
            Tensor::DiscreteB => usize::from(d > 0),
            Tensor::NodeEmbedding => self.nodes() * self.node_dim,
            Tensor::AgcW => self.node_dim * self.hidden * self.embedding_dim,
            Tensor::InputW => self.hidden * self.node_input(),
            Tensor::InputB => self.hidden,
        }
    }

    /// Fan-in used for the uniform initialization bound.
    fn fan_in(&self, tensor: Tensor) -> usize {
        match tensor {
            Tensor::TrendW | Tensor::TrendB | Tensor::SeasonalW | Tensor::SeasonalB => {
                match self.head_mode {
                    HeadMode::Shared => self.window,
                    HeadMode::Full => self.window * self.continuous,
                }
            }
            Tensor::DiscreteW | Tensor::DiscreteB => self.window,
            Tensor::NodeEmbedding => self.node_dim,
            Tensor::AgcW => self.hidden,
            Tensor::InputW | Tensor::InputB => self.node_input(),
        }
    }

    pub(crate) fn check_window(&self, window: &[f64]) -> Result<()> {
        let expected = self.window * self.width();
        if window.len() != expected {
            return Err(Error::ShapeMismatch {
                what: "window length",
                expected,
                actual: window.len(),
            });
        }
        Ok(())
    }
}

/// Names every trainable tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tensor {
    TrendW,
    TrendB,
    SeasonalW,
    SeasonalB,
    DiscreteW,
    DiscreteB,
    NodeEmbedding,
    AgcW,
    InputW,
    InputB,
}

impl Tensor {
    pub const ALL: [Tensor; 10] = [
        Tensor::TrendW,
        Tensor::TrendB,
        Tensor::SeasonalW,
        Tensor::SeasonalB,
        Tensor::DiscreteW,
        Tensor::DiscreteB,
        Tensor::NodeEmbedding,
        Tensor::AgcW,
        Tensor::InputW,
        Tensor::InputB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tensor::TrendW => "trend_w",
            Tensor::TrendB => "trend_b",
            Tensor::SeasonalW => "seasonal_w",
            Tensor::SeasonalB => "seasonal_b",
            Tensor::DiscreteW => "discrete_w",
            Tensor::DiscreteB => "discrete_b",
            Tensor::NodeEmbedding => "node_embedding",
            Tensor::AgcW => "agc_w",
            Tensor::InputW => "input_w",
            Tensor::InputB => "input_b",
        }
    }

    pub fn from_name(name: &str) -> Option<Tensor> {
        Tensor::ALL.into_iter().find(|t| t.name() == name)
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// One flat vector per [`Tensor`]; used both for weights and for gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    data: [Vec<f64>; 10],
}

impl Params {
    pub fn zeros(shape: &ModelShape) -> Self {
        Params {
            data: Tensor::ALL.map(|t| alloc::vec![0.0; shape.len_of(t)]),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Tensor, &Vec<f64>)> {
        Tensor::ALL.into_iter().zip(self.data.iter())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (Tensor, &mut Vec<f64>)> {
        Tensor::ALL.into_iter().zip(self.data.iter_mut())
    }

    pub fn fill(&mut self, value: f64) {
        for t in &mut self.data {
            t.iter_mut().for_each(|v| *v = value);
        }
    }

    /// First tensor holding a non-finite entry.
    pub fn first_non_finite(&self) -> Option<Tensor> {
        self.iter()
            .find(|(_, v)| v.iter().any(|x| !x.is_finite()))
            .map(|(t, _)| t)
    }
}

impl Index<Tensor> for Params {
    type Output = Vec<f64>;

    fn index(&self, t: Tensor) -> &Vec<f64> {
        &self.data[t.index()]
    }
}

impl IndexMut<Tensor> for Params {
    fn index_mut(&mut self, t: Tensor) -> &mut Vec<f64> {
        &mut self.data[t.index()]
    }
}

/// All trainable weights plus the shape they were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastModel {
    shape: ModelShape,
    params: Params,
}

impl ForecastModel {
    /// Weights ~ U(−1/√fan_in, 1/√fan_in); node embeddings ~ N(0, 0.1).
    pub fn init(shape: ModelShape, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Params::zeros(&shape);
        let normal = Normal::new(0.0, 0.1).expect("valid normal");
        for (t, values) in params.iter_mut() {
            if t == Tensor::NodeEmbedding {
                values.iter_mut().for_each(|v| *v = rng.sample(normal));
            } else {
                let bound = 1.0 / libm::sqrt(shape.fan_in(t).max(1) as f64);
                values
                    .iter_mut()
                    .for_each(|v| *v = rng.random_range(-bound..bound));
            }
        }
        ForecastModel { shape, params }
    }

    /// Builds a model from explicit tensors, checking every length.
    pub fn from_params(shape: ModelShape, params: Params) -> Result<Self> {
        for (t, v) in params.iter() {
            if v.len() != shape.len_of(t) {
                return Err(Error::ShapeMismatch {
                    what: t.name(),
                    expected: shape.len_of(t),
                    actual: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::data(format!("tensor {} has non-finite entries", t.name())));
            }
        }
        Ok(ForecastModel { shape, params })
    }

    /// Rebuilds a model from `(name, values)` pairs; every tensor must appear.
    pub fn from_named<'a>(
        shape: ModelShape,
        named: impl IntoIterator<Item = (&'a str, Vec<f64>)>,
    ) -> Result<Self> {
        let mut params = Params::zeros(&shape);
        let mut seen = [false; 10];
        for (name, values) in named {
            let t = Tensor::from_name(name)
                .ok_or_else(|| Error::data(format!("unknown tensor {name:?}")))?;
            params[t] = values;
            seen[t.index()] = true;
        }
        if let Some(t) = Tensor::ALL.into_iter().find(|t| !seen[t.index()]) {
            return Err(Error::data(format!("missing tensor {:?}", t.name())));
        }
        ForecastModel::from_params(shape, params)
    }

    pub fn shape(&self) -> &ModelShape {
        &self.shape
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    pub fn named_tensors(&self) -> impl Iterator<Item = (&'static str, &[f64])> {
        self.params.iter().map(|(t, v)| (t.name(), v.as_slice()))
    }
}
