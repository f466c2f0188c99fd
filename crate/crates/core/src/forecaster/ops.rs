use alloc::{vec, vec::Vec};

use super::{model::Tensor, ForecastModel, HeadMode, ModelShape, Params};
use crate::{Error, Matrix, Result};

/// Log-probabilities below this are clamped in the cross-entropy.
pub(crate) const LOG_PROB_FLOOR: f64 = -50.0;

/// Moving-average decomposition of an `N × channels` block.
///
/// The block is padded by repeating its first row `(k−1)/2` times in front
/// and its last row as often behind; the trend is the length-`k` average
/// centered on each step and the seasonal part is the remainder.
pub fn decompose(block: &[f64], channels: usize, kernel: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if kernel % 2 == 0 {
        return Err(Error::config("kernel_size must be odd"));
    }
    if channels == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let steps = block.len() / channels;
    if steps * channels != block.len() {
        return Err(Error::ShapeMismatch {
            what: "block length",
            expected: steps * channels,
            actual: block.len(),
        });
    }
    if kernel > steps {
        return Err(Error::config("kernel_size must not exceed the window length"));
    }
    Ok(decompose_unchecked(block, steps, channels, kernel))
}

fn decompose_unchecked(
    block: &[f64],
    steps: usize,
    channels: usize,
    kernel: usize,
) -> (Vec<f64>, Vec<f64>) {
    let pad = (kernel / 2) as isize;
    let last = steps as isize - 1;
    let mut trend = vec![0.0; steps * channels];
    for t in 0..steps as isize {
        for o in -pad..=pad {
            let src = (t + o).clamp(0, last) as usize;
            for i in 0..channels {
                trend[t as usize * channels + i] += block[src * channels + i];
            }
        }
    }
    let inv = 1.0 / kernel as f64;
    trend.iter_mut().for_each(|v| *v *= inv);
    let seasonal = block.iter().zip(&trend).map(|(x, m)| x - m).collect();
    (trend, seasonal)
}

/// `A = I + rowsoftmax(ReLU(E·Eᵀ))` for an `nodes × b` embedding.
pub fn adjacency(embedding: &Matrix) -> Matrix {
    let n = embedding.rows();
    let g = Graph::adjacency_parts(embedding.as_slice(), n, embedding.cols());
    Matrix::from_vec(n, n, g.2).expect("square adjacency")
}

/// Parts of the graph convolution that depend only on the weights, shared
/// by every window of a batch.
#[derive(Debug, Clone)]
pub(crate) struct Graph {
    /// E·Eᵀ before the ReLU.
    pub gram: Vec<f64>,
    /// Row softmax of ReLU(E·Eᵀ).
    pub soft: Vec<f64>,
    /// soft + I.
    pub adj: Vec<f64>,
    /// Node-adaptive weights Θ[n] = Σ_β E[n,β]·W[β], shape nodes × h × e.
    pub theta: Vec<f64>,
}

impl Graph {
    pub fn new(shape: &ModelShape, params: &Params) -> Graph {
        let (nodes, b, h, e) = (
            shape.nodes(),
            shape.node_dim,
            shape.hidden,
            shape.embedding_dim,
        );
        let emb = &params[Tensor::NodeEmbedding];
        let (gram, soft, adj) = Graph::adjacency_parts(emb, nodes, b);
        let w = &params[Tensor::AgcW];
        let he = h * e;
        let mut theta = vec![0.0; nodes * he];
        for n in 0..nodes {
            let out = &mut theta[n * he..(n + 1) * he];
            for beta in 0..b {
                let coef = emb[n * b + beta];
                if coef == 0.0 {
                    continue;
                }
                for (o, wv) in out.iter_mut().zip(&w[beta * he..(beta + 1) * he]) {
                    *o += coef * wv;
                }
            }
        }
        Graph {
            gram,
            soft,
            adj,
            theta,
        }
    }

    fn adjacency_parts(emb: &[f64], nodes: usize, b: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut gram = vec![0.0; nodes * nodes];
        for i in 0..nodes {
            for j in 0..nodes {
                gram[i * nodes + j] = (0..b).map(|k| emb[i * b + k] * emb[j * b + k]).sum();
            }
        }
        let mut soft = vec![0.0; nodes * nodes];
        for i in 0..nodes {
            let row = &gram[i * nodes..(i + 1) * nodes];
            let max = row.iter().fold(0.0f64, |m, &v| m.max(v.max(0.0)));
            let out = &mut soft[i * nodes..(i + 1) * nodes];
            let mut sum = 0.0;
            for (o, &v) in out.iter_mut().zip(row) {
                *o = libm::exp(v.max(0.0) - max);
                sum += *o;
            }
            out.iter_mut().for_each(|o| *o /= sum);
        }
        let mut adj = soft.clone();
        for i in 0..nodes {
            adj[i * nodes + i] += 1.0;
        }
        (gram, soft, adj)
    }
}

/// Every intermediate of one window's forward pass.
#[derive(Debug, Clone)]
pub(crate) struct Trace {
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
    /// N × d × e
    pub onehot: Vec<f64>,
    /// nodes × (e·N), index `t·e + s` within a node
    pub x: Vec<f64>,
    /// nodes × h, after Linear_input
    pub hidden: Vec<f64>,
    /// nodes × h, A·H
    pub agg: Vec<f64>,
    /// nodes × e, before the activation
    pub pre: Vec<f64>,
    pub z: Vec<f64>,
    pub continuous: Vec<f64>,
    /// d × e
    pub logits: Vec<f64>,
}

/// Splits a window into its continuous block and one-hot tensor.
pub(crate) fn split_window(shape: &ModelShape, window: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    shape.check_window(window)?;
    let (c, d, e, n) = (
        shape.continuous,
        shape.discrete(),
        shape.embedding_dim,
        shape.window,
    );
    let width = c + d;
    let mut block = Vec::with_capacity(n * c);
    let mut onehot = vec![0.0; n * d * e];
    for t in 0..n {
        let row = &window[t * width..(t + 1) * width];
        block.extend_from_slice(&row[..c]);
        for (j, &code) in row[c..].iter().enumerate() {
            let card = shape.cardinalities[j];
            if !(code >= 0.0 && code < card as f64 && libm::trunc(code) == code) {
                return Err(Error::InvalidData {
                    message: "discrete value out of cardinality".into(),
                    row: Some(t),
                    column: None,
                });
            }
            onehot[(t * d + j) * e + code as usize] = 1.0;
        }
    }
    Ok((block, onehot))
}

fn time_head(
    shape: &ModelShape,
    w: &[f64],
    b: &[f64],
    block: &[f64],
    out: &mut [f64],
) {
    let (c, n) = (shape.continuous, shape.window);
    match shape.head_mode {
        HeadMode::Shared => {
            for (i, o) in out.iter_mut().enumerate() {
                *o += b[0] + (0..n).map(|t| w[t] * block[t * c + i]).sum::<f64>();
            }
        }
        HeadMode::Full => {
            let nc = n * c;
            for (i, o) in out.iter_mut().enumerate() {
                *o += b[i]
                    + w[i * nc..(i + 1) * nc]
                        .iter()
                        .zip(block)
                        .map(|(a, x)| a * x)
                        .sum::<f64>();
            }
        }
    }
}

fn heads_continuous(shape: &ModelShape, p: &Params, trend: &[f64], seasonal: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; shape.continuous];
    if shape.continuous > 0 {
        time_head(shape, &p[Tensor::TrendW], &p[Tensor::TrendB], trend, &mut out);
        time_head(shape, &p[Tensor::SeasonalW], &p[Tensor::SeasonalB], seasonal, &mut out);
    }
    out
}

fn head_discrete(shape: &ModelShape, p: &Params, onehot: &[f64]) -> Vec<f64> {
    let (d, e, n) = (shape.discrete(), shape.embedding_dim, shape.window);
    let w = &p[Tensor::DiscreteW];
    let mut logits = vec![0.0; d * e];
    if d == 0 {
        return logits;
    }
    let bias = p[Tensor::DiscreteB][0];
    for (k, l) in logits.iter_mut().enumerate() {
        *l = bias + (0..n).map(|t| w[t] * onehot[t * d * e + k]).sum::<f64>();
    }
    logits
}

/// Builds X, H = Linear_input(X), A·H and Z = σ(Σ_k (A·H)[n,k] Θ[n,k,·]).
fn graph_conv(
    shape: &ModelShape,
    p: &Params,
    graph: &Graph,
    block: &[f64],
    onehot: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let (c, d, e, n, h) = (
        shape.continuous,
        shape.discrete(),
        shape.embedding_dim,
        shape.window,
        shape.hidden,
    );
    let nodes = c + d;
    let en = e * n;
    let mut x = vec![0.0; nodes * en];
    for t in 0..n {
        for i in 0..c {
            x[i * en + t * e] = block[t * c + i];
        }
        for j in 0..d {
            let src = &onehot[(t * d + j) * e..(t * d + j + 1) * e];
            x[(c + j) * en + t * e..(c + j) * en + (t + 1) * e].copy_from_slice(src);
        }
    }

    let w_in = &p[Tensor::InputW];
    let b_in = &p[Tensor::InputB];
    let mut hidden = vec![0.0; nodes * h];
    for node in 0..nodes {
        let xn = &x[node * en..(node + 1) * en];
        for k in 0..h {
            hidden[node * h + k] = b_in[k]
                + w_in[k * en..(k + 1) * en]
                    .iter()
                    .zip(xn)
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
        }
    }

    let mut agg = vec![0.0; nodes * h];
    for i in 0..nodes {
        for j in 0..nodes {
            let a = graph.adj[i * nodes + j];
            for k in 0..h {
                agg[i * h + k] += a * hidden[j * h + k];
            }
        }
    }

    let mut pre = vec![0.0; nodes * e];
    for node in 0..nodes {
        for k in 0..h {
            let g = agg[node * h + k];
            let th = &graph.theta[(node * h + k) * e..(node * h + k + 1) * e];
            for s in 0..e {
                pre[node * e + s] += g * th[s];
            }
        }
    }
    let z = pre.iter().map(|&v| shape.activation.apply(v)).collect();
    (x, hidden, agg, pre, z)
}

pub(crate) fn forward_trace(
    shape: &ModelShape,
    p: &Params,
    graph: &Graph,
    window: &[f64],
) -> Result<Trace> {
    let (block, onehot) = split_window(shape, window)?;
    let (trend, seasonal) =
        decompose_unchecked(&block, shape.window, shape.continuous, shape.kernel_size);
    let mut continuous = heads_continuous(shape, p, &trend, &seasonal);
    let mut logits = head_discrete(shape, p, &onehot);
    let (x, hidden, agg, pre, z) = graph_conv(shape, p, graph, &block, &onehot);
    let (c, e) = (shape.continuous, shape.embedding_dim);
    for (i, v) in continuous.iter_mut().enumerate() {
        *v += z[i * e];
    }
    for (l, zv) in logits.iter_mut().zip(&z[c * e..]) {
        *l += zv;
    }
    Ok(Trace {
        trend,
        seasonal,
        onehot,
        x,
        hidden,
        agg,
        pre,
        z,
        continuous,
        logits,
    })
}

/// One-step prediction for the next timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    /// Predicted continuous values, length c.
    pub continuous: Vec<f64>,
    /// d × e logits.
    pub discrete_logits: Matrix,
    /// Argmax over the first `cardinality(j)` logits of each discrete feature.
    pub discrete_codes: Vec<usize>,
}

/// Continuous MSE, discrete cross-entropy and `continuous + λ·discrete`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Losses {
    pub continuous: f64,
    pub discrete: f64,
    pub total: f64,
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `(log_softmax[target], softmax)` over `logits`.
pub(crate) fn log_softmax_at(logits: &[f64], target: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let exps: Vec<f64> = logits.iter().map(|&v| libm::exp(v - max)).collect();
    let sum: f64 = exps.iter().sum();
    let lse = max + libm::log(sum);
    (logits[target] - lse, exps.into_iter().map(|v| v / sum).collect())
}

pub(crate) fn losses(
    shape: &ModelShape,
    continuous: &[f64],
    logits: &[f64],
    target: &[f64],
    lambda: f64,
) -> Losses {
    let (c, d, e) = (shape.continuous, shape.discrete(), shape.embedding_dim);
    let lc = if c > 0 {
        continuous
            .iter()
            .zip(&target[..c])
            .map(|(p, t)| (t - p) * (t - p))
            .sum::<f64>()
            / c as f64
    } else {
        0.0
    };
    let ld = if d > 0 {
        (0..d)
            .map(|j| {
                let card = shape.cardinalities[j];
                let (logp, _) = log_softmax_at(&logits[j * e..j * e + card], target[c + j] as usize);
                -logp.max(LOG_PROB_FLOOR)
            })
            .sum::<f64>()
            / d as f64
    } else {
        0.0
    };
    Losses {
        continuous: lc,
        discrete: ld,
        total: lc + lambda * ld,
    }
}

pub(crate) fn check_target(shape: &ModelShape, target: &[f64]) -> Result<()> {
    if target.len() != shape.width() {
        return Err(Error::ShapeMismatch {
            what: "target length",
            expected: shape.width(),
            actual: target.len(),
        });
    }
    for (j, &code) in target[shape.continuous..].iter().enumerate() {
        if !(code >= 0.0 && code < shape.cardinalities[j] as f64 && libm::trunc(code) == code) {
            return Err(Error::data("target discrete value out of cardinality"));
        }
    }
    Ok(())
}

impl ForecastModel {
    /// Trend head plus seasonal head on the continuous block of `window`.
    pub fn predict_continuous(&self, window: &[f64]) -> Result<Vec<f64>> {
        let shape = self.shape();
        let (block, _) = split_window(shape, window)?;
        let (trend, seasonal) =
            decompose_unchecked(&block, shape.window, shape.continuous, shape.kernel_size);
        Ok(heads_continuous(shape, self.params(), &trend, &seasonal))
    }

    /// Discrete head on an `N × d × e` one-hot tensor; returns `d × e` logits.
    pub fn predict_discrete(&self, onehot: &[f64]) -> Result<Matrix> {
        let shape = self.shape();
        let (d, e) = (shape.discrete(), shape.embedding_dim);
        if d == 0 {
            return Err(Error::NoDiscreteFeatures);
        }
        let expected = shape.window * d * e;
        if onehot.len() != expected {
            return Err(Error::ShapeMismatch {
                what: "one-hot window length",
                expected,
                actual: onehot.len(),
            });
        }
        Matrix::from_vec(d, e, head_discrete(shape, self.params(), onehot))
    }

    /// Learned adjacency of the current node embeddings.
    pub fn adjacency(&self) -> Matrix {
        let shape = self.shape();
        let emb = Matrix::from_vec(
            shape.nodes(),
            shape.node_dim,
            self.params()[Tensor::NodeEmbedding].clone(),
        )
        .expect("embedding shape");
        adjacency(&emb)
    }

    /// The graph-convolution correction Z, shape `(c+d) × e`.
    pub fn agc(&self, window: &[f64]) -> Result<Matrix> {
        let shape = self.shape();
        let (block, onehot) = split_window(shape, window)?;
        let graph = Graph::new(shape, self.params());
        let (.., z) = graph_conv(shape, self.params(), &graph, &block, &onehot);
        Matrix::from_vec(shape.nodes(), shape.embedding_dim, z)
    }

    pub fn forward(&self, window: &[f64]) -> Result<Forecast> {
        let graph = Graph::new(self.shape(), self.params());
        self.forward_with(&graph, window)
    }

    pub(crate) fn forward_with(&self, graph: &Graph, window: &[f64]) -> Result<Forecast> {
        let shape = self.shape();
        let trace = forward_trace(shape, self.params(), graph, window)?;
        let e = shape.embedding_dim;
        let codes = shape
            .cardinalities
            .iter()
            .enumerate()
            .map(|(j, &card)| argmax(&trace.logits[j * e..j * e + card]))
            .collect();
        Ok(Forecast {
            continuous: trace.continuous,
            discrete_logits: Matrix::from_vec(shape.discrete(), e, trace.logits)?,
            discrete_codes: codes,
        })
    }

    /// Losses of `forecast` against a target row (normalized continuous
    /// values followed by discrete codes).
    pub fn loss(&self, forecast: &Forecast, target: &[f64], lambda: f64) -> Result<Losses> {
        check_target(self.shape(), target)?;
        Ok(losses(
            self.shape(),
            &forecast.continuous,
            forecast.discrete_logits.as_slice(),
            target,
            lambda,
        ))
    }
}
