//! Reverse-mode gradients of the total loss.
//!
//! Per-window work accumulates into the direct parameter gradients and into
//! gradients w.r.t. the shared graph quantities (adjacency and node-adaptive
//! weights); those are pushed back into the node embeddings and the AGC
//! weights once per batch by [`finish_graph`].

use alloc::{vec, vec::Vec};

use super::{
    model::Tensor,
    ops::{check_target, forward_trace, log_softmax_at, losses, Graph, Trace, LOG_PROB_FLOOR},
    ForecastModel, HeadMode, Losses, ModelShape, Params,
};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct GraphGrad {
    adj: Vec<f64>,
    theta: Vec<f64>,
}

impl GraphGrad {
    pub fn zeros(graph: &Graph) -> Self {
        GraphGrad {
            adj: vec![0.0; graph.adj.len()],
            theta: vec![0.0; graph.theta.len()],
        }
    }
}

/// Gradient of the total loss of one `(window, target)` pair w.r.t. every
/// tensor of `model`.
pub fn gradients(
    model: &ForecastModel,
    window: &[f64],
    target: &[f64],
    lambda: f64,
) -> Result<(Losses, Params)> {
    let shape = model.shape();
    check_target(shape, target)?;
    let params = model.params();
    let graph = Graph::new(shape, params);
    let trace = forward_trace(shape, params, &graph, window)?;
    let mut grads = Params::zeros(shape);
    let mut gg = GraphGrad::zeros(&graph);
    let l = backward_window(shape, &graph, &trace, target, lambda, 1.0, &mut grads, &mut gg);
    if !l.total.is_finite() {
        return Err(Error::NumericalBlowup { tensor: "loss" });
    }
    finish_graph(shape, params, &graph, &gg, &mut grads);
    if let Some(t) = grads.first_non_finite() {
        return Err(Error::NumericalBlowup { tensor: t.name() });
    }
    Ok((l, grads))
}

/// Accumulates `scale ·` ∂loss/∂θ for one traced window.
#[allow(clippy::too_many_arguments)]
pub(crate) fn backward_window(
    shape: &ModelShape,
    graph: &Graph,
    trace: &Trace,
    target: &[f64],
    lambda: f64,
    scale: f64,
    grads: &mut Params,
    gg: &mut GraphGrad,
) -> Losses {
    let (c, d, e, n, h) = (
        shape.continuous,
        shape.discrete(),
        shape.embedding_dim,
        shape.window,
        shape.hidden,
    );
    let nodes = c + d;
    let l = losses(shape, &trace.continuous, &trace.logits, target, lambda);

    // output gradients
    let mut d_cont = vec![0.0; c];
    for i in 0..c {
        d_cont[i] = scale * 2.0 * (trace.continuous[i] - target[i]) / c as f64;
    }
    let mut d_logits = vec![0.0; d * e];
    for j in 0..d {
        let card = shape.cardinalities[j];
        let code = target[c + j] as usize;
        let (logp, probs) = log_softmax_at(&trace.logits[j * e..j * e + card], code);
        if logp < LOG_PROB_FLOOR {
            continue;
        }
        let w = scale * lambda / d as f64;
        for s in 0..card {
            let y = if s == code { 1.0 } else { 0.0 };
            d_logits[j * e + s] = w * (probs[s] - y);
        }
    }

    // continuous heads
    if c > 0 {
        for (w_t, b_t, block) in [
            (Tensor::TrendW, Tensor::TrendB, &trace.trend),
            (Tensor::SeasonalW, Tensor::SeasonalB, &trace.seasonal),
        ] {
            match shape.head_mode {
                HeadMode::Shared => {
                    let gw = &mut grads[w_t];
                    for t in 0..n {
                        gw[t] += (0..c).map(|i| d_cont[i] * block[t * c + i]).sum::<f64>();
                    }
                    grads[b_t][0] += d_cont.iter().sum::<f64>();
                }
                HeadMode::Full => {
                    let nc = n * c;
                    let gw = &mut grads[w_t];
                    for i in 0..c {
                        for (g, x) in gw[i * nc..(i + 1) * nc].iter_mut().zip(block.iter()) {
                            *g += d_cont[i] * x;
                        }
                    }
                    for i in 0..c {
                        grads[b_t][i] += d_cont[i];
                    }
                }
            }
        }
    }

    // discrete head
    if d > 0 {
        let gw = &mut grads[Tensor::DiscreteW];
        for t in 0..n {
            gw[t] += d_logits
                .iter()
                .zip(&trace.onehot[t * d * e..(t + 1) * d * e])
                .map(|(g, o)| g * o)
                .sum::<f64>();
        }
        grads[Tensor::DiscreteB][0] += d_logits.iter().sum::<f64>();
    }

    // graph correction: dZ → dPre
    let mut d_pre = vec![0.0; nodes * e];
    for i in 0..c {
        d_pre[i * e] = d_cont[i];
    }
    d_pre[c * e..].copy_from_slice(&d_logits);
    for (k, g) in d_pre.iter_mut().enumerate() {
        *g *= shape.activation.derivative(trace.pre[k], trace.z[k]);
    }

    // Pre[n,s] = Σ_k G[n,k] Θ[n,k,s]
    let graph_theta_len = h * e;
    let mut d_agg = vec![0.0; nodes * h];
    for node in 0..nodes {
        let dp = &d_pre[node * e..(node + 1) * e];
        if dp.iter().all(|&v| v == 0.0) {
            continue;
        }
        for k in 0..h {
            let g = trace.agg[node * h + k];
            let base = node * graph_theta_len + k * e;
            let mut acc = 0.0;
            for s in 0..e {
                gg.theta[base + s] += dp[s] * g;
                acc += dp[s] * graph.theta[base + s];
            }
            d_agg[node * h + k] = acc;
        }
    }

    // G = A·H
    let mut d_hidden = vec![0.0; nodes * h];
    let adj = &graph.adj;
    for i in 0..nodes {
        let dg = &d_agg[i * h..(i + 1) * h];
        for j in 0..nodes {
            let hj = &trace.hidden[j * h..(j + 1) * h];
            gg.adj[i * nodes + j] += dg.iter().zip(hj).map(|(a, b)| a * b).sum::<f64>();
            let a = adj[i * nodes + j];
            for k in 0..h {
                d_hidden[j * h + k] += a * dg[k];
            }
        }
    }

    // H = W_in·X + b_in
    let en = e * n;
    {
        let gw = &mut grads[Tensor::InputW];
        for node in 0..nodes {
            let xn = &trace.x[node * en..(node + 1) * en];
            for k in 0..h {
                let dh = d_hidden[node * h + k];
                if dh == 0.0 {
                    continue;
                }
                for (g, x) in gw[k * en..(k + 1) * en].iter_mut().zip(xn) {
                    *g += dh * x;
                }
            }
        }
    }
    let gb = &mut grads[Tensor::InputB];
    for node in 0..nodes {
        for k in 0..h {
            gb[k] += d_hidden[node * h + k];
        }
    }
    l
}

/// Pushes the accumulated graph gradients into `node_embedding` and `agc_w`.
pub(crate) fn finish_graph(
    shape: &ModelShape,
    p: &Params,
    graph: &Graph,
    gg: &GraphGrad,
    grads: &mut Params,
) {
    let (nodes, b, h, e) = (
        shape.nodes(),
        shape.node_dim,
        shape.hidden,
        shape.embedding_dim,
    );
    let he = h * e;
    let emb = &p[Tensor::NodeEmbedding];
    let w = &p[Tensor::AgcW];

    // Θ[n] = Σ_β E[n,β] W[β]
    let mut d_emb = vec![0.0; nodes * b];
    {
        let gw = &mut grads[Tensor::AgcW];
        for node in 0..nodes {
            let dt = &gg.theta[node * he..(node + 1) * he];
            for beta in 0..b {
                let coef = emb[node * b + beta];
                let wb = &w[beta * he..(beta + 1) * he];
                let gwb = &mut gw[beta * he..(beta + 1) * he];
                let mut acc = 0.0;
                for q in 0..he {
                    gwb[q] += coef * dt[q];
                    acc += dt[q] * wb[q];
                }
                d_emb[node * b + beta] += acc;
            }
        }
    }

    // A = I + softmax(ReLU(E·Eᵀ))
    let mut d_gram = vec![0.0; nodes * nodes];
    for i in 0..nodes {
        let s = &graph.soft[i * nodes..(i + 1) * nodes];
        let ds = &gg.adj[i * nodes..(i + 1) * nodes];
        let dot: f64 = s.iter().zip(ds).map(|(a, b)| a * b).sum();
        for j in 0..nodes {
            if graph.gram[i * nodes + j] > 0.0 {
                d_gram[i * nodes + j] = s[j] * (ds[j] - dot);
            }
        }
    }
    for i in 0..nodes {
        for j in 0..nodes {
            let g = d_gram[i * nodes + j];
            if g == 0.0 {
                continue;
            }
            for beta in 0..b {
                d_emb[i * b + beta] += g * emb[j * b + beta];
                d_emb[j * b + beta] += g * emb[i * b + beta];
            }
        }
    }
    for (g, v) in grads[Tensor::NodeEmbedding].iter_mut().zip(d_emb) {
        *g += v;
    }
}
