use alloc::vec::Vec;

use rand::{seq::SliceRandom, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    grad::{backward_window, finish_graph, GraphGrad},
    model::Tensor,
    ops::{forward_trace, Graph},
    ForecastModel, Losses, ModelShape, Params, TrainConfig,
};
use crate::{
    data::{make_windows, Normalizer, RawSeries, WindowBatch},
    optim::AdamState,
    Error, Matrix, Result,
};

/// A trained model and the mean batch losses of every iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: ForecastModel,
    pub loss_trace: Vec<Losses>,
}

/// Trains a fresh model on normalized windows.
///
/// Each iteration takes the next mini-batch of a seeded shuffle (reshuffled
/// every epoch, final partial batch kept), runs the forward pass, computes
/// `MSE + λ·CE`, and applies one Adam step to the batch-mean gradient.
pub fn train(windows: &WindowBatch, config: &TrainConfig) -> Result<TrainOutcome> {
    if windows.is_empty() {
        return Err(Error::data("no training windows"));
    }
    let shape = ModelShape::new(windows.schema(), windows.window_len(), config)?;
    let mut model = ForecastModel::init(shape, config.seed);

    let batch_size = config.batch_size.min(windows.len());
    let per_epoch = windows.len().div_ceil(batch_size);
    let iterations = config.iterations.unwrap_or(config.epochs * per_epoch);

    let mut order: Vec<usize> = (0..windows.len()).collect();
    let mut shuffler = ChaCha8Rng::seed_from_u64(config.seed);
    shuffler.set_stream(1);

    let mut adam = AdamState::new(
        config.adam(),
        Tensor::ALL.map(|t| model.shape().len_of(t)),
    );
    let mut grads = Params::zeros(model.shape());
    let mut loss_trace = Vec::with_capacity(iterations);

    for iteration in 0..iterations {
        let slot = iteration % per_epoch;
        if slot == 0 {
            order.shuffle(&mut shuffler);
        }
        let batch = &order[slot * batch_size..((slot + 1) * batch_size).min(order.len())];
        let losses = batch_step(&model, windows, batch, config.lambda, &mut grads)?;
        if !losses.total.is_finite() {
            return Err(Error::Diverged { iteration });
        }
        if let Some(t) = grads.first_non_finite() {
            return Err(Error::NumericalBlowup { tensor: t.name() });
        }
        loss_trace.push(losses);
        adam.update(
            model.params_mut().iter_mut().map(|(_, v)| v),
            grads.iter().map(|(_, v)| v),
        );
    }
    Ok(TrainOutcome { model, loss_trace })
}

/// Batch-mean losses; `grads` is overwritten with the batch-mean gradient.
fn batch_step(
    model: &ForecastModel,
    windows: &WindowBatch,
    batch: &[usize],
    lambda: f64,
    grads: &mut Params,
) -> Result<Losses> {
    let shape = model.shape();
    let params = model.params();
    let graph = Graph::new(shape, params);
    let mut gg = GraphGrad::zeros(&graph);
    grads.fill(0.0);
    let scale = 1.0 / batch.len() as f64;
    let mut mean = Losses::default();
    for &i in batch {
        let trace = forward_trace(shape, params, &graph, windows.input(i))?;
        let l = backward_window(
            shape,
            &graph,
            &trace,
            windows.target(i),
            lambda,
            scale,
            grads,
            &mut gg,
        );
        mean.continuous += scale * l.continuous;
        mean.discrete += scale * l.discrete;
        mean.total += scale * l.total;
    }
    finish_graph(shape, params, &graph, &gg, grads);
    Ok(mean)
}

/// Rolling one-step forecasts for timesteps `N..T` of a raw series.
///
/// Every forecast conditions on observed history only. Continuous outputs
/// are mapped back to raw units and discrete outputs are argmax codes, so
/// the result lives in the same space as the input series.
pub fn forecast_series(
    model: &ForecastModel,
    normalizer: &Normalizer,
    series: &RawSeries,
) -> Result<RawSeries> {
    let shape = model.shape();
    if series.schema().width() != shape.width()
        || series.schema().cardinalities() != shape.cardinalities
    {
        return Err(Error::ShapeMismatch {
            what: "series width",
            expected: shape.width(),
            actual: series.schema().width(),
        });
    }
    let scaled = normalizer.apply(series)?;
    let windows = make_windows(&scaled.without_labels(), shape.window)?;
    let graph = Graph::new(shape, model.params());
    let c = shape.continuous;
    let mut out = Matrix::zeros(windows.len(), shape.width());
    for i in 0..windows.len() {
        let f = model.forward_with(&graph, windows.input(i))?;
        let row = out.row_mut(i);
        for (col, &v) in f.continuous.iter().enumerate() {
            row[col] = normalizer.unscale(col, v);
        }
        for (j, &code) in f.discrete_codes.iter().enumerate() {
            row[c + j] = code as f64;
        }
    }
    if out.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalBlowup { tensor: "forecast" });
    }
    RawSeries::new(series.schema().clone(), out, None)
}

/// Last-value persistence: the forecast of row `t` is row `t − 1`, for
/// `t = window..T`.
pub fn persistence_forecast(series: &RawSeries, window: usize) -> Result<RawSeries> {
    let n = series.timesteps();
    if window == 0 || n <= window {
        return Err(Error::SeriesTooShort {
            timesteps: n,
            required: window,
        });
    }
    Ok(series.slice(window - 1, n - 1).without_labels())
}
