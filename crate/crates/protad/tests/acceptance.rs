//! Acceptance criteria 1–10, one PASS/FAIL line each.

use std::{
    f64::consts::PI,
    fs,
    path::Path,
    process::{Command, ExitCode},
    time::{Duration, Instant},
};

use protad_core::{
    data::{generate, make_windows, AnomalySpec, Normalizer, SynthConfig},
    detect::{gmm, Detector, DetectorConfig, DetectorKind, GmmConfig},
    forecaster::{
        decompose, forecast_series, gradients, persistence_forecast, train, Activation,
        ForecastModel, HeadMode, ModelShape, Params, Tensor, TrainConfig,
    },
    metrics::{f1_at_k, f1_composite, f1_range},
    spectral::{hull_membership, irdft, rdft, Polytope},
    Matrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

fn decomposition_identity() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let c = rng.random_range(1..=8);
        let block: Vec<f64> = (0..5 * c).map(|_| rng.random_range(0.0..1.0)).collect();
        let (trend, seasonal) = decompose(&block, c, 3).map_err(|e| e.to_string())?;
        for i in 0..block.len() {
            worst = worst.max((trend[i] + seasonal[i] - block[i]).abs());
        }
    }
    within(started.elapsed(), 1.0)?;
    ensure(worst < 1e-14, || format!("max error {worst:e}"))?;
    Ok(format!("max |error| {worst:e}"))
}

fn gram_margin(shape: &ModelShape, p: &Params) -> f64 {
    let (n, b) = (shape.nodes(), shape.node_dim);
    let e = &p[Tensor::NodeEmbedding];
    let mut m = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            m = m.min((0..b).map(|k| e[i * b + k] * e[j * b + k]).sum::<f64>().abs());
        }
    }
    m
}

fn gradient_correctness() -> Outcome {
    let started = Instant::now();
    let shape = ModelShape {
        continuous: 2,
        cardinalities: vec![3, 2],
        embedding_dim: 3,
        hidden: 8,
        node_dim: 4,
        window: 5,
        kernel_size: 3,
        head_mode: HeadMode::Shared,
        activation: Activation::Tanh,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let row = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        vec![
            rng.random_range(0.0..1.0),
            rng.random_range(0.0..1.0),
            rng.random_range(0..3) as f64,
            rng.random_range(0..2) as f64,
        ]
    };
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    let mut triples = 0;
    while triples < 100 {
        let mut p = Params::zeros(&shape);
        for (_, v) in p.iter_mut() {
            v.iter_mut().for_each(|x| *x = rng.random_range(-0.8..0.8));
        }
        // keep finite differences away from the ReLU kink of the adjacency
        if gram_margin(&shape, &p) < 1e-3 {
            continue;
        }
        let window: Vec<f64> = (0..5).flat_map(|_| row(&mut rng)).collect();
        let target = row(&mut rng);
        let model = ForecastModel::from_params(shape.clone(), p.clone()).map_err(|e| e.to_string())?;
        let (_, grads) = gradients(&model, &window, &target, 1.0).map_err(|e| e.to_string())?;
        let loss = |p: &Params| {
            let m = ForecastModel::from_params(shape.clone(), p.clone()).unwrap();
            let f = m.forward(&window).unwrap();
            m.loss(&f, &target, 1.0).unwrap().total
        };
        for t in Tensor::ALL {
            for k in 0..p[t].len() {
                let mut hi = p.clone();
                hi[t][k] += step;
                let mut lo = p.clone();
                lo[t][k] -= step;
                let numeric = (loss(&hi) - loss(&lo)) / (2.0 * step);
                let analytic = grads[t][k];
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max(rel);
                checked += 1;
            }
        }
        triples += 1;
    }
    within(started.elapsed(), 30.0)?;
    ensure(worst <= 1e-4, || format!("worst relative error {worst:e}"))?;
    Ok(format!("{checked} partials, worst relative error {worst:e}"))
}

fn training_beats_persistence() -> Outcome {
    let started = Instant::now();
    let cfg = SynthConfig {
        train_len: 2000,
        test_len: 1000,
        anomaly: AnomalySpec {
            count: 0,
            ..AnomalySpec::default()
        },
        ..SynthConfig::default()
    };
    let err = |e: protad_core::Error| e.to_string();
    let (train_s, test_s) = generate(&cfg, 3).map_err(err)?;
    let norm = Normalizer::fit(&train_s).map_err(err)?;
    let windows = make_windows(&norm.apply(&train_s).map_err(err)?, 5).map_err(err)?;
    let tc = TrainConfig {
        iterations: Some(2000),
        ..TrainConfig::default()
    };
    let model = train(&windows, &tc).map_err(err)?.model;
    let forecast = forecast_series(&model, &norm, &test_s).map_err(err)?;
    let persist = persistence_forecast(&test_s, 5).map_err(err)?;
    let c = cfg.continuous;
    let d = cfg.cardinalities.len();

    let (mut mse_model, mut mse_persist) = (0.0, 0.0);
    let (mut hits, mut majority_hits) = (0usize, 0usize);
    let majority: Vec<usize> = cfg
        .cardinalities
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            (0..k)
                .max_by_key(|&v| (0..train_s.timesteps()).filter(|&t| train_s.code(t, j) == v).count())
                .unwrap()
        })
        .collect();
    let rows = forecast.timesteps();
    for i in 0..rows {
        let truth = test_s.row(i + 5);
        for col in 0..c {
            let y = norm.scale(col, truth[col]);
            mse_model += (norm.scale(col, forecast.row(i)[col]) - y).powi(2);
            mse_persist += (norm.scale(col, persist.row(i)[col]) - y).powi(2);
        }
        for j in 0..d {
            let code = truth[c + j] as usize;
            hits += usize::from(forecast.row(i)[c + j] as usize == code);
            majority_hits += usize::from(majority[j] == code);
        }
    }
    let n = (rows * c) as f64;
    let (mse_model, mse_persist) = (mse_model / n, mse_persist / n);
    let acc = hits as f64 / (rows * d) as f64;
    let base = majority_hits as f64 / (rows * d) as f64;
    within(started.elapsed(), 60.0)?;
    ensure(mse_model <= 0.5 * mse_persist, || {
        format!("MSE {mse_model:.5} vs persistence {mse_persist:.5}")
    })?;
    ensure(acc >= base, || format!("accuracy {acc:.4} below majority {base:.4}"))?;
    Ok(format!(
        "MSE {mse_model:.5} vs persistence {mse_persist:.5}; accuracy {acc:.4} vs majority {base:.4}"
    ))
}

fn blobs(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Matrix {
    let centers: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..dim).map(|_| rng.random_range(-4.0..4.0)).collect())
        .collect();
    let mut data = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let c = &centers[rng.random_range(0..3)];
        for &m in c {
            // sum of uniforms, roughly Gaussian
            let z: f64 = (0..4).map(|_| rng.random_range(-1.0..1.0)).sum();
            data.push(m + 0.5 * z);
        }
    }
    Matrix::from_vec(n, dim, data).unwrap()
}

fn em_monotone() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut steps = 0;
    for seed in 0..20u64 {
        let dim = rng.random_range(1..=5);
        let n = rng.random_range(100..400);
        let data = blobs(&mut rng, n, dim);
        let cfg = GmmConfig {
            components: rng.random_range(1..=5),
            seed,
            ..GmmConfig::default()
        };
        let m = gmm::fit(&data, &cfg).map_err(|e| e.to_string())?;
        for (i, w) in m.log_likelihood_trace.windows(2).enumerate() {
            ensure(w[1] >= w[0] - 1e-9, || {
                format!("dataset {seed} iteration {i}: {} -> {}", w[0], w[1])
            })?;
            steps += 1;
        }
    }
    Ok(format!("20 datasets, {steps} EM steps nondecreasing"))
}

fn calibration_sound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data = blobs(&mut rng, 500, 4);
    let mut parts = Vec::new();
    for kind in [DetectorKind::Gmm, DetectorKind::Ecod, DetectorKind::Svdd] {
        let cfg = DetectorConfig {
            kind,
            ..DetectorConfig::default()
        };
        let det = Detector::fit(&data, &cfg).map_err(|e| e.to_string())?;
        let (_, flags) = det.classify(&data).map_err(|e| e.to_string())?;
        let n = flags.iter().filter(|&&f| f).count();
        ensure(n == 0, || format!("{kind}: {n} calibration rows flagged"))?;
        parts.push(format!("{kind} 0/500"));
    }
    Ok(parts.join(", "))
}

fn runs(labels: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut t = 0;
    while t < labels.len() {
        if labels[t] {
            let s = t;
            while t < labels.len() && labels[t] {
                t += 1;
            }
            out.push((s, t));
        } else {
            t += 1;
        }
    }
    out
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn brute_f1_at_k(pred: &[bool], truth: &[bool]) -> f64 {
    let mut sum = 0.0;
    for step in 0..=10usize {
        let mut adj = pred.to_vec();
        for (s, e) in runs(truth) {
            let hit = (s..e).filter(|&t| pred[t]).count();
            if hit * 10 > step * (e - s) {
                (s..e).for_each(|t| adj[t] = true);
            }
        }
        let tp = (0..truth.len()).filter(|&t| adj[t] && truth[t]).count() as f64;
        let pp = adj.iter().filter(|&&a| a).count() as f64;
        let tt = truth.iter().filter(|&&a| a).count() as f64;
        let p = if pp > 0.0 { tp / pp } else { 0.0 };
        let r = if tt > 0.0 { tp / tt } else { 0.0 };
        sum += harmonic(p, r);
    }
    sum / 11.0
}

fn brute_composite(pred: &[bool], truth: &[bool]) -> f64 {
    let tp = (0..truth.len()).filter(|&t| pred[t] && truth[t]).count() as f64;
    let pp = pred.iter().filter(|&&a| a).count() as f64;
    let p = if pp > 0.0 { tp / pp } else { 0.0 };
    let segs = runs(truth);
    let found = segs.iter().filter(|&&(s, e)| (s..e).any(|t| pred[t])).count();
    harmonic(p, found as f64 / segs.len() as f64)
}

fn brute_range(pred: &[bool], truth: &[bool]) -> f64 {
    let cover = |of: &[bool], by: &[bool]| {
        let segs = runs(of);
        if segs.is_empty() {
            return 0.0;
        }
        segs.iter()
            .map(|&(s, e)| (s..e).filter(|&t| by[t]).count() as f64 / (e - s) as f64)
            .sum::<f64>()
            / segs.len() as f64
    };
    harmonic(cover(pred, truth), cover(truth, pred))
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut cases = 0;
    while cases < 200 {
        let n = rng.random_range(1..=50);
        let density = rng.random_range(0.05..0.6);
        let truth: Vec<bool> = (0..n).map(|_| rng.random_bool(density)).collect();
        if !truth.iter().any(|&t| t) {
            continue;
        }
        let pred: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        let e = |e: protad_core::Error| e.to_string();
        let pairs = [
            ("f1_at_k", f1_at_k(&pred, &truth).map_err(e)?, brute_f1_at_k(&pred, &truth)),
            ("f1_composite", f1_composite(&pred, &truth).map_err(e)?, brute_composite(&pred, &truth)),
            ("f1_range", f1_range(&pred, &truth).map_err(e)?, brute_range(&pred, &truth)),
        ];
        for (name, got, want) in pairs {
            ensure((got - want).abs() <= 1e-12, || {
                format!("{name}: {got} vs oracle {want} on case {cases}")
            })?;
        }
        for (name, v) in [
            ("f1_at_k", f1_at_k(&truth, &truth).map_err(e)?),
            ("f1_composite", f1_composite(&truth, &truth).map_err(e)?),
            ("f1_range", f1_range(&truth, &truth).map_err(e)?),
        ] {
            ensure(v == 1.0, || format!("perfect {name} = {v}"))?;
        }
        cases += 1;
    }
    Ok("200 random pairs agree; perfect prediction scores 1.0".into())
}

fn all_positive_anchor() -> Outcome {
    let n = 10_000;
    let mut truth = vec![false; n];
    truth[3000..4050].iter_mut().for_each(|t| *t = true);
    let got = f1_at_k(&vec![true; n], &truth).map_err(|e| e.to_string())?;
    let p: f64 = 0.105;
    let expected = 2.0 * p / (1.0 + p);
    ensure((got - 0.19).abs() <= 5e-4 && (got - expected).abs() < 1e-12, || {
        format!("f1_at_k {got}")
    })?;
    Ok(format!("f1_at_k {got:.6} (2p/(1+p) = {expected:.6})"))
}

fn dft_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut rec, mut pars, mut naive) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let v: Vec<f64> = (0..6).map(|_| rng.random_range(-10.0..10.0)).collect();
        let x = rdft(&v).map_err(|e| e.to_string())?;
        for (k, c) in x.iter().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &vt) in v.iter().enumerate() {
                let a = 2.0 * PI * (k * t) as f64 / 6.0;
                re += vt * a.cos();
                im -= vt * a.sin();
            }
            naive = naive.max((c.re - re).abs()).max((c.im - im).abs());
        }
        let back = irdft(&x, 6).map_err(|e| e.to_string())?;
        rec = v.iter().zip(&back).fold(rec, |m, (a, b)| m.max((a - b).abs()));
        let a: Vec<f64> = x.iter().map(|c| c.norm()).collect();
        let energy: f64 = v.iter().map(|t| t * t).sum();
        let spec = (a[0] * a[0] + 2.0 * a[1] * a[1] + 2.0 * a[2] * a[2] + a[3] * a[3]) / 6.0;
        pars = pars.max((energy - spec).abs());
    }
    let cosine: Vec<f64> = (0..6).map(|t| (2.0 * PI * t as f64 / 6.0).cos()).collect();
    let x1 = rdft(&cosine).map_err(|e| e.to_string())?[1].norm();
    ensure(rec < 1e-10, || format!("reconstruction error {rec:e}"))?;
    ensure(pars < 1e-9, || format!("Parseval error {pars:e}"))?;
    ensure(naive < 1e-10, || format!("naive DFT disagreement {naive:e}"))?;
    ensure((x1 - 3.0).abs() <= 1e-9, || format!("|X_1| = {x1}"))?;
    Ok(format!(
        "reconstruction {rec:e}, Parseval {pars:e}, |X_1| of cosine {x1}"
    ))
}

type P2 = (f64, f64);

fn cross(o: P2, a: P2, b: P2) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn monotone_chain(pts: &[P2]) -> Vec<P2> {
    let mut p = pts.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<P2> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &P2>> = if pass == 0 {
            Box::new(p.iter())
        } else {
            Box::new(p.iter().rev())
        };
        for &q in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0
            {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

fn hull_membership_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut inside, mut outside) = (0, 0);
    let mut done = 0;
    while done < 500 {
        let n = rng.random_range(1..=30);
        let pts: Vec<P2> = (0..n)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let q = (rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2));
        let hull = monotone_chain(&pts);
        let expected = if hull.len() < 3 {
            false
        } else {
            let mut margin = f64::INFINITY;
            for i in 0..hull.len() {
                let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
                let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
                margin = margin.min(cross(a, b, q) / len);
            }
            if margin.abs() < 1e-6 {
                continue;
            }
            margin > 0.0
        };
        let rows: Vec<[f64; 2]> = pts.iter().map(|p| [p.0, p.1]).collect();
        let got = hull_membership(&Matrix::from_rows(&rows).unwrap(), &[q.0, q.1])
            .map_err(|e| e.to_string())?;
        ensure(got == expected, || format!("instance {done}: LP {got}, half-planes {expected}"))?;
        if expected {
            inside += 1;
        } else {
            outside += 1;
        }
        done += 1;
    }

    for _ in 0..100 {
        let n = rng.random_range(1..=50);
        let data: Vec<f64> = (0..n * 4).map(|_| rng.random_range(0.0..5.0)).collect();
        let pts = Matrix::from_vec(n, 4, data).unwrap();
        let poly = Polytope::new(pts.clone()).map_err(|e| e.to_string())?;
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let s: f64 = w.iter().sum();
        let q: Vec<f64> = (0..4)
            .map(|j| (0..n).map(|i| w[i] / s * pts.get(i, j)).sum())
            .collect();
        ensure(poly.contains(&q).map_err(|e| e.to_string())?, || {
            "convex combination classified outside".into()
        })?;
        let j = rng.random_range(0..4);
        let mut far = q.clone();
        far[j] = pts.column(j).into_iter().fold(f64::MIN, f64::max) + rng.random_range(1e-3..2.0);
        ensure(!poly.contains(&far).map_err(|e| e.to_string())?, || {
            "coordinate-exceeding query classified inside".into()
        })?;
    }
    Ok(format!(
        "500 planar instances agree ({inside} inside, {outside} outside); 100 4-D combinations inside, 100 excess queries outside"
    ))
}

fn protad(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_protad"))
        .args(args)
        .args(["--config", dir.join("config.json").to_str().unwrap()])
        .env_remove("PROTAD_OUT_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("protad {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

fn json(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn has_fields(v: &Value, fields: &[&str], what: &str) -> Result<(), String> {
    for f in fields {
        ensure(v.get(f).is_some(), || format!("{what} lacks {f:?}"))?;
    }
    Ok(())
}

fn proactive_end_to_end() -> Outcome {
    let started = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let config = serde_json::json!({
        "output_dir": "out",
        "seed": 7,
        "train": { "iterations": 2000, "seed": 7 },
        "detector": { "kind": "gmm" },
    });
    fs::write(dir.join("config.json"), config.to_string()).map_err(|e| e.to_string())?;
    for stage in ["synth", "train", "calibrate", "detect", "eval", "spectral"] {
        protad(dir, &[stage])?;
    }
    within(started.elapsed(), 120.0)?;
    let out = dir.join("out");

    let model = json(&out.join("model.json"))?;
    has_fields(&model, &["format_version", "schema", "shape", "normalizer", "tensors"], "model")?;
    let names: Vec<&str> = Tensor::ALL.iter().map(|t| t.name()).collect();
    has_fields(&model["tensors"], &names, "model tensors")?;
    has_fields(&json(&out.join("detector.json"))?, &["format_version", "detector"], "detector")?;
    let metrics = json(&out.join("metrics.json"))?;
    has_fields(&metrics, &["format_version", "f1_at_k", "f1_composite", "f1_range"], "metrics")?;
    let hull = json(&out.join("hull_report.json"))?;
    has_fields(&hull, &["format_version", "features", "pooled_outside_fraction"], "hull report")?;
    for f in hull["features"].as_array().into_iter().flatten() {
        has_fields(f, &["feature", "train_samples", "anomaly_samples", "superset_equal", "outside", "outside_fraction"], "hull feature")?;
    }
    let report = json(&out.join("run_report.json"))?;
    has_fields(
        &report,
        &["format_version", "config", "data", "training", "threshold", "detection", "metrics", "hull", "timings"],
        "run report",
    )?;
    let detect = json(&out.join("detect_report.json"))?;
    let latencies: Vec<i64> = detect["latency"]
        .as_array()
        .into_iter()
        .flatten()
        .filter_map(|s| s["latency"].as_i64())
        .collect();
    ensure(latencies.iter().any(|&l| l <= 0), || {
        format!("no segment flagged at or before its start; latencies {latencies:?}")
    })?;

    let flags = fs::read(out.join("flags.csv")).map_err(|e| e.to_string())?;
    let scores = fs::read(out.join("scores.csv")).map_err(|e| e.to_string())?;
    fs::remove_file(out.join("labels.csv")).map_err(|e| e.to_string())?;
    protad(dir, &["detect"])?;
    ensure(fs::read(out.join("flags.csv")).map_err(|e| e.to_string())? == flags, || {
        "flags changed without labels".into()
    })?;
    ensure(fs::read(out.join("scores.csv")).map_err(|e| e.to_string())? == scores, || {
        "scores changed without labels".into()
    })?;
    Ok(format!(
        "pipeline {:.1}s, latencies {latencies:?}, F1-@K {:.3}, label removal changes nothing",
        started.elapsed().as_secs_f64(),
        metrics["f1_at_k"].as_f64().unwrap_or(f64::NAN)
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("decomposition identity", decomposition_identity),
        ("gradient correctness", gradient_correctness),
        ("training beats persistence", training_beats_persistence),
        ("EM monotonicity", em_monotone),
        ("calibration soundness", calibration_sound),
        ("metric oracle equivalence", metric_oracles),
        ("all-positive F1-@K anchor", all_positive_anchor),
        ("DFT fidelity", dft_fidelity),
        ("hull membership vs geometric oracle", hull_membership_oracle),
        ("proactive end-to-end", proactive_end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
