use proptest::prelude::*;
use protad_core::{
    data::{generate, make_windows, Normalizer, SynthConfig},
    detect::{
        calibrate, ecod, gmm, proactive_detect, segment_latencies, Detector, DetectorConfig,
        DetectorKind, GmmConfig, LatencySummary, Orientation, SvddConfig,
    },
    forecaster::{train, TrainConfig},
    Matrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn blobs(seed: u64, n: usize, dim: usize) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect();
    let mut data = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let c = &centers[rng.random_range(0..3)];
        let spread = rng.random_range(0.2..1.5);
        for &m in c {
            let z: f64 = rng.sample(StandardNormal);
            data.push(m + spread * z);
        }
    }
    Matrix::from_vec(n, dim, data).unwrap()
}

#[test]
fn em_log_likelihood_never_decreases() {
    for seed in 0..20 {
        let data = blobs(seed, 300, 1 + seed as usize % 4);
        let cfg = GmmConfig {
            components: 1 + seed as usize % 5,
            seed,
            ..GmmConfig::default()
        };
        let m = gmm::fit(&data, &cfg).unwrap();
        assert!(m.log_likelihood_trace.len() >= 2);
        for w in m.log_likelihood_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "seed {seed}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn gmm_score_matches_direct_density() {
    let data = blobs(7, 200, 3);
    let m = gmm::fit(&data, &GmmConfig::default()).unwrap();
    assert!((m.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for x in data.iter_rows().take(20) {
        let mut p = 0.0;
        for k in 0..m.components() {
            let mut dens = m.weights[k];
            for j in 0..3 {
                let v = m.variances.get(k, j);
                let d = x[j] - m.means.get(k, j);
                dens *= (-d * d / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
            }
            p += dens;
        }
        assert!((m.score(x) - p.ln()).abs() < 1e-9);
    }
}

fn ecod_oracle(train: &Matrix, x: &[f64]) -> f64 {
    let n = train.rows() as f64;
    let (mut l, mut r, mut a) = (0.0, 0.0, 0.0);
    for (j, &v) in x.iter().enumerate() {
        let col = train.column(j);
        let pl = (col.iter().filter(|&&c| c <= v).count() as f64 / n).max(1.0 / (n + 1.0));
        let pr = (col.iter().filter(|&&c| c >= v).count() as f64 / n).max(1.0 / (n + 1.0));
        let mean = col.iter().sum::<f64>() / n;
        let m2 = col.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
        let m3 = col.iter().map(|c| (c - mean).powi(3)).sum::<f64>() / n;
        let skew = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
        l -= pl.ln();
        r -= pr.ln();
        a -= if skew < 0.0 { pl.ln() } else { pr.ln() };
    }
    l.max(r).max(a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ecod_matches_counting_oracle(seed in any::<u64>(), probe in proptest::collection::vec(-8.0f64..8.0, 2)) {
        let train = blobs(seed, 60, 2);
        let m = ecod::fit(&train).unwrap();
        prop_assert!((m.score(&probe) - ecod_oracle(&train, &probe)).abs() < 1e-12);
        let row = train.row(seed as usize % 60).to_vec();
        prop_assert!((m.score(&row) - ecod_oracle(&train, &row)).abs() < 1e-12);
    }

    #[test]
    fn calibration_threshold_is_training_extreme(scores in proptest::collection::vec(-1e6f64..1e6, 1..100)) {
        let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let g = calibrate(DetectorKind::Gmm, &scores).unwrap();
        prop_assert_eq!(g.value, lo);
        prop_assert_eq!(g.orientation, Orientation::NormalHigh);
        let e = calibrate(DetectorKind::Ecod, &scores).unwrap();
        prop_assert_eq!(e.value, hi);
        prop_assert!(scores.iter().all(|&s| !g.is_anomaly(s) && !e.is_anomaly(s)));
    }
}

#[test]
fn no_calibration_row_is_flagged() {
    let data = blobs(3, 400, 4);
    for kind in [DetectorKind::Gmm, DetectorKind::Ecod, DetectorKind::Svdd] {
        let cfg = DetectorConfig {
            kind,
            svdd: SvddConfig {
                epochs: 10,
                ..SvddConfig::default()
            },
            ..DetectorConfig::default()
        };
        let det = Detector::fit(&data, &cfg).unwrap();
        let (_, flags) = det.classify(&data).unwrap();
        assert_eq!(flags.iter().filter(|&&f| f).count(), 0, "{kind}");
        let far = vec![1e3; 4];
        assert!(det.is_anomaly(&far), "{kind}");
    }
}

#[test]
fn classify_rejects_wrong_width() {
    let data = blobs(1, 50, 3);
    let det = Detector::fit(
        &data,
        &DetectorConfig {
            kind: DetectorKind::Ecod,
            ..DetectorConfig::default()
        },
    )
    .unwrap();
    assert!(det.classify(&Matrix::zeros(2, 2)).is_err());
}

#[test]
fn latency_accounting() {
    let mut labels = vec![false; 30];
    labels[10..15].iter_mut().for_each(|l| *l = true);
    labels[20..25].iter_mut().for_each(|l| *l = true);
    // flags start at timestep 5
    let mut flags = vec![false; 25];
    flags[8 - 5] = true;
    flags[22 - 5] = true;
    let lat = segment_latencies(&labels, &flags, 5, 3);
    assert_eq!(lat[0].latency, Some(-2));
    assert_eq!(lat[1].latency, Some(2));
    let s = LatencySummary::from_latencies(&lat);
    assert_eq!((s.segments, s.detected, s.early_or_on_time), (2, 2, 1));
    assert_eq!(s.mean, Some(0.0));

    let lat = segment_latencies(&labels, &flags, 5, 1);
    assert_eq!(lat[0].latency, None);
}

#[test]
fn detection_never_reads_labels() {
    let cfg = SynthConfig {
        train_len: 400,
        test_len: 300,
        ..SynthConfig::default()
    };
    let (train_s, test_s) = generate(&cfg, 5).unwrap();
    let norm = Normalizer::fit(&train_s).unwrap();
    let windows = make_windows(&norm.apply(&train_s).unwrap(), 5).unwrap();
    let tc = TrainConfig {
        hidden: 16,
        node_dim: 4,
        iterations: Some(60),
        ..TrainConfig::default()
    };
    let model = train(&windows, &tc).unwrap().model;
    let det = Detector::fit(train_s.values(), &DetectorConfig::default()).unwrap();
    let with = proactive_detect(&model, &norm, &det, &test_s, 10).unwrap();
    let without = proactive_detect(&model, &norm, &det, &test_s.clone().without_labels(), 10).unwrap();
    assert_eq!(with.scores, without.scores);
    assert_eq!(with.flags, without.flags);
    assert_eq!(with.flags.len(), test_s.timesteps() - 5);
    assert!(with.latency.is_some() && without.latency.is_none());
}
