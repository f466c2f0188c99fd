use proptest::prelude::*;
use protad_core::metrics::{
    f1_at_k, f1_composite, f1_range, point_adjust_at_k, segments, MetricReport, K_GRID,
};

/// Runs as `(start, end)` pairs, found by walking the labels by hand.
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

fn f1(pred: &[bool], truth: &[bool]) -> f64 {
    let tp = pred.iter().zip(truth).filter(|(p, t)| **p && **t).count() as f64;
    let pp = pred.iter().filter(|p| **p).count() as f64;
    let tt = truth.iter().filter(|t| **t).count() as f64;
    let p = if pp > 0.0 { tp / pp } else { 0.0 };
    let r = if tt > 0.0 { tp / tt } else { 0.0 };
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn oracle_f1_at_k(pred: &[bool], truth: &[bool]) -> f64 {
    let mut total = 0.0;
    for step in 0..=10 {
        let mut adj = pred.to_vec();
        for (s, e) in runs(truth) {
            let hit = (s..e).filter(|&t| pred[t]).count();
            if hit * 10 > step * (e - s) {
                for a in adj.iter_mut().take(e).skip(s) {
                    *a = true;
                }
            }
        }
        total += f1(&adj, truth);
    }
    total / 11.0
}

fn oracle_composite(pred: &[bool], truth: &[bool]) -> f64 {
    let tp = pred.iter().zip(truth).filter(|(p, t)| **p && **t).count() as f64;
    let pp = pred.iter().filter(|p| **p).count() as f64;
    let p = if pp > 0.0 { tp / pp } else { 0.0 };
    let segs = runs(truth);
    let found = segs.iter().filter(|(s, e)| (*s..*e).any(|t| pred[t])).count() as f64;
    let r = found / segs.len() as f64;
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn oracle_range(pred: &[bool], truth: &[bool]) -> f64 {
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
    let r = cover(truth, pred);
    let p = cover(pred, truth);
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn pair() -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
    (1usize..=50).prop_flat_map(|n| {
        (
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(proptest::bool::weighted(0.3), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn metrics_match_brute_force((pred, truth) in pair()) {
        prop_assert!((f1_at_k(&pred, &truth).unwrap() - oracle_f1_at_k(&pred, &truth)).abs() < 1e-12);
        if truth.iter().any(|&t| t) {
            prop_assert!((f1_composite(&pred, &truth).unwrap() - oracle_composite(&pred, &truth)).abs() < 1e-12);
            prop_assert!((f1_range(&pred, &truth).unwrap() - oracle_range(&pred, &truth)).abs() < 1e-12);
        } else {
            prop_assert!(f1_composite(&pred, &truth).is_err());
            prop_assert!(f1_range(&pred, &truth).is_err());
        }
    }

    #[test]
    fn perfect_prediction_is_one(truth in proptest::collection::vec(any::<bool>(), 1..60)) {
        prop_assume!(truth.iter().any(|&t| t));
        let r = MetricReport::compute(&truth, &truth).unwrap();
        prop_assert_eq!(r.f1_at_k, 1.0);
        prop_assert_eq!(r.f1_composite, 1.0);
        prop_assert_eq!(r.f1_range, 1.0);
    }

    #[test]
    fn metrics_lie_in_unit_interval((pred, truth) in pair()) {
        prop_assume!(truth.iter().any(|&t| t));
        let r = MetricReport::compute(&pred, &truth).unwrap();
        for v in [r.f1_at_k, r.f1_composite, r.f1_range, r.point_f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn adjustment_is_monotone_in_k((pred, truth) in pair()) {
        let mut prev = usize::MAX;
        for &k in &K_GRID {
            let n = point_adjust_at_k(&pred, &truth, k).unwrap().iter().filter(|&&p| p).count();
            prop_assert!(n <= prev);
            prev = n;
        }
    }

    #[test]
    fn segments_partition_positives(labels in proptest::collection::vec(any::<bool>(), 0..80)) {
        let segs = segments(&labels);
        let expect: Vec<(usize, usize)> = runs(&labels);
        prop_assert_eq!(segs.iter().map(|s| (s.start, s.end)).collect::<Vec<_>>(), expect);
    }
}

#[test]
fn all_positive_prediction_at_ratio_0_105() {
    let n = 10_000;
    let mut truth = vec![false; n];
    truth[4000..5050].iter_mut().for_each(|t| *t = true);
    let pred = vec![true; n];
    let p: f64 = 0.105;
    let got = f1_at_k(&pred, &truth).unwrap();
    assert!((got - 2.0 * p / (1.0 + p)).abs() < 1e-12);
    assert!((got - 0.19).abs() <= 5e-4);
}
