use proptest::prelude::*;
use protad_core::{
    data::{generate, make_windows, one_hot, FeatureSchema, Normalizer, RawSeries, SynthConfig},
    forecaster::decompose,
    Matrix,
};

fn series_strategy() -> impl Strategy<Value = RawSeries> {
    (1usize..4, proptest::collection::vec(2usize..5, 0..3), 8usize..40).prop_flat_map(
        |(c, cards, t)| {
            let cards2 = cards.clone();
            let cont = proptest::collection::vec(-50.0f64..50.0, t * c);
            let codes = proptest::collection::vec(0usize..100, t * cards.len());
            (cont, codes).prop_map(move |(cont, codes)| {
                let d = cards2.len();
                let mut data = Vec::with_capacity(t * (c + d));
                for r in 0..t {
                    data.extend_from_slice(&cont[r * c..(r + 1) * c]);
                    for j in 0..d {
                        data.push((codes[r * d + j] % cards2[j]) as f64);
                    }
                }
                let schema = FeatureSchema::anonymous(c, &cards2, None).unwrap();
                RawSeries::new(schema, Matrix::from_vec(t, c + d, data).unwrap(), None).unwrap()
            })
        },
    )
}

proptest! {
    #[test]
    fn normalization_roundtrips(s in series_strategy()) {
        let norm = Normalizer::fit(&s).unwrap();
        let scaled = norm.apply(&s).unwrap();
        let c = s.schema().continuous_count();
        for t in 0..s.timesteps() {
            for j in 0..c {
                let v = scaled.row(t)[j];
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
            }
            prop_assert_eq!(&scaled.row(t)[c..], &s.row(t)[c..]);
        }
        let back = norm.invert(&scaled).unwrap();
        for (a, b) in back.values().as_slice().iter().zip(s.values().as_slice()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn windows_cover_every_target(s in series_strategy(), n in 1usize..8) {
        let w = make_windows(&s, n).unwrap();
        prop_assert_eq!(w.len(), s.timesteps() - n);
        for i in 0..w.len() {
            prop_assert_eq!(w.target(i), s.row(i + n));
            prop_assert_eq!(&w.input(i)[..s.schema().width()], s.row(i));
        }
    }

    #[test]
    fn one_hot_rows_sum_to_one(s in series_strategy()) {
        let d = s.schema().discrete_count();
        prop_assume!(d > 0);
        let e = s.schema().embedding_dim();
        let oh = one_hot(&s).unwrap();
        for chunk in oh.chunks(e) {
            prop_assert_eq!(chunk.iter().sum::<f64>(), 1.0);
        }
        for t in 0..s.timesteps() {
            for j in 0..d {
                let code = s.code(t, j);
                prop_assert_eq!(oh[(t * d + j) * e + code], 1.0);
            }
        }
    }

    #[test]
    fn decomposition_is_exact_on_unit_scale(block in proptest::collection::vec(-1.0f64..1.0, 5..=40)) {
        let c = block.len() / 5;
        let block = &block[..5 * c];
        let (trend, seasonal) = decompose(block, c, 3).unwrap();
        for i in 0..block.len() {
            prop_assert!((trend[i] + seasonal[i] - block[i]).abs() < 1e-14);
        }
    }
}

#[test]
fn too_short_series_is_rejected() {
    let schema = FeatureSchema::anonymous(1, &[], None).unwrap();
    let s = RawSeries::new(schema, Matrix::zeros(5, 1), None).unwrap();
    assert!(make_windows(&s, 5).is_err());
    assert_eq!(make_windows(&s, 4).unwrap().len(), 1);
}

#[test]
fn synthetic_generation_is_seeded() {
    let cfg = SynthConfig {
        train_len: 300,
        test_len: 200,
        ..SynthConfig::default()
    };
    let a = generate(&cfg, 9).unwrap();
    let b = generate(&cfg, 9).unwrap();
    let c = generate(&cfg, 10).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.1.values(), c.1.values());
    assert!(a.0.labels().is_none_or(|l| l.iter().all(|&x| !x)));
    assert!(a.1.labels().unwrap().iter().any(|&x| x));
}
