mod common;

use common::*;
use namedtensor::ops::{self, ReduceKind};
use namedtensor::rng::SplitMix64;
use namedtensor::zoo::{self, LeNetConfig, LeNetParams, TransformerConfig, TransformerParams};
use proptest::prelude::*;

const SEEDS: u64 = 20;

macro_rules! fixture_tests {
    ($($name:ident),* $(,)?) => {$(
        #[test]
        fn $name() {
            let f = zoo::find(stringify!($name)).expect("fixture exists");
            for seed in 0..SEEDS {
                let r = f.run(seed).unwrap();
                assert!(r.passed(), "seed {seed}: deviation {:e} over {:e}", r.deviation, r.tolerance);
            }
        }
    )*};
}

fixture_tests!(
    feedforward,
    rnn,
    attention,
    masked_attention,
    conv,
    maxpool,
    batchnorm,
    instancenorm,
    layernorm,
    groupnorm,
    transformer,
    transformer_program,
    lenet,
    bayes,
    indexing,
    cbow,
    sudoku,
    kmeans,
    beam,
    mvn,
    mvn_grid,
);

#[test]
fn every_fixture_has_a_test() {
    assert_eq!(zoo::fixtures().len(), 21);
}

#[test]
fn pooling_needs_whole_blocks() {
    let x = uniform(&mut SplitMix64::new(0), &shape(&[("seq", 5)]));
    assert_eq!(zoo::maxpool1d(&x, 2).unwrap_err().kind(), "SizeMismatch");
}

#[test]
fn causal_mask_hides_the_future() {
    let m = zoo::causal_mask(3).unwrap();
    let rows = m.to_ordered(&["seq'", "seq"]).unwrap();
    let inf = f64::NEG_INFINITY;
    assert_eq!(rows, [0., inf, inf, 0., 0., inf, 0., 0., 0.]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transformer_outputs_are_distributions(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let config = TransformerConfig::default();
        let params = TransformerParams::random(&config, &mut rng).unwrap();
        let tokens = rng.one_hot(shape(&[("seq", config.seq), ("vocab", config.vocab)]), "vocab");
        let out = zoo::transformer_lm(&tokens, &params).unwrap();
        let totals = ops::reduce(&out, ReduceKind::Sum, &["vocab"]).unwrap();
        prop_assert!(totals.data().iter().all(|t| (t - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn transformer_ignores_later_tokens(seed in any::<u64>(), cut in 2usize..=4) {
        let mut rng = SplitMix64::new(seed);
        let config = TransformerConfig::default();
        let params = TransformerParams::random(&config, &mut rng).unwrap();
        let tokens = shape(&[("seq", config.seq), ("vocab", config.vocab)]);
        let (a, b) = (rng.one_hot(tokens.clone(), "vocab"), rng.one_hot(tokens.clone(), "vocab"));
        let mixed = namedtensor::NamedTensor::from_fn(tokens, |r| {
            if r.get("seq").unwrap() < cut { at(&a, r) } else { at(&b, r) }
        });
        let (out_a, out_mixed) = (zoo::transformer_lm(&a, &params).unwrap(), zoo::transformer_lm(&mixed, &params).unwrap());
        for r in out_a.shape().records().filter(|r| r.get("seq").unwrap() < cut) {
            prop_assert_eq!(at(&out_a, &r), at(&out_mixed, &r));
        }
    }

    #[test]
    fn lenet_forms_agree(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let config = LeNetConfig::default();
        let params = LeNetParams::random(&config, &mut rng).unwrap();
        let input = shape(&[("batch", config.batch), ("chans", config.chans[0]), ("height", config.side), ("width", config.side)]);
        let x = uniform(&mut rng, &input);
        let flat = zoo::lenet(&x, &params, config.pool).unwrap();
        let multi = zoo::lenet_unflattened(&x, &params, config.pool).unwrap();
        prop_assert!(flat.max_abs_diff(&multi).unwrap() <= 1e-12);
        let totals = ops::reduce(&flat, ReduceKind::Sum, &["classes"]).unwrap();
        prop_assert!(totals.data().iter().all(|t| (t - 1.0).abs() <= 1e-12));
    }
}
