//! Worked models built from the operation set, each paired with a
//! loop-based reference in [`oracle`].
//!
//! A [`Fixture`] draws its inputs from a seeded [`SplitMix64`](crate::rng::SplitMix64),
//! runs the named-tensor implementation and the reference on identical
//! values, and reports the largest absolute deviation.

pub mod applications;
pub mod blocks;
mod fixtures;
pub mod lenet;
pub mod oracle;
pub mod transformer;

use crate::error::Result;

pub use applications::{bayes, beam_step, cbow, kmeans_step, mvn_density, sudoku_check, Bayes, KMeansStep};
pub use blocks::{
    attention, batchnorm, conv1d, conv2d, dense, feedforward, full_conn, groupnorm, instancenorm, layernorm, maxpool1d,
    maxpool2d, norm_over, pool, rnn_elman, Affine, Dense, Elman,
};
pub use lenet::{lenet, lenet_unflattened, LeNetConfig, LeNetParams};
pub use transformer::{
    causal_mask, positional_encoding, transformer_lm, transformer_program, TransformerConfig, TransformerParams,
};

/// A seeded comparison between an implementation and its reference.
#[derive(Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    pub tolerance: f64,
    check: fn(u64) -> Result<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub name: &'static str,
    pub seed: u64,
    pub deviation: f64,
    pub tolerance: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

impl Fixture {
    pub fn run(&self, seed: u64) -> Result<Report> {
        let deviation = (self.check)(seed)?;
        Ok(Report {
            name: self.name,
            seed,
            deviation,
            tolerance: self.tolerance,
        })
    }
}

const fn fixture(name: &'static str, summary: &'static str, tolerance: f64, check: fn(u64) -> Result<f64>) -> Fixture {
    Fixture {
        name,
        summary,
        tolerance,
        check,
    }
}

const FIXTURES: &[Fixture] = &[
    fixture(
        "feedforward",
        "three sigmoid layers, inline and layer-module forms",
        1e-12,
        fixtures::feedforward_fixture,
    ),
    fixture("rnn", "Elman recurrence over three steps", 1e-12, fixtures::rnn_fixture),
    fixture(
        "attention",
        "attention lifted over seq', heads and batch",
        1e-12,
        fixtures::attention_fixture,
    ),
    fixture(
        "masked_attention",
        "attention under the causal mask",
        1e-12,
        fixtures::masked_attention_fixture,
    ),
    fixture(
        "conv",
        "1-d and 2-d convolution via unroll",
        1e-12,
        fixtures::conv_fixture,
    ),
    fixture("maxpool", "2-d max pooling via pool", 0.0, fixtures::maxpool_fixture),
    fixture("batchnorm", "batch normalization", 1e-12, fixtures::batchnorm_fixture),
    fixture(
        "instancenorm",
        "instance normalization",
        1e-12,
        fixtures::instancenorm_fixture,
    ),
    fixture("layernorm", "layer normalization", 1e-12, fixtures::layernorm_fixture),
    fixture(
        "groupnorm",
        "group normalization with groups of 2",
        1e-12,
        fixtures::groupnorm_fixture,
    ),
    fixture(
        "transformer",
        "two-layer causal Transformer language model",
        1e-12,
        fixtures::transformer_fixture,
    ),
    fixture(
        "transformer_program",
        "generated Transformer program run by the language evaluator",
        1e-12,
        fixtures::transformer_program_fixture,
    ),
    fixture(
        "lenet",
        "LeNet, flattened and multi-axis forms",
        1e-10,
        fixtures::lenet_fixture,
    ),
    fixture(
        "bayes",
        "chain rule, marginalization and Bayes' rule",
        1e-12,
        fixtures::bayes_fixture,
    ),
    fixture(
        "indexing",
        "embedding lookup and gather via index",
        0.0,
        fixtures::indexing_fixture,
    ),
    fixture("cbow", "continuous bag of words", 1e-12, fixtures::cbow_fixture),
    fixture(
        "sudoku",
        "accepts a solved grid, rejects a corrupted one",
        0.0,
        fixtures::sudoku_fixture,
    ),
    fixture(
        "kmeans",
        "one k-means step and its fixed point",
        1e-12,
        fixtures::kmeans_fixture,
    ),
    fixture(
        "beam",
        "beam search step against exhaustive enumeration",
        0.0,
        fixtures::beam_fixture,
    ),
    fixture("mvn", "multivariate normal density", 1e-12, fixtures::mvn_fixture),
    fixture(
        "mvn_grid",
        "normal density integrates to one on a grid",
        0.02,
        fixtures::mvn_grid_fixture,
    ),
];

pub fn fixtures() -> &'static [Fixture] {
    FIXTURES
}

pub fn find(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_passes_one_seed() {
        let failures: Vec<String> = fixtures()
            .iter()
            .filter_map(|f| match f.run(7) {
                Ok(r) if r.passed() => None,
                Ok(r) => Some(format!("{} deviates by {:e}", f.name, r.deviation)),
                Err(e) => Some(format!("{}: {e}", f.name)),
            })
            .collect();
        assert!(failures.is_empty(), "{failures:#?}");
    }

    #[test]
    fn names_are_unique() {
        for (i, f) in fixtures().iter().enumerate() {
            assert!(fixtures()[..i].iter().all(|g| g.name != f.name));
            assert!(find(f.name).is_some());
        }
    }
}
