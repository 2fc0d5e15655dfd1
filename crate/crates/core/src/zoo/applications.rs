//! Probability, indexing, bag-of-words, Sudoku, k-means, beam search and
//! the multivariate normal density.

use std::f64::consts::PI;

use crate::axes::Axis;
use crate::error::{Error, Result};
use crate::lift::zip_n;
use crate::ops::{
    argmaxk, argmin, contract, det, div, inv, maxk, mul, reduce, rename, softmax, split_axis, sub, ReduceKind,
};
use crate::tensor::NamedTensor;

/// Joint, marginal and posterior of discrete variables `A` and `B`.
#[derive(Clone, Debug)]
pub struct Bayes {
    pub joint: NamedTensor,
    pub marginal: NamedTensor,
    pub posterior: NamedTensor,
}

/// From `p(B | A)` over `{A, B}` and `p(A)` over `{A}`.
pub fn bayes(b_given_a: &NamedTensor, a: &NamedTensor) -> Result<Bayes> {
    let joint = mul(b_given_a, a)?;
    let marginal = contract(b_given_a, a, &["A"])?;
    if marginal.data().contains(&0.0) {
        return Err(Error::DivisionByZero("p(B) vanishes for some value of B".into()));
    }
    let posterior = div(&joint, &marginal)?;
    Ok(Bayes {
        joint,
        marginal,
        posterior,
    })
}

/// `softmax{classes}(Σ_seq W ·emb E ·vocab X)`.
pub fn cbow(x: &NamedTensor, e: &NamedTensor, w: &NamedTensor) -> Result<NamedTensor> {
    let embedded = contract(e, x, &["vocab"])?;
    let scores = reduce(&contract(w, &embedded, &["emb"])?, ReduceKind::Sum, &["seq"])?;
    softmax(&scores, &["classes"])
}

fn all_ones(t: &NamedTensor) -> bool {
    t.data().iter().all(|&v| v == 1.0)
}

/// 1 if a binary `{height[9], width[9], assign[9]}` grid has one digit per
/// cell, row, column and box, else 0.
pub fn sudoku_check(x: &NamedTensor) -> Result<f64> {
    let blocks = split_axis(x, "height", &Axis::new("height'", 3)?, &Axis::new("height", 3)?)?;
    let boxes = split_axis(&blocks, "width", &Axis::new("width'", 3)?, &Axis::new("width", 3)?)?;
    let valid = all_ones(&reduce(x, ReduceKind::Sum, &["assign"])?)
        && all_ones(&reduce(&boxes, ReduceKind::Sum, &["height", "width"])?)
        && all_ones(&reduce(x, ReduceKind::Sum, &["height"])?)
        && all_ones(&reduce(x, ReduceKind::Sum, &["width"])?);
    Ok(if valid { 1.0 } else { 0.0 })
}

/// Assignments over `{batch, clusters}` and updated centers.
#[derive(Clone, Debug)]
pub struct KMeansStep {
    pub assignments: NamedTensor,
    pub centers: NamedTensor,
}

/// One k-means step for points over `{batch, d}` and centers over
/// `{clusters, d}`. Points equidistant to several centers split their mass;
/// a cluster with no mass keeps its center.
pub fn kmeans_step(x: &NamedTensor, c: &NamedTensor) -> Result<KMeansStep> {
    let distance = reduce(&sub(c, x)?, ReduceKind::Norm, &["d"])?;
    let q = argmin(&distance, &["clusters"])?;
    let total = contract(&q, x, &["batch"])?;
    let mass = reduce(&q, ReduceKind::Sum, &["batch"])?;
    let centers = zip_n(&[&total, &mass, c], |v| if v[1] == 0.0 { v[2] } else { v[0] / v[1] })?;
    Ok(KMeansStep {
        assignments: q,
        centers,
    })
}

/// One beam-search step. `scores` is over `{beam}`, `states` one-hot over
/// `{beam, state}`, and `transition` maps states to scores over `{state}`.
/// Returns the new scores over `{beam}` and one-hot states over
/// `{beam, state}`.
pub fn beam_step(
    scores: &NamedTensor,
    states: &NamedTensor,
    transition: impl Fn(&NamedTensor) -> Result<NamedTensor>,
    beam: usize,
) -> Result<(NamedTensor, NamedTensor)> {
    let candidates = reduce(&mul(scores, &transition(states)?)?, ReduceKind::Max, &["beam"])?;
    let k = Axis::new("beam", beam)?;
    Ok((maxk(&candidates, "state", &k)?, argmaxk(&candidates, "state", &k)?))
}

/// Multivariate normal density at `x` over `{d}` with mean over `{d}` and
/// covariance over `{d1, d2}`. Extra axes on `x` are evaluated pointwise.
pub fn mvn_density(x: &NamedTensor, mean: &NamedTensor, cov: &NamedTensor) -> Result<NamedTensor> {
    let n = cov.shape().axis("d1")?.size as i32;
    let diff = sub(x, mean)?;
    let outer = mul(&rename(&diff, "d", "d1")?, &rename(&diff, "d", "d2")?)?;
    let form = contract(&inv(cov, "d1", "d2")?, &outer, &["d1", "d2"])?;
    let norm = ((2.0 * PI).powi(n) * det(cov, "d1", "d2")?.data()[0]).sqrt();
    Ok(form.map(|q| (-0.5 * q).exp() / norm))
}
