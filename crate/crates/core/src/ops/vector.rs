use std::fmt;

use crate::axes::Shape;
use crate::error::{Error, Result};
use crate::lift::{self, Signature};
use crate::tensor::NamedTensor;

use super::axis_list;

/// Default `ε` added to the variance in [`standardize`].
pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Vector-to-vector maps over a set of axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormalizeKind {
    Softmax,
    /// `lim_{α→∞} softmax(αA)`: uniform mass over the tied maxima.
    Argmax,
    /// `lim_{α→−∞} softmax(αA)`: uniform mass over the tied minima.
    Argmin,
}

impl NormalizeKind {
    pub fn name(self) -> &'static str {
        match self {
            NormalizeKind::Softmax => "softmax",
            NormalizeKind::Argmax => "argmax",
            NormalizeKind::Argmin => "argmin",
        }
    }

    pub fn from_name(name: &str) -> Option<NormalizeKind> {
        [NormalizeKind::Softmax, NormalizeKind::Argmax, NormalizeKind::Argmin]
            .into_iter()
            .find(|k| k.name() == name)
    }

    fn apply(self, values: &[f64], axes: &Shape) -> Result<Vec<f64>> {
        match self {
            NormalizeKind::Softmax => {
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if max == f64::NEG_INFINITY {
                    return Err(Error::AllMasked(axes.to_string()));
                }
                let exps: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
                let mut total = 0.0;
                for e in &exps {
                    total += e;
                }
                Ok(exps.into_iter().map(|e| e / total).collect())
            }
            NormalizeKind::Argmax | NormalizeKind::Argmin => {
                let pick = if self == NormalizeKind::Argmax {
                    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                } else {
                    values.iter().copied().fold(f64::INFINITY, f64::min)
                };
                let ties = values.iter().filter(|&&v| v == pick).count();
                let mass = 1.0 / ties as f64;
                Ok(values.iter().map(|&v| if v == pick { mass } else { 0.0 }).collect())
            }
        }
    }
}

impl fmt::Display for NormalizeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn same_shape_signature<S: AsRef<str>>(a: &Shape, axes: &[S]) -> Result<Signature> {
    let base = axis_list(a, axes)?;
    Ok(Signature::new(vec![base.clone()], base))
}

pub fn normalize<S: AsRef<str>>(a: &NamedTensor, kind: NormalizeKind, axes: &[S]) -> Result<NamedTensor> {
    let sig = same_shape_signature(a.shape(), axes)?;
    let base = sig.output.clone();
    lift::extend_unary(
        &sig,
        |x| NamedTensor::new(base.clone(), kind.apply(x.data(), &base)?),
        a,
    )
}

pub fn normalize_shape<S: AsRef<str>>(a: &Shape, axes: &[S]) -> Result<Shape> {
    lift::extended_shape(&same_shape_signature(a, axes)?, &[a])
}

/// `exp A / Σ_axes exp A`, computed with max-subtraction; `-inf` entries get
/// zero mass.
pub fn softmax<S: AsRef<str>>(a: &NamedTensor, axes: &[S]) -> Result<NamedTensor> {
    normalize(a, NormalizeKind::Softmax, axes)
}

pub fn argmax<S: AsRef<str>>(a: &NamedTensor, axes: &[S]) -> Result<NamedTensor> {
    normalize(a, NormalizeKind::Argmax, axes)
}

pub fn argmin<S: AsRef<str>>(a: &NamedTensor, axes: &[S]) -> Result<NamedTensor> {
    normalize(a, NormalizeKind::Argmin, axes)
}

/// `(A − mean A) / sqrt(var A + ε)` over `axes` jointly.
pub fn standardize<S: AsRef<str>>(a: &NamedTensor, axes: &[S], epsilon: f64) -> Result<NamedTensor> {
    let sig = same_shape_signature(a.shape(), axes)?;
    let base = sig.output.clone();
    lift::extend_unary(
        &sig,
        |x| {
            let values = x.data();
            let n = values.len() as f64;
            let mut total = 0.0;
            for v in values {
                total += v;
            }
            let mean = total / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let scale = (var + epsilon).sqrt();
            NamedTensor::new(base.clone(), values.iter().map(|v| (v - mean) / scale).collect())
        },
        a,
    )
}

pub fn standardize_shape<S: AsRef<str>>(a: &Shape, axes: &[S]) -> Result<Shape> {
    normalize_shape(a, axes)
}
