use std::fmt;

use crate::axes::Shape;
use crate::error::{Error, Result};
use crate::lift::{self, Signature};
use crate::tensor::NamedTensor;

use super::axis_list;

/// Reductions from a set of axes to a scalar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReduceKind {
    Sum,
    Min,
    Max,
    Mean,
    /// Population variance, `(1/n) Σ (A − mean A)²`.
    Var,
    /// Euclidean norm, `sqrt(Σ A²)`.
    Norm,
}

impl ReduceKind {
    pub const ALL: [ReduceKind; 6] = [
        ReduceKind::Sum,
        ReduceKind::Min,
        ReduceKind::Max,
        ReduceKind::Mean,
        ReduceKind::Var,
        ReduceKind::Norm,
    ];

    /// Reduces values listed in canonical record order.
    pub fn apply(self, values: &[f64]) -> f64 {
        let n = values.len() as f64;
        match self {
            ReduceKind::Sum => sum(values),
            ReduceKind::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            ReduceKind::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ReduceKind::Mean => sum(values) / n,
            ReduceKind::Var => {
                let mean = sum(values) / n;
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
            }
            ReduceKind::Norm => values.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ReduceKind::Sum => "sum",
            ReduceKind::Min => "min",
            ReduceKind::Max => "max",
            ReduceKind::Mean => "mean",
            ReduceKind::Var => "var",
            ReduceKind::Norm => "norm",
        }
    }

    pub fn from_name(name: &str) -> Option<ReduceKind> {
        ReduceKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ReduceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn sum(values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for v in values {
        acc += v;
    }
    acc
}

fn reduce_signature<S: AsRef<str>>(a: &Shape, axes: &[S]) -> Result<Signature> {
    Ok(Signature::new(vec![axis_list(a, axes)?], Shape::scalar()))
}

/// Reduces jointly over `axes`; the result keeps every other axis.
pub fn reduce<S: AsRef<str>>(a: &NamedTensor, kind: ReduceKind, axes: &[S]) -> Result<NamedTensor> {
    let sig = reduce_signature(a.shape(), axes)?;
    lift::extend_unary(&sig, |x| Ok(NamedTensor::scalar(kind.apply(x.data()))), a)
}

pub fn reduce_shape<S: AsRef<str>>(a: &Shape, axes: &[S]) -> Result<Shape> {
    lift::extended_shape(&reduce_signature(a, axes)?, &[a])
}

fn contract_signature<S: AsRef<str>>(a: &Shape, b: &Shape, axes: &[S]) -> Result<Signature> {
    if !a.compatible(b) {
        return Err(Error::IncompatibleShapes {
            left: a.clone(),
            right: b.clone(),
        });
    }
    let both = a.union(b)?;
    let joint = axis_list(&both, axes)?;
    Ok(Signature::new(
        vec![a.intersection(&joint), b.intersection(&joint)],
        Shape::scalar(),
    ))
}

/// `A ⊙_axes B`: elementwise product summed over `axes`. With no axes this is
/// the elementwise product.
pub fn contract<S: AsRef<str>>(a: &NamedTensor, b: &NamedTensor, axes: &[S]) -> Result<NamedTensor> {
    let sig = contract_signature(a.shape(), b.shape(), axes)?;
    let joint = sig.inputs[0].union(&sig.inputs[1])?;
    let a_off = sig.inputs[0].offsets_of(&joint);
    let b_off = sig.inputs[1].offsets_of(&joint);
    lift::extend_binary(
        &sig,
        |x, y| {
            let (x, y) = (x.data(), y.data());
            let mut acc = 0.0;
            for (i, j) in a_off.iter().zip(&b_off) {
                acc += x[*i] * y[*j];
            }
            Ok(NamedTensor::scalar(acc))
        },
        a,
        b,
    )
}

pub fn contract_shape<S: AsRef<str>>(a: &Shape, b: &Shape, axes: &[S]) -> Result<Shape> {
    lift::extended_shape(&contract_signature(a, b, axes)?, &[a, b])
}
