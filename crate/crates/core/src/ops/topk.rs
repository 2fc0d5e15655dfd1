use crate::axes::{Axis, Shape};
use crate::error::{Error, Result};
use crate::lift::{self, Signature};
use crate::tensor::NamedTensor;

fn check(a: &Shape, ax: &str, k: &Axis) -> Result<Axis> {
    let source = a.axis(ax)?.clone();
    if a.contains(k.name.as_str()) {
        return Err(Error::NameCollision {
            axis: k.name.clone(),
            shape: a.clone(),
        });
    }
    if k.size > source.size {
        return Err(Error::SizeMismatch(format!("cannot take {k} largest of {source}")));
    }
    Ok(source)
}

/// Positions of the `k` largest values, largest first; equal values keep
/// ascending index order.
fn ranking(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    order.truncate(k);
    order
}

fn maxk_signature(a: &Shape, ax: &str, k: &Axis) -> Result<Signature> {
    let source = check(a, ax, k)?;
    Ok(Signature::new(
        vec![Shape::from_axes(vec![source])?],
        Shape::from_axes(vec![k.clone()])?,
    ))
}

fn argmaxk_signature(a: &Shape, ax: &str, k: &Axis) -> Result<Signature> {
    let source = check(a, ax, k)?;
    Ok(Signature::new(
        vec![Shape::from_axes(vec![source.clone()])?],
        Shape::from_axes(vec![source, k.clone()])?,
    ))
}

/// `maxk(A)_{k(i)}` is the `i`-th largest value along `ax`, duplicates kept.
pub fn maxk(a: &NamedTensor, ax: &str, k: &Axis) -> Result<NamedTensor> {
    let sig = maxk_signature(a.shape(), ax, k)?;
    let out = sig.output.clone();
    lift::extend_unary(
        &sig,
        |x| {
            let values = x.data();
            let top = ranking(values, k.size).into_iter().map(|i| values[i]).collect();
            NamedTensor::new(out.clone(), top)
        },
        a,
    )
}

pub fn maxk_shape(a: &Shape, ax: &str, k: &Axis) -> Result<Shape> {
    lift::extended_shape(&maxk_signature(a, ax, k)?, &[a])
}

/// One-hot selector over `ax` for each `k` index, so that
/// `A ⊙_ax argmaxk(A) = maxk(A)`. Each position is selected at most once.
pub fn argmaxk(a: &NamedTensor, ax: &str, k: &Axis) -> Result<NamedTensor> {
    let sig = argmaxk_signature(a.shape(), ax, k)?;
    let out = sig.output.clone();
    let ax_first = out.axes()[0].name.as_str() == ax;
    lift::extend_unary(
        &sig,
        |x| {
            let n = x.data().len();
            let mut data = vec![0.0; n * k.size];
            for (i, pos) in ranking(x.data(), k.size).into_iter().enumerate() {
                let offset = if ax_first { pos * k.size + i } else { i * n + pos };
                data[offset] = 1.0;
            }
            NamedTensor::new(out.clone(), data)
        },
        a,
    )
}

pub fn argmaxk_shape(a: &Shape, ax: &str, k: &Axis) -> Result<Shape> {
    lift::extended_shape(&argmaxk_signature(a, ax, k)?, &[a])
}
