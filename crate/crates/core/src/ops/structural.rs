//! Renaming, reshaping, unrolling and indexing. These move values without
//! arithmetic, so their results are bit-exact copies of input entries.

use crate::axes::{Axis, Shape};
use crate::error::{Error, Result};
use crate::lift::{self, Signature};
use crate::tensor::NamedTensor;

use super::{axis_list, name};

fn collision(axis: &Axis, shape: &Shape) -> Error {
    Error::NameCollision {
        axis: axis.name.clone(),
        shape: shape.clone(),
    }
}

fn rename_signature(a: &Shape, old: &str, new: &str) -> Result<Signature> {
    let from = a.axis(old)?.clone();
    let to = Axis::named(name(new)?, from.size)?;
    if old != new && a.contains(new) {
        return Err(collision(&to, a));
    }
    Ok(Signature::new(
        vec![Shape::from_axes(vec![from])?],
        Shape::from_axes(vec![to])?,
    ))
}

/// `A_{old→new}`: relabels one axis.
pub fn rename(a: &NamedTensor, old: &str, new: &str) -> Result<NamedTensor> {
    let sig = rename_signature(a.shape(), old, new)?;
    if old == new {
        return Ok(a.clone());
    }
    let out = sig.output.clone();
    lift::extend_unary(&sig, |x| NamedTensor::new(out.clone(), x.data().to_vec()), a)
}

pub fn rename_shape(a: &Shape, old: &str, new: &str) -> Result<Shape> {
    let sig = rename_signature(a, old, new)?;
    if old == new {
        return Ok(a.clone());
    }
    lift::extended_shape(&sig, &[a])
}

fn merge_signature<S: AsRef<str>>(a: &Shape, parts: &[S], merged: &Axis) -> Result<Signature> {
    if parts.is_empty() {
        return Err(Error::SizeMismatch("merging needs at least one axis".into()));
    }
    let base = axis_list(a, parts)?;
    if a.difference(&base).contains(merged.name.as_str()) {
        return Err(collision(merged, a));
    }
    let product = base.num_records();
    if merged.size != product {
        return Err(Error::SizeMismatch(format!(
            "merged axis {} has size {}, but the parts hold {product} entries",
            merged.name, merged.size
        )));
    }
    Ok(Signature::new(vec![base], Shape::from_axes(vec![merged.clone()])?))
}

/// `A_{(parts)→merged}`. Entries of the new axis follow odometer order over
/// `parts` as listed, the last part varying fastest.
pub fn merge_axes<S: AsRef<str>>(a: &NamedTensor, parts: &[S], merged: &Axis) -> Result<NamedTensor> {
    let sig = merge_signature(a.shape(), parts, merged)?;
    let base = &sig.inputs[0];
    let order: Vec<&str> = parts.iter().map(|p| p.as_ref()).collect();
    let strides = base.strides();
    let listed: Vec<(usize, usize)> = order
        .iter()
        .map(|p| {
            let pos = base.position(p).expect("part present in base shape");
            (base.axes()[pos].size, strides[pos])
        })
        .collect();
    // Source offset within the base slice for each merged index.
    let mut gather = Vec::with_capacity(merged.size);
    for k in 0..merged.size {
        let mut rest = k;
        let mut offset = 0;
        for &(size, stride) in listed.iter().rev() {
            offset += (rest % size) * stride;
            rest /= size;
        }
        gather.push(offset);
    }
    let out = sig.output.clone();
    lift::extend_unary(
        &sig,
        |x| NamedTensor::new(out.clone(), gather.iter().map(|&o| x.data()[o]).collect()),
        a,
    )
}

/// [`merge_axes`] with the merged size set to the product of the parts.
pub fn merge<S: AsRef<str>>(a: &NamedTensor, parts: &[S], merged: &str) -> Result<NamedTensor> {
    let size = axis_list(a.shape(), parts)?.num_records();
    merge_axes(a, parts, &Axis::new(merged, size)?)
}

pub fn merge_axes_shape<S: AsRef<str>>(a: &Shape, parts: &[S], merged: &Axis) -> Result<Shape> {
    lift::extended_shape(&merge_signature(a, parts, merged)?, &[a])
}

fn split_signature(a: &Shape, src: &str, outer: &Axis, inner: &Axis) -> Result<Signature> {
    let source = a.axis(src)?.clone();
    if outer.name == inner.name {
        return Err(collision(inner, &Shape::from_axes(vec![outer.clone()])?));
    }
    let rest = a.difference(&Shape::from_axes(vec![source.clone()])?);
    for part in [outer, inner] {
        if rest.contains(part.name.as_str()) {
            return Err(collision(part, a));
        }
    }
    if outer.size * inner.size != source.size {
        return Err(Error::SizeMismatch(format!(
            "cannot split {source} into {outer} × {inner}"
        )));
    }
    Ok(Signature::new(
        vec![Shape::from_axes(vec![source])?],
        Shape::from_axes(vec![outer.clone(), inner.clone()])?,
    ))
}

/// Reshapes one axis into two: `Y_{outer(i), inner(j)} = A_{src((i−1)·|inner| + j)}`.
/// With `outer` named like `src` this is the pooling reshape.
pub fn split_axis(a: &NamedTensor, src: &str, outer: &Axis, inner: &Axis) -> Result<NamedTensor> {
    let sig = split_signature(a.shape(), src, outer, inner)?;
    let out = sig.output.clone();
    let data: Vec<usize> = out
        .records()
        .map(|r| {
            let i = r.index(&outer.name).expect("outer index");
            let j = r.index(&inner.name).expect("inner index");
            (i - 1) * inner.size + (j - 1)
        })
        .collect();
    lift::extend_unary(
        &sig,
        |x| NamedTensor::new(out.clone(), data.iter().map(|&o| x.data()[o]).collect()),
        a,
    )
}

pub fn split_axis_shape(a: &Shape, src: &str, outer: &Axis, inner: &Axis) -> Result<Shape> {
    lift::extended_shape(&split_signature(a, src, outer, inner)?, &[a])
}

fn unroll_signature(a: &Shape, seq: &str, kernel: &Axis) -> Result<Signature> {
    let source = a.axis(seq)?.clone();
    if a.contains(kernel.name.as_str()) {
        return Err(collision(kernel, a));
    }
    if kernel.size > source.size {
        return Err(Error::SizeMismatch(format!("kernel {kernel} is longer than {source}")));
    }
    let windows = Axis::named(source.name.clone(), source.size - kernel.size + 1)?;
    Ok(Signature::new(
        vec![Shape::from_axes(vec![source])?],
        Shape::from_axes(vec![windows, kernel.clone()])?,
    ))
}

/// Sliding windows: `Y_{seq(i), kernel(j)} = A_{seq(i+j−1)}`, with the output
/// `seq` axis shortened to `|seq| − |kernel| + 1`.
pub fn unroll(a: &NamedTensor, seq: &str, kernel: &Axis) -> Result<NamedTensor> {
    let sig = unroll_signature(a.shape(), seq, kernel)?;
    let out = sig.output.clone();
    let seq_name = name(seq)?;
    let data: Vec<usize> = out
        .records()
        .map(|r| {
            let i = r.index(&seq_name).expect("seq index");
            let j = r.index(&kernel.name).expect("kernel index");
            i + j - 2
        })
        .collect();
    lift::extend_unary(
        &sig,
        |x| NamedTensor::new(out.clone(), data.iter().map(|&o| x.data()[o]).collect()),
        a,
    )
}

pub fn unroll_shape(a: &Shape, seq: &str, kernel: &Axis) -> Result<Shape> {
    lift::extended_shape(&unroll_signature(a, seq, kernel)?, &[a])
}

fn index_signature(a: &Shape, ax: &str) -> Result<Signature> {
    let axis = a.axis(ax)?.clone();
    Ok(Signature::new(
        vec![Shape::from_axes(vec![axis])?, Shape::scalar()],
        Shape::scalar(),
    ))
}

/// `index_ax(A, i) = A_{ax(i)}`, lifted: axes shared by `A` and `indices`
/// align (gather), extra axes of `indices` broadcast (integer-array indexing).
/// Indices are 1-based integer-valued floats.
pub fn index_select(a: &NamedTensor, ax: &str, indices: &NamedTensor) -> Result<NamedTensor> {
    let sig = index_signature(a.shape(), ax)?;
    let axis = sig.inputs[0].axes()[0].clone();
    lift::extend_binary(
        &sig,
        |x, i| {
            let value = i.data()[0];
            let k = value as usize;
            if value.fract() != 0.0 || value < 1.0 || k > axis.size {
                return Err(Error::IndexOutOfRange {
                    value,
                    axis: axis.name.clone(),
                    size: axis.size,
                });
            }
            Ok(NamedTensor::scalar(x.data()[k - 1]))
        },
        a,
        indices,
    )
}

pub fn index_select_shape(a: &Shape, ax: &str, indices: &Shape) -> Result<Shape> {
    lift::extended_shape(&index_signature(a, ax)?, &[a, indices])
}
