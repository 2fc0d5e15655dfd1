//! The common operation set.
//!
//! Every operation is a base function on small fixed shapes, lifted with
//! [`crate::lift`] so that extra axes on any argument broadcast by name. Each
//! op has a companion `*_shape` function computing its lifted result shape
//! from argument shapes alone; the static checker uses exactly these.

mod elementwise;
mod linalg;
mod reduce;
mod structural;
mod topk;
mod vector;

pub use elementwise::{add, binary, binary_shape, div, map_elementwise, mul, pow, sub, unary, BinaryOp, UnaryFn};
pub use linalg::{det, det_shape, inv, inv_shape, lu_det, lu_inverse};
pub use reduce::{contract, contract_shape, reduce, reduce_shape, ReduceKind};
pub use structural::{
    index_select, index_select_shape, merge, merge_axes, merge_axes_shape, rename, rename_shape, split_axis,
    split_axis_shape, unroll, unroll_shape,
};
pub use topk::{argmaxk, argmaxk_shape, maxk, maxk_shape};
pub use vector::{
    argmax, argmin, normalize, normalize_shape, softmax, standardize, standardize_shape, NormalizeKind, DEFAULT_EPSILON,
};

use crate::axes::{AxisName, Shape};
use crate::error::{Error, Result};

/// The sub-shape of `shape` on an axis list, rejecting repeats and absent
/// names.
pub(crate) fn axis_list<S: AsRef<str>>(shape: &Shape, axes: &[S]) -> Result<Shape> {
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].iter().any(|b| b.as_ref() == a.as_ref()) {
            return Err(Error::DuplicateAxis(AxisName::new(a.as_ref())?));
        }
    }
    shape.select(axes)
}

pub(crate) fn name(text: &str) -> Result<AxisName> {
    AxisName::new(text)
}
