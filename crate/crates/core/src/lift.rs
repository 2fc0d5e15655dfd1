//! The broadcasting engine.
//!
//! A function declared on base shapes is extended to arguments that carry
//! extra axes: each argument's extension is its shape minus the declared base
//! shape, and the result is the base output evaluated slice by slice over the
//! union of all extensions. There is no size-1 stretching; an axis either
//! belongs to the base shape with exactly the declared size, or it is an
//! extension axis broadcast by name.

use crate::axes::Shape;
use crate::error::{Error, Result};
use crate::tensor::NamedTensor;

/// Base input shapes and base output shape of a tensor function.
#[derive(Clone, Debug, PartialEq)]
pub struct Signature {
    pub inputs: Vec<Shape>,
    pub output: Shape,
}

impl Signature {
    pub fn new(inputs: Vec<Shape>, output: Shape) -> Self {
        Signature { inputs, output }
    }

    /// All inputs and output are scalars: plain elementwise functions.
    pub fn elementwise(arity: usize) -> Self {
        Signature {
            inputs: vec![Shape::scalar(); arity],
            output: Shape::scalar(),
        }
    }
}

/// A function on tensors of exactly its signature's shapes.
pub struct TensorFunction<F> {
    pub signature: Signature,
    pub body: F,
}

impl<F> TensorFunction<F>
where
    F: Fn(&[NamedTensor]) -> Result<NamedTensor>,
{
    pub fn new(signature: Signature, body: F) -> Self {
        TensorFunction { signature, body }
    }

    pub fn apply(&self, args: &[&NamedTensor]) -> Result<NamedTensor> {
        extend(&self.signature, &self.body, args)
    }
}

/// Extension layout of a call: per-argument extension shapes and their union.
#[derive(Clone, Debug, PartialEq)]
pub struct Extension {
    pub per_arg: Vec<Shape>,
    pub union: Shape,
    pub result: Shape,
}

/// Validates a call and computes the lifted result shape `U ∪ S'₁ ∪ … ∪ S'ₙ`.
pub fn extension(sig: &Signature, args: &[&Shape]) -> Result<Extension> {
    assert_eq!(
        sig.inputs.len(),
        args.len(),
        "lifted call arity does not match its signature"
    );
    let mut per_arg = Vec::with_capacity(args.len());
    for (base, actual) in sig.inputs.iter().zip(args) {
        for axis in base.axes() {
            match actual.size_of(axis.name.as_str()) {
                None => return Err(actual.missing(axis.name.as_str())),
                Some(n) if n != axis.size => {
                    return Err(Error::SizeMismatch(format!(
                        "axis {} has size {n}, expected {}",
                        axis.name, axis.size
                    )))
                }
                Some(_) => {}
            }
        }
        per_arg.push(actual.difference(base));
    }
    let mut union = Shape::scalar();
    for ext in &per_arg {
        union = union.union(ext)?;
    }
    // An extension axis may not reappear in the output or in another
    // argument's base shape.
    for (i, ext) in per_arg.iter().enumerate() {
        for axis in ext.axes() {
            if sig.output.contains(axis.name.as_str()) {
                return Err(Error::ExtensionCollision {
                    axis: axis.name.clone(),
                    shape: sig.output.clone(),
                });
            }
            for (j, base) in sig.inputs.iter().enumerate() {
                if i != j && base.contains(axis.name.as_str()) {
                    return Err(Error::ExtensionCollision {
                        axis: axis.name.clone(),
                        shape: base.clone(),
                    });
                }
            }
        }
    }
    let result = sig.output.union(&union)?;
    Ok(Extension { per_arg, union, result })
}

/// The lifted result shape of a call, without evaluating it.
pub fn extended_shape(sig: &Signature, args: &[&Shape]) -> Result<Shape> {
    Ok(extension(sig, args)?.result)
}

/// Applies `body` to every slice: `[f(A, B, …)]_s = f(A_{s|S'}, B_{s|T'}, …)`.
pub fn extend<F>(sig: &Signature, body: F, args: &[&NamedTensor]) -> Result<NamedTensor>
where
    F: Fn(&[NamedTensor]) -> Result<NamedTensor>,
{
    let shapes: Vec<&Shape> = args.iter().map(|a| a.shape()).collect();
    let ext = extension(sig, &shapes)?;

    let base_offsets: Vec<Vec<usize>> = args
        .iter()
        .zip(&sig.inputs)
        .map(|(a, base)| a.shape().offsets_of(base))
        .collect();
    let slice_offsets: Vec<Vec<usize>> = args.iter().map(|a| a.shape().offsets_of(&ext.union)).collect();
    let out_base = ext.result.offsets_of(&sig.output);
    let out_slice = ext.result.offsets_of(&ext.union);

    let mut out = vec![0.0; ext.result.num_records()];
    let mut slices = Vec::with_capacity(args.len());
    for (k, &dst) in out_slice.iter().enumerate() {
        slices.clear();
        for (i, arg) in args.iter().enumerate() {
            let start = slice_offsets[i][k];
            let data = arg.data();
            let values = base_offsets[i].iter().map(|o| data[start + o]).collect();
            slices.push(NamedTensor::new(sig.inputs[i].clone(), values)?);
        }
        let y = body(&slices)?;
        if y.shape() != &sig.output {
            return Err(Error::ShapeMismatch {
                expected: sig.output.clone(),
                found: y.shape().clone(),
            });
        }
        for (o, v) in out_base.iter().zip(y.data()) {
            out[dst + o] = *v;
        }
    }
    NamedTensor::new(ext.result, out)
}

pub fn extend_unary<F>(sig: &Signature, body: F, a: &NamedTensor) -> Result<NamedTensor>
where
    F: Fn(&NamedTensor) -> Result<NamedTensor>,
{
    extend(sig, |xs| body(&xs[0]), &[a])
}

pub fn extend_binary<F>(sig: &Signature, body: F, a: &NamedTensor, b: &NamedTensor) -> Result<NamedTensor>
where
    F: Fn(&NamedTensor, &NamedTensor) -> Result<NamedTensor>,
{
    extend(sig, |xs| body(&xs[0], &xs[1]), &[a, b])
}

pub fn extend_multary<F>(sig: &Signature, body: F, args: &[&NamedTensor]) -> Result<NamedTensor>
where
    F: Fn(&[NamedTensor]) -> Result<NamedTensor>,
{
    extend(sig, body, args)
}

/// Lifts a scalar function. Same semantics as [`extend`] with an all-scalar
/// signature, without allocating a tensor per element.
pub fn map(a: &NamedTensor, f: impl Fn(f64) -> f64) -> NamedTensor {
    a.map(f)
}

/// Lifts a binary scalar function; the result shape is the union of the
/// operand shapes.
pub fn zip(a: &NamedTensor, b: &NamedTensor, f: impl Fn(f64, f64) -> f64) -> Result<NamedTensor> {
    zip_n(&[a, b], |xs| f(xs[0], xs[1]))
}

/// Lifts an n-ary scalar function.
pub fn zip_n(args: &[&NamedTensor], f: impl Fn(&[f64]) -> f64) -> Result<NamedTensor> {
    let mut union = Shape::scalar();
    for a in args {
        union = union.union(a.shape())?;
    }
    let offsets: Vec<Vec<usize>> = args.iter().map(|a| a.shape().offsets_of(&union)).collect();
    let mut buf = vec![0.0; args.len()];
    let data = (0..union.num_records())
        .map(|k| {
            for (i, a) in args.iter().enumerate() {
                buf[i] = a.data()[offsets[i][k]];
            }
            f(&buf)
        })
        .collect();
    NamedTensor::new(union, data)
}

/// Copies `t` along every axis of `shape` it lacks. `t`'s axes must be a
/// compatible subset of `shape`.
pub fn broadcast_to(t: &NamedTensor, shape: &Shape) -> Result<NamedTensor> {
    if !t.shape().is_subset_of(shape) {
        return Err(Error::ShapeMismatch {
            expected: shape.clone(),
            found: t.shape().clone(),
        });
    }
    let data = t.shape().offsets_of(shape).into_iter().map(|o| t.data()[o]).collect();
    NamedTensor::new(shape.clone(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axes::Record;

    fn matrix_a() -> NamedTensor {
        NamedTensor::from_ordered(&[("height", 3), ("width", 3)], vec![3., 1., 4., 1., 5., 9., 2., 6., 5.]).unwrap()
    }

    fn rec(pairs: &[(&str, usize)]) -> Record {
        Record::new(pairs.iter().copied()).unwrap()
    }

    fn sum_body(x: &NamedTensor) -> Result<NamedTensor> {
        Ok(NamedTensor::scalar(x.data().iter().sum()))
    }

    #[test]
    fn unary_sigmoid_lifts_elementwise() {
        let sig = Signature::elementwise(1);
        let out = extend_unary(&sig, |x| Ok(x.map(|v| 1.0 / (1.0 + (-v).exp()))), &matrix_a()).unwrap();
        let v = out.get(&rec(&[("height", 1), ("width", 1)])).unwrap();
        assert_eq!(v, 1.0 / (1.0 + (-3.0f64).exp()));
    }

    #[test]
    fn unary_sum_over_height() {
        let sig = Signature::new(vec![Shape::new([("height", 3)]).unwrap()], Shape::scalar());
        let out = extend_unary(&sig, sum_body, &matrix_a()).unwrap();
        assert_eq!(out.shape(), &Shape::new([("width", 3)]).unwrap());
        assert_eq!(out.data(), &[6., 12., 18.]);
    }

    #[test]
    fn extension_colliding_with_output_is_rejected() {
        let ax = Shape::new([("ax", 2)]).unwrap();
        let sig = Signature::new(vec![Shape::new([("other", 2)]).unwrap()], ax);
        let a = NamedTensor::zeros(Shape::new([("other", 2), ("ax", 3)]).unwrap());
        let err = extend_unary(&sig, |x| Ok(x.clone()), &a).unwrap_err();
        assert_eq!(err.kind(), "ExtensionCollision");
    }

    #[test]
    fn size_mismatch_on_base_axis() {
        let sig = Signature::new(vec![Shape::new([("height", 2)]).unwrap()], Shape::scalar());
        let err = extend_unary(&sig, sum_body, &matrix_a()).unwrap_err();
        assert_eq!(err.kind(), "SizeMismatch");
    }

    #[test]
    fn binary_addition_broadcasts() {
        let sig = Signature::elementwise(2);
        let add = |a: &NamedTensor, b: &NamedTensor| Ok(NamedTensor::scalar(a.data()[0] + b.data()[0]));
        let x = NamedTensor::from_ordered(&[("height", 3)], vec![2., 7., 1.]).unwrap();
        let y = NamedTensor::from_ordered(&[("width", 3)], vec![1., 4., 1.]).unwrap();
        let ax = extend_binary(&sig, add, &matrix_a(), &x).unwrap();
        assert_eq!(ax.get(&rec(&[("height", 2), ("width", 2)])).unwrap(), 12.0);
        let ay = extend_binary(&sig, add, &matrix_a(), &y).unwrap();
        assert_eq!(ay.get(&rec(&[("height", 1), ("width", 2)])).unwrap(), 5.0);
        assert_eq!(ax, zip(&matrix_a(), &x, |a, b| a + b).unwrap());
    }

    #[test]
    fn binary_outer_product() {
        let sig = Signature::elementwise(2);
        let a = NamedTensor::from_ordered(&[("height", 2)], vec![2., 3.]).unwrap();
        let b = NamedTensor::from_ordered(&[("width", 2)], vec![5., 7.]).unwrap();
        let out = extend_binary(&sig, |a, b| Ok(NamedTensor::scalar(a.data()[0] * b.data()[0])), &a, &b).unwrap();
        for i in 1..=2 {
            for j in 1..=2 {
                let r = rec(&[("height", i), ("width", j)]);
                let expect = [2., 3.][i - 1] * [5., 7.][j - 1];
                assert_eq!(out.get(&r).unwrap(), expect);
            }
        }
    }

    #[test]
    fn ternary_shape_is_union() {
        let a = NamedTensor::full(Shape::new([("a", 2)]).unwrap(), 1.0);
        let b = NamedTensor::full(Shape::new([("b", 3)]).unwrap(), 2.0);
        let c = NamedTensor::full(Shape::new([("c", 4)]).unwrap(), 3.0);
        let sig = Signature::elementwise(3);
        let out = extend_multary(
            &sig,
            |xs| Ok(NamedTensor::scalar(xs[0].data()[0] * xs[1].data()[0] + xs[2].data()[0])),
            &[&a, &b, &c],
        )
        .unwrap();
        assert_eq!(out.shape(), &Shape::new([("a", 2), ("b", 3), ("c", 4)]).unwrap());
        assert!(out.data().iter().all(|&v| v == 5.0));
    }

    #[test]
    fn extension_into_other_base_is_rejected() {
        // B's extension axis `ax` is part of A's base shape.
        let sig = Signature::new(vec![Shape::new([("ax", 2)]).unwrap(), Shape::scalar()], Shape::scalar());
        let a = NamedTensor::zeros(Shape::new([("ax", 2)]).unwrap());
        let b = NamedTensor::zeros(Shape::new([("ax", 2)]).unwrap());
        let err = extend_binary(&sig, |_, _| Ok(NamedTensor::scalar(0.0)), &a, &b).unwrap_err();
        assert_eq!(err.kind(), "ExtensionCollision");
    }

    #[test]
    fn incompatible_extensions_are_rejected() {
        let sig = Signature::elementwise(2);
        let a = NamedTensor::zeros(Shape::new([("h", 3)]).unwrap());
        let b = NamedTensor::zeros(Shape::new([("h", 4)]).unwrap());
        let err = extend_binary(&sig, |a, _| Ok(a.clone()), &a, &b).unwrap_err();
        assert_eq!(err.kind(), "IncompatibleShapes");
    }

    #[test]
    fn identity_extension_is_plain_call() {
        let sig = Signature::new(vec![matrix_a().shape().clone()], Shape::scalar());
        let out = extend_unary(&sig, sum_body, &matrix_a()).unwrap();
        assert_eq!(out, sum_body(&matrix_a()).unwrap());
    }

    #[test]
    fn body_output_shape_is_enforced() {
        let sig = Signature::elementwise(1);
        let err = extend_unary(
            &sig,
            |_| Ok(NamedTensor::zeros(Shape::new([("x", 2)]).unwrap())),
            &matrix_a(),
        )
        .unwrap_err();
        assert_eq!(err.kind(), "ShapeMismatch");
    }
}
