mod common;

use common::*;
use namedtensor::lift::{extend, extend_binary, extend_unary, Signature};
use namedtensor::rng::SplitMix64;
use namedtensor::{NamedTensor, Record, Result, Shape};
use proptest::prelude::*;

/// A base function on `{ax[3]}` that is not elementwise: cumulative sums.
fn cumsum(x: &NamedTensor) -> Result<NamedTensor> {
    let mut acc = 0.0;
    let data = x
        .data()
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    NamedTensor::new(x.shape().clone(), data)
}

fn cumsum_sig() -> Signature {
    let base = shape(&[("ax", 3)]);
    Signature::new(vec![base.clone()], base)
}

fn with_extension(seed: u64) -> (NamedTensor, Shape) {
    let mut rng = SplitMix64::new(seed);
    let count = rng.below(3);
    let names = pick_names(&mut rng, &["a", "b", "c"], count, &[]);
    let ext = random_shape(&mut rng, &names, 3);
    let x = uniform(&mut rng, &ext.with(namedtensor::Axis::new("ax", 3).unwrap()).unwrap());
    (x, ext)
}

#[test]
fn identity_extension() {
    let x = tensor(&[("ax", 3)], vec![1., 2., 3.]);
    assert_eq!(extend_unary(&cumsum_sig(), cumsum, &x).unwrap(), cumsum(&x).unwrap());
}

#[test]
fn matrix_vector_product_broadcasts_by_name() {
    let sig = Signature::new(vec![shape(&[("width", 3)]), shape(&[("width", 3)])], Shape::scalar());
    let dot = |a: &NamedTensor, b: &NamedTensor| {
        Ok(NamedTensor::scalar(
            a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum(),
        ))
    };
    let a = tensor(&[("height", 3), ("width", 3)], vec![3., 1., 4., 1., 5., 9., 2., 6., 5.]);
    let y = tensor(&[("width", 3)], vec![1., 4., 1.]);
    let out = extend_binary(&sig, dot, &a, &y).unwrap();
    assert_eq!(out, tensor(&[("height", 3)], vec![11., 30., 31.]));
}

#[test]
fn extension_axis_colliding_with_output_is_rejected() {
    let sig = Signature::new(vec![shape(&[("ax", 2)])], shape(&[("out", 2)]));
    let x = NamedTensor::zeros(shape(&[("ax", 2), ("out", 2)]));
    let err = extend_unary(&sig, |t| Ok(t.clone()), &x).unwrap_err();
    assert_eq!(err.kind(), "ExtensionCollision");
}

#[test]
fn base_axis_with_wrong_size_is_rejected() {
    let x = NamedTensor::zeros(shape(&[("ax", 4)]));
    assert!(extend_unary(&cumsum_sig(), cumsum, &x).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn every_slice_is_the_base_function(seed in any::<u64>()) {
        let (x, ext) = with_extension(seed);
        let y = extend_unary(&cumsum_sig(), cumsum, &x).unwrap();
        prop_assert_eq!(y.shape(), x.shape());
        for r in ext.records() {
            let slice = if r.is_empty() { x.clone() } else { x.partial_index(&r).unwrap() };
            let out = if r.is_empty() { y.clone() } else { y.partial_index(&r).unwrap() };
            prop_assert_eq!(out, cumsum(&slice).unwrap());
        }
    }

    #[test]
    fn independent_of_buffer_axis_order(seed in any::<u64>()) {
        let (x, _) = with_extension(seed);
        let mut order: Vec<&str> = x.shape().names().map(|n| n.as_str()).collect();
        order.reverse();
        let data = x.to_ordered(&order).unwrap();
        let axes: Vec<(&str, usize)> = order.iter().map(|n| (*n, x.shape().size_of(n).unwrap())).collect();
        let permuted = NamedTensor::from_ordered(&axes, data).unwrap();
        let sig = cumsum_sig();
        prop_assert_eq!(extend_unary(&sig, cumsum, &permuted).unwrap(), extend_unary(&sig, cumsum, &x).unwrap());
    }

    #[test]
    fn nested_extension_equals_joint_extension(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let x = uniform(&mut rng, &shape(&[("ax", 3), ("a", 2), ("b", 3)]));
        let sig = cumsum_sig();
        let inner = Signature::new(vec![shape(&[("ax", 3), ("a", 2)])], shape(&[("ax", 3), ("a", 2)]));
        let nested = extend(&inner, |xs| extend_unary(&sig, cumsum, &xs[0]), &[&x]).unwrap();
        prop_assert_eq!(nested, extend_unary(&sig, cumsum, &x).unwrap());
    }

    #[test]
    fn extensions_of_two_arguments_combine(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let a = uniform(&mut rng, &shape(&[("ax", 3), ("a", 2)]));
        let b = uniform(&mut rng, &shape(&[("ax", 3), ("b", 3)]));
        let sig = Signature::new(vec![shape(&[("ax", 3)]), shape(&[("ax", 3)])], Shape::scalar());
        let body = |x: &NamedTensor, y: &NamedTensor| {
            Ok(NamedTensor::scalar(x.data().iter().zip(y.data()).map(|(p, q)| p.max(*q)).sum()))
        };
        let out = extend_binary(&sig, body, &a, &b).unwrap();
        prop_assert_eq!(out.shape(), &shape(&[("a", 2), ("b", 3)]));
        for r in out.shape().records() {
            let ra = Record::new([("a", r.get("a").unwrap())]).unwrap();
            let rb = Record::new([("b", r.get("b").unwrap())]).unwrap();
            let want = body(&a.partial_index(&ra).unwrap(), &b.partial_index(&rb).unwrap()).unwrap();
            prop_assert_eq!(out.get(&r).unwrap(), want.data()[0]);
        }
    }
}
