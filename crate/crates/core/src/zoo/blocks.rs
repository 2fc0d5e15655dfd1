//! Building blocks: dense layers, recurrence, attention, convolution,
//! pooling and normalization.

use crate::axes::Axis;
use crate::error::{Error, Result};
use crate::ops::{
    add, contract, merge, mul, reduce, rename, softmax, split_axis, standardize, unary, unroll, ReduceKind, UnaryFn,
    DEFAULT_EPSILON,
};
use crate::tensor::NamedTensor;

/// Weight and bias of one fully connected layer.
#[derive(Clone, Debug)]
pub struct Dense {
    pub weight: NamedTensor,
    pub bias: NamedTensor,
}

/// `σ(W ·over x + b)`.
pub fn dense(x: &NamedTensor, layer: &Dense, over: &str) -> Result<NamedTensor> {
    let z = add(&contract(&layer.weight, x, &[over])?, &layer.bias)?;
    Ok(unary(&z, UnaryFn::Sigmoid))
}

/// Three sigmoid layers `inp → hidden1 → hidden2 → out`.
pub fn feedforward(x: &NamedTensor, layers: &[Dense; 3]) -> Result<NamedTensor> {
    let x1 = dense(x, &layers[0], "inp")?;
    let x2 = dense(&x1, &layers[1], "hidden1")?;
    dense(&x2, &layers[2], "hidden2")
}

/// A dense layer over `layer` whose weight maps `layer` to `layer'`; the
/// output is renamed back to `layer`.
pub fn full_conn(x: &NamedTensor, layer: &Dense) -> Result<NamedTensor> {
    rename(&dense(x, layer, "layer")?, "layer'", "layer")
}

/// Elman recurrence parameters: `hidden_weight` over `{hidden, hidden'}`,
/// `input_weight` over `{inp, hidden'}`, `bias` over `{hidden'}`.
#[derive(Clone, Debug)]
pub struct Elman {
    pub hidden_weight: NamedTensor,
    pub input_weight: NamedTensor,
    pub bias: NamedTensor,
}

/// The hidden states `h⁰, h¹, …, hⁿ`.
pub fn rnn_elman(inputs: &[NamedTensor], params: &Elman, h0: &NamedTensor) -> Result<Vec<NamedTensor>> {
    let mut states = vec![h0.clone()];
    for x in inputs {
        let prev = states.last().expect("h0 is present");
        let z = add(
            &add(
                &contract(&params.hidden_weight, prev, &["hidden"])?,
                &contract(&params.input_weight, x, &["inp"])?,
            )?,
            &params.bias,
        )?;
        states.push(rename(&unary(&z, UnaryFn::Sigmoid), "hidden'", "hidden")?);
    }
    Ok(states)
}

/// `softmax{seq}(Q ·key K / sqrt|key| + M) ·seq V`.
pub fn attention(q: &NamedTensor, k: &NamedTensor, v: &NamedTensor, mask: Option<&NamedTensor>) -> Result<NamedTensor> {
    let key = k.shape().axis("key")?.size as f64;
    let mut scores = contract(q, k, &["key"])?.map(|s| s / key.sqrt());
    if let Some(m) = mask {
        scores = add(&scores, m)?;
    }
    contract(&softmax(&scores, &["seq"])?, v, &["seq"])
}

/// `W ·{chans, kernel} unroll{seq, kernel}(X) + b`.
pub fn conv1d(x: &NamedTensor, w: &NamedTensor, b: &NamedTensor) -> Result<NamedTensor> {
    let kernel = w.shape().axis("kernel")?.clone();
    let windows = unroll(x, "seq", &kernel)?;
    add(&contract(w, &windows, &["chans", "kernel"])?, b)
}

/// `W ·{chans, kh, kw} unroll{height, kh}(unroll{width, kw}(X)) + b`.
pub fn conv2d(x: &NamedTensor, w: &NamedTensor, b: &NamedTensor) -> Result<NamedTensor> {
    let kh = w.shape().axis("kh")?.clone();
    let kw = w.shape().axis("kw")?.clone();
    let windows = unroll(&unroll(x, "width", &kw)?, "height", &kh)?;
    add(&contract(w, &windows, &["chans", "kh", "kw"])?, b)
}

/// Reshapes `ax[n]` into `ax[n/k] × inner[k]`, blocks outermost.
pub fn pool(x: &NamedTensor, ax: &str, inner: &str, k: usize) -> Result<NamedTensor> {
    let n = x.shape().axis(ax)?.size;
    if k == 0 || n % k != 0 {
        return Err(Error::SizeMismatch(format!("cannot pool {ax}[{n}] into blocks of {k}")));
    }
    split_axis(x, ax, &Axis::new(ax, n / k)?, &Axis::new(inner, k)?)
}

pub fn maxpool1d(x: &NamedTensor, k: usize) -> Result<NamedTensor> {
    reduce(&pool(x, "seq", "kernel", k)?, ReduceKind::Max, &["kernel"])
}

pub fn maxpool2d(x: &NamedTensor, kh: usize, kw: usize) -> Result<NamedTensor> {
    let pooled = pool(&pool(x, "width", "kw", kw)?, "height", "kh", kh)?;
    reduce(&pooled, ReduceKind::Max, &["kh", "kw"])
}

/// Scale and shift after standardizing.
#[derive(Clone, Debug)]
pub struct Affine {
    pub scale: NamedTensor,
    pub shift: NamedTensor,
}

impl Affine {
    pub fn apply(&self, x: &NamedTensor) -> Result<NamedTensor> {
        add(&mul(x, &self.scale)?, &self.shift)
    }
}

/// Standardize over `axes`, then scale and shift.
pub fn norm_over(x: &NamedTensor, axes: &[&str], affine: &Affine) -> Result<NamedTensor> {
    affine.apply(&standardize(x, axes, DEFAULT_EPSILON)?)
}

/// Statistics over `{batch, layer}`; parameters over `{chans}`.
pub fn batchnorm(x: &NamedTensor, affine: &Affine) -> Result<NamedTensor> {
    norm_over(x, &["batch", "layer"], affine)
}

/// Statistics over `{layer}`; parameters over `{chans}`.
pub fn instancenorm(x: &NamedTensor, affine: &Affine) -> Result<NamedTensor> {
    norm_over(x, &["layer"], affine)
}

/// Statistics over `{chans, layer}`; parameters over `{chans, layer}`.
pub fn layernorm(x: &NamedTensor, affine: &Affine) -> Result<NamedTensor> {
    norm_over(x, &["layer", "chans"], affine)
}

/// Channels pooled into groups of `k`, statistics per group over
/// `{kernel, layer}`; parameters over `{chans}`.
pub fn groupnorm(x: &NamedTensor, k: usize, affine: &Affine) -> Result<NamedTensor> {
    let grouped = standardize(&pool(x, "chans", "kernel", k)?, &["kernel", "layer"], DEFAULT_EPSILON)?;
    affine.apply(&merge(&grouped, &["chans", "kernel"], "chans")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axes::Shape;

    fn t(axes: &[(&str, usize)], data: Vec<f64>) -> NamedTensor {
        NamedTensor::from_ordered(axes, data).unwrap()
    }

    #[test]
    fn zero_network_outputs_one_half() {
        let zero = |axes: &[(&str, usize)]| NamedTensor::zeros(Shape::new(axes.iter().copied()).unwrap());
        let layers = [
            Dense {
                weight: zero(&[("hidden1", 3), ("inp", 4)]),
                bias: zero(&[("hidden1", 3)]),
            },
            Dense {
                weight: zero(&[("hidden2", 3), ("hidden1", 3)]),
                bias: zero(&[("hidden2", 3)]),
            },
            Dense {
                weight: zero(&[("out", 2), ("hidden2", 3)]),
                bias: zero(&[("out", 2)]),
            },
        ];
        let y = feedforward(&t(&[("inp", 4)], vec![1., -2., 3., 4.]), &layers).unwrap();
        assert_eq!(y.data(), &[0.5, 0.5]);
    }

    #[test]
    fn empty_sequence_keeps_initial_state() {
        let params = Elman {
            hidden_weight: t(&[("hidden", 1), ("hidden'", 1)], vec![1.]),
            input_weight: t(&[("inp", 1), ("hidden'", 1)], vec![1.]),
            bias: t(&[("hidden'", 1)], vec![0.]),
        };
        let h0 = t(&[("hidden", 1)], vec![0.25]);
        assert_eq!(rnn_elman(&[], &params, &h0).unwrap(), vec![h0]);
    }

    #[test]
    fn singleton_attention_returns_value() {
        let q = t(&[("key", 2)], vec![3., -1.]);
        let k = t(&[("seq", 1), ("key", 2)], vec![0.5, 7.]);
        let v = t(&[("seq", 1), ("val", 3)], vec![1., 2., 3.]);
        assert_eq!(attention(&q, &k, &v, None).unwrap().data(), &[1., 2., 3.]);
    }

    #[test]
    fn unit_kernel_convolution_is_identity() {
        let x = t(&[("chans", 1), ("seq", 4)], vec![1., 2., 3., 4.]);
        let w = t(&[("chans", 1), ("kernel", 1)], vec![1.]);
        let y = conv1d(&x, &w, &NamedTensor::scalar(0.)).unwrap();
        assert_eq!(y, t(&[("seq", 4)], vec![1., 2., 3., 4.]));
    }

    #[test]
    fn block_maxima() {
        let x = t(&[("height", 4), ("width", 4)], (1..=16).map(f64::from).collect());
        assert_eq!(
            maxpool2d(&x, 2, 2).unwrap().to_ordered(&["height", "width"]).unwrap(),
            [6., 8., 14., 16.]
        );
        assert_eq!(
            maxpool1d(&t(&[("seq", 4)], vec![3., 1., 0., 2.]), 2).unwrap().data(),
            &[3., 2.]
        );
        assert_eq!(
            maxpool1d(&t(&[("seq", 3)], vec![3., 1., 0.]), 2).unwrap_err().kind(),
            "SizeMismatch"
        );
    }

    #[test]
    fn constant_input_normalizes_to_zero() {
        let x = NamedTensor::full(Shape::new([("batch", 2), ("chans", 4), ("layer", 3)]).unwrap(), 2.5);
        let chans = Shape::new([("chans", 4)]).unwrap();
        let per_chan = Affine {
            scale: NamedTensor::full(chans.clone(), 1.),
            shift: NamedTensor::zeros(chans),
        };
        let cl = Shape::new([("chans", 4), ("layer", 3)]).unwrap();
        let per_cl = Affine {
            scale: NamedTensor::full(cl.clone(), 1.),
            shift: NamedTensor::zeros(cl),
        };
        for y in [
            batchnorm(&x, &per_chan).unwrap(),
            instancenorm(&x, &per_chan).unwrap(),
            layernorm(&x, &per_cl).unwrap(),
            groupnorm(&x, 2, &per_chan).unwrap(),
        ] {
            assert_eq!(y.shape(), x.shape());
            assert!(y.data().iter().all(|&v| v == 0.0));
        }
    }
}
