//! An autoregressive Transformer language model.

use crate::axes::Shape;
use crate::error::Result;
use crate::ops::{add, contract, rename, softmax, unary, UnaryFn};
use crate::rng::SplitMix64;
use crate::tensor::NamedTensor;

use crate::autodiff::Expr;
use crate::lang::print_expr;

use super::blocks::{attention, norm_over, Affine};

/// Axis sizes. `key` and `val` both have size `layer / heads`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransformerConfig {
    pub layers: usize,
    pub seq: usize,
    pub vocab: usize,
    pub layer: usize,
    pub heads: usize,
    pub hidden: usize,
}

impl Default for TransformerConfig {
    fn default() -> Self {
        TransformerConfig {
            layers: 2,
            seq: 4,
            vocab: 7,
            layer: 8,
            heads: 2,
            hidden: 16,
        }
    }
}

impl TransformerConfig {
    pub fn head_size(&self) -> usize {
        self.layer / self.heads
    }

    /// Parameter names and shapes in generation order.
    pub fn parameter_shapes(&self) -> Vec<(String, Vec<(&'static str, usize)>)> {
        let (l, h, k, hid) = (self.layer, self.heads, self.head_size(), self.hidden);
        let mut out = vec![("E".to_string(), vec![("vocab", self.vocab), ("layer", l)])];
        for i in 1..=self.layers {
            out.extend([
                (format!("WQ{i}"), vec![("heads", h), ("layer", l), ("key", k)]),
                (format!("WK{i}"), vec![("heads", h), ("layer", l), ("key", k)]),
                (format!("WV{i}"), vec![("heads", h), ("layer", l), ("val", k)]),
                (format!("WO{i}"), vec![("heads", h), ("val", k), ("layer", l)]),
                (format!("gA{i}"), vec![("layer", l)]),
                (format!("bA{i}"), vec![("layer", l)]),
                (format!("W1_{i}"), vec![("hidden", hid), ("layer", l)]),
                (format!("b1_{i}"), vec![("hidden", hid)]),
                (format!("W2_{i}"), vec![("layer", l), ("hidden", hid)]),
                (format!("b2_{i}"), vec![("layer", l)]),
                (format!("gF{i}"), vec![("layer", l)]),
                (format!("bF{i}"), vec![("layer", l)]),
            ]);
        }
        out
    }
}

/// One block's parameters.
#[derive(Clone, Debug)]
pub struct TransformerLayer {
    pub query: NamedTensor,
    pub key: NamedTensor,
    pub value: NamedTensor,
    pub output: NamedTensor,
    pub attention_norm: Affine,
    pub w1: NamedTensor,
    pub b1: NamedTensor,
    pub w2: NamedTensor,
    pub b2: NamedTensor,
    pub ffn_norm: Affine,
}

#[derive(Clone, Debug)]
pub struct TransformerParams {
    pub embedding: NamedTensor,
    pub layers: Vec<TransformerLayer>,
}

impl TransformerParams {
    /// Uniform values in `[-1, 1)`, drawn in [`TransformerConfig::parameter_shapes`] order.
    pub fn random(config: &TransformerConfig, rng: &mut SplitMix64) -> Result<Self> {
        let mut draws = Vec::new();
        for (_, axes) in config.parameter_shapes() {
            draws.push(rng.tensor(Shape::new(axes)?, -1.0, 1.0));
        }
        let mut it = draws.into_iter();
        let mut next = || it.next().expect("one draw per parameter");
        let embedding = next();
        let mut layers = Vec::new();
        for _ in 0..config.layers {
            layers.push(TransformerLayer {
                query: next(),
                key: next(),
                value: next(),
                output: next(),
                attention_norm: Affine {
                    scale: next(),
                    shift: next(),
                },
                w1: next(),
                b1: next(),
                w2: next(),
                b2: next(),
                ffn_norm: Affine {
                    scale: next(),
                    shift: next(),
                },
            });
        }
        Ok(TransformerParams { embedding, layers })
    }
}

/// Sinusoidal positional encoding over `{seq, layer}`.
pub fn positional_encoding(seq: usize, layer: usize) -> Result<NamedTensor> {
    let shape = Shape::new([("seq", seq), ("layer", layer)])?;
    Ok(NamedTensor::from_fn(shape, |r| {
        let p = r.get("seq").expect("seq index") as f64;
        let i = r.get("layer").expect("layer index");
        if i % 2 == 1 {
            ((p - 1.0) / 10000f64.powf((i - 1) as f64 / layer as f64)).sin()
        } else {
            ((p - 1.0) / 10000f64.powf((i - 2) as f64 / layer as f64)).cos()
        }
    }))
}

/// `M[seq(i), seq'(j)] = 0` if `i ≤ j`, else `-inf`: query position `j`
/// sees keys `1..=j`.
pub fn causal_mask(seq: usize) -> Result<NamedTensor> {
    let shape = Shape::new([("seq", seq), ("seq'", seq)])?;
    Ok(NamedTensor::from_fn(shape, |r| {
        if r.get("seq") <= r.get("seq'") {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }))
}

/// Multi-head causal self-attention over `{seq, layer}`.
pub fn self_attention(x: &NamedTensor, p: &TransformerLayer, mask: &NamedTensor) -> Result<NamedTensor> {
    let q = contract(&p.query, &rename(x, "seq", "seq'")?, &["layer"])?;
    let k = contract(&p.key, x, &["layer"])?;
    let v = contract(&p.value, x, &["layer"])?;
    let y = rename(&attention(&q, &k, &v, Some(mask))?, "seq'", "seq")?;
    contract(&p.output, &y, &["heads", "val"])
}

pub fn feed_forward(x: &NamedTensor, p: &TransformerLayer) -> Result<NamedTensor> {
    let x1 = unary(&add(&contract(&p.w1, x, &["layer"])?, &p.b1)?, UnaryFn::Relu);
    Ok(unary(&add(&contract(&p.w2, &x1, &["hidden"])?, &p.b2)?, UnaryFn::Relu))
}

/// Next-token distributions over `{seq, vocab}` for one-hot input `I` over
/// `{seq, vocab}`. Extra axes on `I` such as `batch` are carried through.
pub fn transformer_lm(input: &NamedTensor, params: &TransformerParams) -> Result<NamedTensor> {
    let seq = input.shape().axis("seq")?.size;
    let layer = params.embedding.shape().axis("layer")?.size;
    let words = contract(&params.embedding, input, &["vocab"])?.map(|v| v * (layer as f64).sqrt());
    let mut x = add(&words, &positional_encoding(seq, layer)?)?;
    let mask = causal_mask(seq)?;
    for p in &params.layers {
        let t = add(
            &norm_over(&self_attention(&x, p, &mask)?, &["layer"], &p.attention_norm)?,
            &x,
        )?;
        x = add(&norm_over(&feed_forward(&t, p)?, &["layer"], &p.ffn_norm)?, &t)?;
    }
    softmax(&contract(&params.embedding, &x, &["layer"])?, &["vocab"])
}

fn literal(t: &NamedTensor) -> String {
    print_expr(&Expr::literal(t.clone()))
}

/// Source text for the model as a program in the tensor language, with the
/// layers unrolled. Parameters are declared inputs in the same order as
/// [`TransformerParams::random`] draws them, so evaluating with the same
/// seed reproduces those parameters; the token input is a literal.
pub fn transformer_program(config: &TransformerConfig, input: &NamedTensor) -> Result<String> {
    let mut lines = vec!["# Transformer language model".to_string()];
    for (name, size) in [
        ("seq", config.seq),
        ("vocab", config.vocab),
        ("layer", config.layer),
        ("heads", config.heads),
        ("key", config.head_size()),
        ("val", config.head_size()),
        ("hidden", config.hidden),
    ] {
        lines.push(format!("axis {name} = {size}"));
    }
    for (name, axes) in config.parameter_shapes() {
        let axes: Vec<&str> = axes.iter().map(|(a, _)| *a).collect();
        lines.push(format!("{name} : R[{}]", axes.join(", ")));
    }
    lines.push(format!("I = {}", literal(input)));
    lines.push(format!(
        "P = {}",
        literal(&positional_encoding(config.seq, config.layer)?)
    ));
    lines.push(format!("M = {}", literal(&causal_mask(config.seq)?)));
    lines.push("X0 = (E .{vocab} I) * sqrt(size(layer)) + P".into());
    for i in 1..=config.layers {
        let j = i - 1;
        lines.extend([
            format!("Q{i} = WQ{i} .{{layer}} X{j}[seq->seq']"),
            format!("K{i} = WK{i} .{{layer}} X{j}"),
            format!("V{i} = WV{i} .{{layer}} X{j}"),
            format!("A{i} = softmax{{seq}}(Q{i} .{{key}} K{i} / sqrt(size(key)) + M) .{{seq}} V{i}"),
            format!("Y{i} = WO{i} .{{heads, val}} A{i}[seq'->seq]"),
            format!("T{i} = standardize{{layer}}(Y{i}) * gA{i} + bA{i} + X{j}"),
            format!("H{i} = relu(W1_{i} .{{layer}} T{i} + b1_{i})"),
            format!("F{i} = relu(W2_{i} .{{hidden}} H{i} + b2_{i})"),
            format!("X{i} = standardize{{layer}}(F{i}) * gF{i} + bF{i} + T{i}"),
        ]);
    }
    lines.push(format!("O = softmax{{vocab}}(E .{{layer}} X{})", config.layers));
    lines.push("print O".into());
    Ok(lines.join("\n") + "\n")
}
