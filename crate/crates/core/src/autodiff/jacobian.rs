use std::collections::BTreeMap;

use crate::axes::{restrict, Axis, AxisName, Record, Shape};
use crate::error::Result;
use crate::rng::SplitMix64;
use crate::tensor::NamedTensor;

use super::backward::gradients_from;
use super::eval::trace;
use super::expr::{Env, Expr};

/// `∂Y/∂X` as one tensor over `S ∪ T'`, where `T'` is the output shape with
/// names shared with the input shape `S` primed until fresh.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivative {
    pub value: NamedTensor,
    /// Output names that were renamed, mapped to their primed forms.
    pub rename_map: BTreeMap<AxisName, AxisName>,
    pub input_shape: Shape,
    pub output_shape: Shape,
}

impl Derivative {
    /// `∂Y_t / ∂X_s`, with `t` a record of the unprimed output shape.
    pub fn entry(&self, s: &Record, t: &Record) -> Result<f64> {
        let mut joint = s.clone();
        for (name, i) in t.iter() {
            let name = self.rename_map.get(name).cloned().unwrap_or_else(|| name.clone());
            joint.insert(name, i);
        }
        self.value.get(&joint)
    }

    pub fn primed_output_shape(&self) -> Shape {
        prime_shape(&self.output_shape, &self.rename_map)
    }
}

/// Primes each output name that collides with the input shape, adding marks
/// until the name is unused by either shape.
pub fn priming(input: &Shape, output: &Shape) -> BTreeMap<AxisName, AxisName> {
    let mut map = BTreeMap::new();
    let taken = |n: &AxisName, map: &BTreeMap<AxisName, AxisName>| {
        input.contains(n.as_str()) || output.contains(n.as_str()) || map.values().any(|v| v == n)
    };
    for axis in output.axes() {
        if !input.contains(axis.name.as_str()) {
            continue;
        }
        let mut fresh = axis.name.primed();
        while taken(&fresh, &map) {
            fresh = fresh.primed();
        }
        map.insert(axis.name.clone(), fresh);
    }
    map
}

fn prime_shape(shape: &Shape, map: &BTreeMap<AxisName, AxisName>) -> Shape {
    let axes = shape
        .axes()
        .iter()
        .map(|a| Axis {
            name: map.get(&a.name).cloned().unwrap_or_else(|| a.name.clone()),
            size: a.size,
        })
        .collect();
    Shape::from_axes(axes).expect("primed names are distinct")
}

/// Dense Jacobian of `e` with respect to variable `x`, one reverse pass per
/// output record.
pub fn jacobian(e: &Expr, x: &str, env: &Env) -> Result<Derivative> {
    let input_shape = env.lookup(x)?.shape().clone();
    let tr = trace(e, env)?;
    let output_shape = tr.value.shape().clone();
    let rename_map = priming(&input_shape, &output_shape);
    let primed = prime_shape(&output_shape, &rename_map);
    let joint = input_shape.union(&primed)?;

    let in_offsets = joint.offsets_of(&input_shape);
    let out_offsets = joint.offsets_of(&primed);
    let mut data = vec![0.0; joint.num_records()];
    let mut seed = NamedTensor::zeros(output_shape.clone());
    for (k, &base) in out_offsets.iter().enumerate() {
        let (shape, mut values) = seed.into_parts();
        values[k] = 1.0;
        seed = NamedTensor::new(shape, values)?;
        let mut grads = gradients_from(e, &tr, env, &seed)?;
        if let Some(g) = grads.remove(x) {
            for (o, v) in in_offsets.iter().zip(g.data()) {
                data[base + o] = *v;
            }
        }
        let (shape, mut values) = seed.into_parts();
        values[k] = 0.0;
        seed = NamedTensor::new(shape, values)?;
    }
    Ok(Derivative {
        value: NamedTensor::new(joint, data)?,
        rename_map,
        input_shape,
        output_shape,
    })
}

/// Outcome of comparing a lifted function's Jacobian with the base Jacobian
/// repeated along the extension axes.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftCheck {
    /// Largest deviation inside matching extension blocks.
    pub max_block_error: f64,
    /// Largest magnitude outside them; must be exactly zero.
    pub max_off_block: f64,
    pub blocks: usize,
    pub tolerance: f64,
    pub failure: Option<String>,
}

impl LiftCheck {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.max_off_block == 0.0 && self.max_block_error <= self.tolerance
    }
}

/// Checks `∂Y_{U→U'}/∂X = I_{U,U'} ⊙ f'(X)` for `body` lifted from `base`
/// over the `extension` axes, on a random input drawn from `seed`.
pub fn lifted_derivative_check(
    body: &Expr,
    var: &str,
    env: &Env,
    base: &Shape,
    extension: &Shape,
    seed: u64,
) -> LiftCheck {
    let mut report = LiftCheck {
        max_block_error: 0.0,
        max_off_block: 0.0,
        blocks: extension.num_records(),
        tolerance: 1e-8,
        failure: None,
    };
    if let Err(err) = compare_blocks(body, var, env, base, extension, seed, &mut report) {
        report.failure = Some(err.to_string());
    }
    report
}

fn compare_blocks(
    body: &Expr,
    var: &str,
    env: &Env,
    base: &Shape,
    extension: &Shape,
    seed: u64,
    report: &mut LiftCheck,
) -> Result<()> {
    let mut rng = SplitMix64::new(seed);
    let x = rng.tensor(base.union(extension)?, -1.0, 1.0);
    let lifted = jacobian(body, var, &env.clone().bind(var, x.clone()))?;
    let unprime: BTreeMap<&AxisName, &AxisName> = lifted.rename_map.iter().map(|(k, v)| (v, k)).collect();

    let mut per_block = Vec::with_capacity(extension.num_records());
    for u in extension.records() {
        let slice = x.partial_index(&u)?;
        per_block.push(jacobian(body, var, &env.clone().bind(var, slice))?);
    }

    for (rec, v) in lifted.value.entries() {
        let s = restrict(&rec, &lifted.input_shape)?;
        let mut t = Record::empty();
        for (name, i) in rec.iter() {
            if lifted.input_shape.contains(name.as_str()) {
                continue;
            }
            let original = unprime.get(name).map_or(name, |n| *n);
            t.insert(original.clone(), i);
        }
        let u_in = restrict(&s, extension)?;
        let u_out = restrict(&t, extension)?;
        if u_in != u_out {
            report.max_off_block = report.max_off_block.max(v.abs());
            continue;
        }
        let block = &per_block[extension.offset_of(&u_in)?];
        let s_base = restrict(&s, base)?;
        let mut t_base = Record::empty();
        for (name, i) in t.iter() {
            if !extension.contains(name.as_str()) {
                t_base.insert(name.clone(), i);
            }
        }
        let expected = block.entry(&s_base, &t_base)?;
        report.max_block_error = report.max_block_error.max((v - expected).abs());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{ReduceKind, UnaryFn};

    fn vector(values: &[f64]) -> NamedTensor {
        NamedTensor::from_ordered(&[("ax", values.len())], values.to_vec()).unwrap()
    }

    #[test]
    fn identity_jacobian_is_identity_matrix() {
        let env = Env::new().bind("x", vector(&[0.1, 0.2, 0.3]));
        let d = jacobian(&Expr::var("x"), "x", &env).unwrap();
        assert_eq!(d.value.shape(), &Shape::new([("ax", 3), ("ax'", 3)]).unwrap());
        assert_eq!(d.value.data(), &[1., 0., 0., 0., 1., 0., 0., 0., 1.]);
        assert_eq!(d.rename_map.len(), 1);
    }

    #[test]
    fn sum_jacobian_is_ones() {
        let env = Env::new().bind("x", vector(&[0.1, 0.2, 0.3]));
        let d = jacobian(&Expr::var("x").sum(&["ax"]), "x", &env).unwrap();
        assert_eq!(d.value.data(), &[1., 1., 1.]);
        assert!(d.rename_map.is_empty());
    }

    #[test]
    fn softmax_jacobian_closed_form() {
        let x = vector(&[0.3, -1.2, 2.0]);
        let env = Env::new().bind("x", x.clone());
        let d = jacobian(&Expr::var("x").softmax(&["ax"]), "x", &env).unwrap();
        let y = crate::ops::softmax(&x, &["ax"]).unwrap();
        for i in 1..=3 {
            for j in 1..=3 {
                let yi = y.data()[i - 1];
                let yj = y.data()[j - 1];
                let delta = if i == j { 1.0 } else { 0.0 };
                // ∂Y_j / ∂X_i = Y_j (δ_ij − Y_i)
                let s = Record::new([("ax", i)]).unwrap();
                let t = Record::new([("ax", j)]).unwrap();
                let got = d.entry(&s, &t).unwrap();
                assert!((got - yj * (delta - yi)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn priming_skips_taken_names() {
        let input = Shape::new([("ax", 2), ("ax'", 2)]).unwrap();
        let output = Shape::new([("ax", 2)]).unwrap();
        let map = priming(&input, &output);
        assert_eq!(map[&AxisName::new("ax").unwrap()].as_str(), "ax''");
    }

    #[test]
    fn lifted_softmax_is_block_diagonal() {
        let base = Shape::new([("ax", 3)]).unwrap();
        let batch = Shape::new([("batch", 2)]).unwrap();
        let body = Expr::var("x").softmax(&["ax"]);
        let report = lifted_derivative_check(&body, "x", &Env::new(), &base, &batch, 7);
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.max_off_block, 0.0);

        let body = Expr::var("x").unary(UnaryFn::Tanh).reduce(ReduceKind::Sum, &["ax"]);
        assert!(lifted_derivative_check(&body, "x", &Env::new(), &base, &batch, 8).passed());
    }
}
