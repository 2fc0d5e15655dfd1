use std::collections::HashMap;

use crate::axes::Shape;
use crate::error::{Error, Result};
use crate::lift::{self, Signature};
use crate::ops::{self, BinaryOp, NormalizeKind, ReduceKind, DEFAULT_EPSILON};
use crate::tensor::NamedTensor;

use super::eval::{apply_node, trace, Trace};
use super::expr::{resolve, Env, Expr, ExprKind};

/// Gradients of `<cotangent, e>` with respect to every variable of `e`.
pub fn gradients(e: &Expr, env: &Env, cotangent: &NamedTensor) -> Result<HashMap<String, NamedTensor>> {
    let tr = trace(e, env)?;
    gradients_from(e, &tr, env, cotangent)
}

pub(crate) fn gradients_from(
    e: &Expr,
    tr: &Trace,
    env: &Env,
    cotangent: &NamedTensor,
) -> Result<HashMap<String, NamedTensor>> {
    if cotangent.shape() != tr.value.shape() {
        return Err(Error::ShapeMismatch {
            expected: tr.value.shape().clone(),
            found: cotangent.shape().clone(),
        });
    }
    let mut grads = HashMap::new();
    backward(e, tr, cotangent.clone(), env, &mut grads)?;
    Ok(grads)
}

/// Vector-Jacobian product: the cotangent pulled back to variable `x`.
pub fn vjp(e: &Expr, x: &str, env: &Env, cotangent: &NamedTensor) -> Result<NamedTensor> {
    let shape = env.lookup(x)?.shape().clone();
    let mut grads = gradients(e, env, cotangent)?;
    Ok(grads.remove(x).unwrap_or_else(|| NamedTensor::zeros(shape)))
}

/// Gradient of a scalar expression with respect to `x`.
pub fn grad(e: &Expr, x: &str, env: &Env) -> Result<NamedTensor> {
    vjp(e, x, env, &NamedTensor::scalar(1.0))
}

/// Sums away axes of `t` missing from `shape`, then copies along axes of
/// `shape` missing from `t`. The adjoint of broadcasting.
fn fit(t: NamedTensor, shape: &Shape) -> Result<NamedTensor> {
    let extra: Vec<String> = t.shape().difference(shape).names().map(|n| n.to_string()).collect();
    let t = if extra.is_empty() {
        t
    } else {
        ops::reduce(&t, ReduceKind::Sum, &extra)?
    };
    if t.shape() == shape {
        Ok(t)
    } else {
        lift::broadcast_to(&t, shape)
    }
}

fn accumulate(grads: &mut HashMap<String, NamedTensor>, name: &str, g: NamedTensor) -> Result<()> {
    let total = match grads.remove(name) {
        Some(prev) => ops::add(&prev, &g)?,
        None => g,
    };
    grads.insert(name.to_string(), total);
    Ok(())
}

/// Per-slice weights `∂(reduce x)/∂x` for a reduction.
fn reduce_weights(x: &NamedTensor, kind: ReduceKind, axes: &[String]) -> Result<NamedTensor> {
    let base = x.shape().select(axes)?;
    let sig = Signature::new(vec![base.clone()], base.clone());
    lift::extend_unary(
        &sig,
        |slice| {
            let v = slice.data();
            let n = v.len() as f64;
            let w: Vec<f64> = match kind {
                ReduceKind::Sum => vec![1.0; v.len()],
                ReduceKind::Mean => vec![1.0 / n; v.len()],
                ReduceKind::Var => {
                    let mean = v.iter().sum::<f64>() / n;
                    v.iter().map(|x| 2.0 * (x - mean) / n).collect()
                }
                ReduceKind::Norm => {
                    let norm = kind.apply(v);
                    v.iter().map(|x| if norm == 0.0 { 0.0 } else { x / norm }).collect()
                }
                ReduceKind::Max | ReduceKind::Min => {
                    let best = kind.apply(v);
                    let pick = v.iter().position(|&x| x == best);
                    (0..v.len()).map(|i| if Some(i) == pick { 1.0 } else { 0.0 }).collect()
                }
            };
            NamedTensor::new(base.clone(), w)
        },
        x,
    )
}

/// Pulls `g` back through an op that only moves entries, by running the op on
/// a tensor of source offsets and scattering along the result.
fn scatter_back(e: &Expr, x: &NamedTensor, rest: &[&NamedTensor], g: &NamedTensor, env: &Env) -> Result<NamedTensor> {
    let n = x.shape().num_records();
    let offsets = NamedTensor::new(x.shape().clone(), (0..n).map(|i| i as f64).collect())?;
    let mut args = vec![&offsets];
    args.extend_from_slice(rest);
    let moved = apply_node(e, &args, env)?;
    debug_assert_eq!(moved.shape(), g.shape());
    let mut out = vec![0.0; n];
    for (src, v) in moved.data().iter().zip(g.data()) {
        out[*src as usize] += v;
    }
    NamedTensor::new(x.shape().clone(), out)
}

fn backward(e: &Expr, tr: &Trace, g: NamedTensor, env: &Env, grads: &mut HashMap<String, NamedTensor>) -> Result<()> {
    use ExprKind::*;
    if let Var(name) = &e.kind {
        return accumulate(grads, name, g);
    }
    let children = e.children();
    let value = |i: usize| &tr.children[i].value;
    let y = &tr.value;
    let push = |i: usize, gi: NamedTensor, grads: &mut HashMap<String, NamedTensor>| -> Result<()> {
        if children[i].variables().is_empty() {
            return Ok(());
        }
        backward(children[i], &tr.children[i], gi, env, grads)
    };
    match &e.kind {
        Number(_) | Size(_) | Literal(_) | Var(_) => {}
        Unary(f, _) => {
            let gx = lift::zip_n(&[&g, value(0), y], |v| v[0] * f.derivative(v[1], v[2]))?;
            push(0, gx, grads)?;
        }
        Binary(BinaryOp::Eq, ..) => {}
        Binary(op, ..) => {
            let args = [&g, value(0), value(1), y];
            let ga = lift::zip_n(&args, |v| v[0] * op.partials(v[1], v[2], v[3]).0)?;
            let gb = lift::zip_n(&args, |v| v[0] * op.partials(v[1], v[2], v[3]).1)?;
            push(0, fit(ga, value(0).shape())?, grads)?;
            push(1, fit(gb, value(1).shape())?, grads)?;
        }
        Reduce(kind, axes, _) => {
            let w = reduce_weights(value(0), *kind, axes)?;
            push(0, ops::mul(&w, &g)?, grads)?;
        }
        Contract(..) => {
            let ga = fit(ops::mul(&g, value(1))?, value(0).shape())?;
            let gb = fit(ops::mul(&g, value(0))?, value(1).shape())?;
            push(0, ga, grads)?;
            push(1, gb, grads)?;
        }
        Normalize(NormalizeKind::Softmax, axes, _) => {
            // Y ⊙ (G − G ⊙_axes Y)
            let inner = ops::contract(&g, y, axes)?;
            push(0, ops::mul(y, &ops::sub(&g, &inner)?)?, grads)?;
        }
        Normalize(..) => {}
        Standardize(axes, _) => {
            let var = ops::reduce(value(0), ReduceKind::Var, axes)?;
            let scale = var.map(|v| (v + DEFAULT_EPSILON).sqrt());
            let mean_g = ops::reduce(&g, ReduceKind::Mean, axes)?;
            let mean_gy = ops::reduce(&ops::mul(&g, y)?, ReduceKind::Mean, axes)?;
            let gx = lift::zip_n(&[&g, &mean_g, y, &mean_gy, &scale], |v| {
                (v[0] - v[1] - v[2] * v[3]) / v[4]
            })?;
            push(0, gx, grads)?;
        }
        Rename { from, to, .. } => push(0, ops::rename(&g, to, from)?, grads)?,
        Merge { .. } | Split { .. } | Unroll { .. } | PartialIndex { .. } => {
            let gx = scatter_back(e, value(0), &[], &g, env)?;
            push(0, gx, grads)?;
        }
        Index { .. } => {
            let gx = scatter_back(e, value(0), &[value(1)], &g, env)?;
            push(0, gx, grads)?;
        }
        TopK { argmax: true, .. } => {}
        TopK { ax, k, .. } => {
            let k = resolve(k, env)?;
            let select = ops::argmaxk(value(0), ax, &k)?;
            push(0, ops::contract(&g, &select, &[k.name.as_str()])?, grads)?;
        }
        Det { .. } => return Err(Error::NotDifferentiable("det".into())),
        Inv { .. } => return Err(Error::NotDifferentiable("inv".into())),
    }
    Ok(())
}
