use crate::axes::Record;
use crate::error::Result;
use crate::ops::{self, BinaryOp, NormalizeKind, ReduceKind, DEFAULT_EPSILON};
use crate::tensor::NamedTensor;

use super::expr::{resolve, resolve_merge, resolve_split, Env, Expr, ExprKind};

/// Values of every node of an expression, mirroring its tree.
#[derive(Clone, Debug)]
pub struct Trace {
    pub value: NamedTensor,
    pub children: Vec<Trace>,
}

pub fn evaluate(e: &Expr, env: &Env) -> Result<NamedTensor> {
    trace(e, env).map(|t| t.value)
}

pub fn trace(e: &Expr, env: &Env) -> Result<Trace> {
    let children = e
        .children()
        .into_iter()
        .map(|c| trace(c, env))
        .collect::<Result<Vec<_>>>()?;
    let args: Vec<&NamedTensor> = children.iter().map(|c| &c.value).collect();
    let value = apply_node(e, &args, env)?;
    Ok(Trace { value, children })
}

/// Evaluates one node on already computed child values.
pub(crate) fn apply_node(e: &Expr, args: &[&NamedTensor], env: &Env) -> Result<NamedTensor> {
    use ExprKind::*;
    let a = || args[0];
    match &e.kind {
        Number(v) => Ok(NamedTensor::scalar(*v)),
        Size(axis) => Ok(NamedTensor::scalar(env.declared(axis)? as f64)),
        Var(name) => Ok(env.lookup(name)?.clone()),
        Literal(t) => Ok(t.clone()),
        Unary(f, _) => Ok(ops::unary(a(), *f)),
        Binary(op, ..) => ops::binary(args[0], args[1], *op),
        Reduce(kind, axes, _) => ops::reduce(a(), *kind, axes),
        Contract(axes, ..) => ops::contract(args[0], args[1], axes),
        Normalize(kind, axes, _) => ops::normalize(a(), *kind, axes),
        Standardize(axes, _) => ops::standardize(a(), axes, DEFAULT_EPSILON),
        Rename { from, to, .. } => ops::rename(a(), from, to),
        Merge { parts, into, .. } => {
            let merged = resolve_merge(into, &a().shape().select(parts)?, env)?;
            ops::merge_axes(a(), parts, &merged)
        }
        Split { src, outer, inner, .. } => {
            let (o, i) = resolve_split(a().shape().axis(src)?, outer, inner, env)?;
            ops::split_axis(a(), src, &o, &i)
        }
        Unroll { seq, kernel, .. } => ops::unroll(a(), seq, &resolve(kernel, env)?),
        Index { ax, .. } => ops::index_select(args[0], ax, args[1]),
        PartialIndex { ax, at, .. } => {
            let axis = a().shape().axis(ax)?;
            let record = Record::new([(axis.name.as_str(), *at)])?;
            a().partial_index(&record)
        }
        TopK { argmax, ax, k, .. } => {
            let k = resolve(k, env)?;
            if *argmax {
                ops::argmaxk(a(), ax, &k)
            } else {
                ops::maxk(a(), ax, &k)
            }
        }
        Det { rows, cols, .. } => ops::det(a(), rows, cols),
        Inv { rows, cols, .. } => ops::inv(a(), rows, cols),
    }
}

/// Distance of the evaluation point from the nearest non-smooth point of any
/// node: relu/abs kinks, ties in max/min reductions, argmax families and
/// top-k, and equality tests. `f64::INFINITY` for smooth expressions.
pub fn kink_margin(e: &Expr, trace: &Trace) -> f64 {
    use ExprKind::*;
    let mut margin = e
        .children()
        .into_iter()
        .zip(&trace.children)
        .map(|(c, t)| kink_margin(c, t))
        .fold(f64::INFINITY, f64::min);
    let arg = |i: usize| &trace.children[i].value;
    match &e.kind {
        Unary(f, _) => {
            for &k in f.kinks() {
                for &x in arg(0).data() {
                    margin = margin.min((x - k).abs());
                }
            }
        }
        Binary(BinaryOp::Eq, ..) => {
            if let Ok(d) = ops::sub(arg(0), arg(1)) {
                margin = d.data().iter().fold(margin, |m, v| m.min(v.abs()));
            }
        }
        Reduce(ReduceKind::Max | ReduceKind::Min, axes, _) => {
            margin = margin.min(gap(arg(0), axes, 1));
        }
        Normalize(NormalizeKind::Argmax | NormalizeKind::Argmin, axes, _) => {
            margin = margin.min(gap(arg(0), axes, 1));
        }
        TopK { ax, .. } => {
            let k = trace
                .value
                .shape()
                .axes()
                .iter()
                .find(|a| !arg(0).shape().contains(a.name.as_str()));
            let k = k.map_or(1, |a| a.size);
            margin = margin.min(gap(arg(0), std::slice::from_ref(ax), k));
        }
        _ => {}
    }
    margin
}

/// Smallest difference between consecutive sorted values among the top
/// `depth + 1` (and the bottom two) of each slice over `axes`.
fn gap(t: &NamedTensor, axes: &[String], depth: usize) -> f64 {
    let Ok(base) = t.shape().select(axes) else {
        return f64::INFINITY;
    };
    let rest = t.shape().difference(&base);
    let base_off = t.shape().offsets_of(&base);
    let rest_off = t.shape().offsets_of(&rest);
    let mut margin = f64::INFINITY;
    for r in &rest_off {
        let mut values: Vec<f64> = base_off.iter().map(|b| t.data()[r + b]).collect();
        values.sort_by(|a, b| b.total_cmp(a));
        let n = values.len();
        for i in 0..n.saturating_sub(1) {
            if i < depth || i + 2 == n {
                margin = margin.min(values[i] - values[i + 1]);
            }
        }
    }
    margin
}
