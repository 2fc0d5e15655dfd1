use crate::axes::Shape;
use crate::error::{Error, Result};
use crate::ops;

use super::expr::{resolve, resolve_merge, resolve_split, Expr, ExprKind, ShapeEnv, Span};

/// The lifted result shape of `e`, or the first error met.
pub fn infer_shape(e: &Expr, env: &ShapeEnv) -> Result<Shape> {
    let mut errors = Vec::new();
    match infer_all(e, env, &mut errors) {
        Some(shape) => Ok(shape),
        None => Err(errors.remove(0).1),
    }
}

/// Infers every node, recording one error per failing node. Nodes above a
/// failure are skipped rather than reported again.
pub fn infer_all(e: &Expr, env: &ShapeEnv, errors: &mut Vec<(Span, Error)>) -> Option<Shape> {
    let children: Vec<Option<Shape>> = e.children().into_iter().map(|c| infer_all(c, env, errors)).collect();
    if children.iter().any(Option::is_none) {
        return None;
    }
    let shapes: Vec<Shape> = children.into_iter().flatten().collect();
    match node_shape(e, &shapes, env) {
        Ok(shape) => Some(shape),
        Err(err) => {
            errors.push((e.span, err));
            None
        }
    }
}

/// Shape of one node given the shapes of its children.
pub(crate) fn node_shape(e: &Expr, args: &[Shape], env: &ShapeEnv) -> Result<Shape> {
    use ExprKind::*;
    let a = || &args[0];
    match &e.kind {
        Number(_) => Ok(Shape::scalar()),
        Literal(t) => Ok(t.shape().clone()),
        Size(axis) => env.declared(axis).map(|_| Shape::scalar()),
        Var(name) => env.lookup(name).cloned(),
        Unary(..) => Ok(a().clone()),
        Binary(..) => ops::binary_shape(&args[0], &args[1]),
        Reduce(_, axes, _) => ops::reduce_shape(a(), axes),
        Contract(axes, ..) => ops::contract_shape(&args[0], &args[1], axes),
        Normalize(_, axes, _) => ops::normalize_shape(a(), axes),
        Standardize(axes, _) => ops::standardize_shape(a(), axes),
        Rename { from, to, .. } => ops::rename_shape(a(), from, to),
        Merge { parts, into, .. } => {
            let merged = resolve_merge(into, &a().select(parts)?, env)?;
            ops::merge_axes_shape(a(), parts, &merged)
        }
        Split { src, outer, inner, .. } => {
            let (o, i) = resolve_split(a().axis(src)?, outer, inner, env)?;
            ops::split_axis_shape(a(), src, &o, &i)
        }
        Unroll { seq, kernel, .. } => ops::unroll_shape(a(), seq, &resolve(kernel, env)?),
        Index { ax, .. } => ops::index_select_shape(&args[0], ax, &args[1]),
        PartialIndex { ax, at, .. } => {
            let axis = a().axis(ax)?;
            if *at == 0 || *at > axis.size {
                return Err(Error::IndexOutOfRange {
                    value: *at as f64,
                    axis: axis.name.clone(),
                    size: axis.size,
                });
            }
            Ok(a().remove(&[ax])?)
        }
        TopK { argmax, ax, k, .. } => {
            let k = resolve(k, env)?;
            if *argmax {
                ops::argmaxk_shape(a(), ax, &k)
            } else {
                ops::maxk_shape(a(), ax, &k)
            }
        }
        Det { rows, cols, .. } => ops::det_shape(a(), rows, cols),
        Inv { rows, cols, .. } => ops::inv_shape(a(), rows, cols),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(pairs: &[(&str, usize)]) -> Shape {
        Shape::new(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn attention_scores() {
        let env = ShapeEnv::new()
            .bind("Q", shape(&[("key", 2)]))
            .bind("K", shape(&[("seq", 3), ("key", 2)]));
        let e = Expr::var("Q").contract(Expr::var("K"), &["key"]);
        assert_eq!(infer_shape(&e, &env).unwrap(), shape(&[("seq", 3)]));

        let env = env.bind("Q", shape(&[("seq'", 3), ("key", 2), ("batch", 2)]));
        assert_eq!(
            infer_shape(&e, &env).unwrap(),
            shape(&[("seq'", 3), ("batch", 2), ("seq", 3)])
        );
    }

    #[test]
    fn errors_are_collected_per_node() {
        let env = ShapeEnv::new()
            .bind("A", shape(&[("height", 3)]))
            .bind("B", shape(&[("height", 4)]));
        let bad = Expr::var("A").add(Expr::var("B"));
        assert_eq!(infer_shape(&bad, &env).unwrap_err().kind(), "IncompatibleShapes");

        let both = bad.clone().mul(Expr::var("C").sum(&["x"]));
        let mut errors = Vec::new();
        assert!(infer_all(&both, &env, &mut errors).is_none());
        let kinds: Vec<_> = errors.iter().map(|(_, e)| e.kind()).collect();
        assert_eq!(kinds, ["IncompatibleShapes", "UnboundVariable"]);
    }

    #[test]
    fn pooling_derives_block_count() {
        let env = ShapeEnv::new().bind("X", shape(&[("seq", 6)])).declare("kernel", 2);
        let e = Expr::var("X").split("seq", "seq", "kernel");
        assert_eq!(infer_shape(&e, &env).unwrap(), shape(&[("seq", 3), ("kernel", 2)]));
        let m = Expr::var("X").unroll("seq", "kernel");
        assert_eq!(infer_shape(&m, &env).unwrap(), shape(&[("seq", 5), ("kernel", 2)]));
        let u = Expr::var("X").unroll("seq", "width");
        assert_eq!(infer_shape(&u, &env).unwrap_err().kind(), "UndeclaredAxis");
    }
}
