use std::collections::HashMap;

use crate::axes::{Axis, Shape};
use crate::error::{Error, Result};
use crate::ops::{BinaryOp, NormalizeKind, ReduceKind, UnaryFn};
use crate::tensor::NamedTensor;

/// Source location of a node: 1-based line and column of its first
/// character, plus the byte range it covers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub line: usize,
    pub col: usize,
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(line: usize, col: usize, start: usize, end: usize) -> Self {
        Span { line, col, start, end }
    }

    /// Smallest span covering both.
    pub fn to(self, other: Span) -> Span {
        if other.start < self.start {
            return other.to(self);
        }
        Span {
            end: self.end.max(other.end),
            ..self
        }
    }
}

/// An axis introduced by an operation. Without an explicit size, the size is
/// looked up among declared axes or derived from the operand.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AxisSpec {
    pub name: String,
    pub size: Option<usize>,
}

impl AxisSpec {
    pub fn named(name: &str) -> Self {
        AxisSpec {
            name: name.to_string(),
            size: None,
        }
    }

    pub fn sized(name: &str, size: usize) -> Self {
        AxisSpec {
            name: name.to_string(),
            size: Some(size),
        }
    }
}

impl From<&str> for AxisSpec {
    fn from(name: &str) -> Self {
        AxisSpec::named(name)
    }
}

impl From<&Axis> for AxisSpec {
    fn from(axis: &Axis) -> Self {
        AxisSpec::sized(axis.name.as_str(), axis.size)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Number(f64),
    /// `|ax|`, the size of a declared axis.
    Size(String),
    Var(String),
    Literal(NamedTensor),
    Unary(UnaryFn, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Reduce(ReduceKind, Vec<String>, Box<Expr>),
    Contract(Vec<String>, Box<Expr>, Box<Expr>),
    Normalize(NormalizeKind, Vec<String>, Box<Expr>),
    Standardize(Vec<String>, Box<Expr>),
    Rename {
        expr: Box<Expr>,
        from: String,
        to: String,
    },
    Merge {
        expr: Box<Expr>,
        parts: Vec<String>,
        into: AxisSpec,
    },
    Split {
        expr: Box<Expr>,
        src: String,
        outer: AxisSpec,
        inner: AxisSpec,
    },
    Unroll {
        expr: Box<Expr>,
        seq: String,
        kernel: AxisSpec,
    },
    /// Lifted advanced indexing along `ax` by an index-valued expression.
    Index {
        expr: Box<Expr>,
        ax: String,
        index: Box<Expr>,
    },
    /// `A[ax=i]` with a constant index.
    PartialIndex {
        expr: Box<Expr>,
        ax: String,
        at: usize,
    },
    TopK {
        expr: Box<Expr>,
        argmax: bool,
        ax: String,
        k: AxisSpec,
    },
    Det {
        expr: Box<Expr>,
        rows: String,
        cols: String,
    },
    Inv {
        expr: Box<Expr>,
        rows: String,
        cols: String,
    },
}

/// An expression node. Equality ignores spans.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

fn owned<S: AsRef<str>>(axes: &[S]) -> Vec<String> {
    axes.iter().map(|a| a.as_ref().to_string()).collect()
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub fn at(mut self, span: Span) -> Self {
        self.span = span;
        self
    }

    pub fn number(value: f64) -> Self {
        Expr::new(ExprKind::Number(value))
    }

    pub fn size(axis: &str) -> Self {
        Expr::new(ExprKind::Size(axis.to_string()))
    }

    pub fn var(name: &str) -> Self {
        Expr::new(ExprKind::Var(name.to_string()))
    }

    pub fn literal(t: NamedTensor) -> Self {
        Expr::new(ExprKind::Literal(t))
    }

    pub fn unary(self, f: UnaryFn) -> Self {
        Expr::new(ExprKind::Unary(f, Box::new(self)))
    }

    pub fn binary(self, op: BinaryOp, rhs: Expr) -> Self {
        Expr::new(ExprKind::Binary(op, Box::new(self), Box::new(rhs)))
    }

    pub fn add(self, rhs: Expr) -> Self {
        self.binary(BinaryOp::Add, rhs)
    }

    pub fn sub(self, rhs: Expr) -> Self {
        self.binary(BinaryOp::Sub, rhs)
    }

    pub fn mul(self, rhs: Expr) -> Self {
        self.binary(BinaryOp::Mul, rhs)
    }

    pub fn div(self, rhs: Expr) -> Self {
        self.binary(BinaryOp::Div, rhs)
    }

    pub fn reduce<S: AsRef<str>>(self, kind: ReduceKind, axes: &[S]) -> Self {
        Expr::new(ExprKind::Reduce(kind, owned(axes), Box::new(self)))
    }

    pub fn sum<S: AsRef<str>>(self, axes: &[S]) -> Self {
        self.reduce(ReduceKind::Sum, axes)
    }

    pub fn contract<S: AsRef<str>>(self, rhs: Expr, axes: &[S]) -> Self {
        Expr::new(ExprKind::Contract(owned(axes), Box::new(self), Box::new(rhs)))
    }

    pub fn normalize<S: AsRef<str>>(self, kind: NormalizeKind, axes: &[S]) -> Self {
        Expr::new(ExprKind::Normalize(kind, owned(axes), Box::new(self)))
    }

    pub fn softmax<S: AsRef<str>>(self, axes: &[S]) -> Self {
        self.normalize(NormalizeKind::Softmax, axes)
    }

    pub fn standardize<S: AsRef<str>>(self, axes: &[S]) -> Self {
        Expr::new(ExprKind::Standardize(owned(axes), Box::new(self)))
    }

    pub fn rename(self, from: &str, to: &str) -> Self {
        Expr::new(ExprKind::Rename {
            expr: Box::new(self),
            from: from.to_string(),
            to: to.to_string(),
        })
    }

    pub fn merge<S: AsRef<str>>(self, parts: &[S], into: impl Into<AxisSpec>) -> Self {
        Expr::new(ExprKind::Merge {
            expr: Box::new(self),
            parts: owned(parts),
            into: into.into(),
        })
    }

    pub fn split(self, src: &str, outer: impl Into<AxisSpec>, inner: impl Into<AxisSpec>) -> Self {
        Expr::new(ExprKind::Split {
            expr: Box::new(self),
            src: src.to_string(),
            outer: outer.into(),
            inner: inner.into(),
        })
    }

    pub fn unroll(self, seq: &str, kernel: impl Into<AxisSpec>) -> Self {
        Expr::new(ExprKind::Unroll {
            expr: Box::new(self),
            seq: seq.to_string(),
            kernel: kernel.into(),
        })
    }

    pub fn index(self, ax: &str, index: Expr) -> Self {
        Expr::new(ExprKind::Index {
            expr: Box::new(self),
            ax: ax.to_string(),
            index: Box::new(index),
        })
    }

    pub fn at_index(self, ax: &str, at: usize) -> Self {
        Expr::new(ExprKind::PartialIndex {
            expr: Box::new(self),
            ax: ax.to_string(),
            at,
        })
    }

    pub fn top_k(self, argmax: bool, ax: &str, k: impl Into<AxisSpec>) -> Self {
        Expr::new(ExprKind::TopK {
            expr: Box::new(self),
            argmax,
            ax: ax.to_string(),
            k: k.into(),
        })
    }

    pub fn det(self, rows: &str, cols: &str) -> Self {
        Expr::new(ExprKind::Det {
            expr: Box::new(self),
            rows: rows.to_string(),
            cols: cols.to_string(),
        })
    }

    pub fn inv(self, rows: &str, cols: &str) -> Self {
        Expr::new(ExprKind::Inv {
            expr: Box::new(self),
            rows: rows.to_string(),
            cols: cols.to_string(),
        })
    }

    /// Direct subexpressions, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        use ExprKind::*;
        match &self.kind {
            Number(_) | Size(_) | Var(_) | Literal(_) => vec![],
            Unary(_, e)
            | Reduce(_, _, e)
            | Normalize(_, _, e)
            | Standardize(_, e)
            | Rename { expr: e, .. }
            | Merge { expr: e, .. }
            | Split { expr: e, .. }
            | Unroll { expr: e, .. }
            | PartialIndex { expr: e, .. }
            | TopK { expr: e, .. }
            | Det { expr: e, .. }
            | Inv { expr: e, .. } => vec![e],
            Binary(_, a, b) | Contract(_, a, b) => vec![a, b],
            Index { expr, index, .. } => vec![expr, index],
        }
    }

    /// Names of variables read by the expression, in first-use order.
    pub fn variables(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            if let ExprKind::Var(name) = &e.kind {
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
            for c in e.children() {
                walk(c, out);
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Replaces variables by expressions, leaving unmapped names alone.
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        if let ExprKind::Var(name) = &self.kind {
            if let Some(e) = map.get(name) {
                return e.clone();
            }
        }
        let mut out = self.clone();
        for child in out.children_mut() {
            *child = child.substitute(map);
        }
        out
    }

    fn children_mut(&mut self) -> Vec<&mut Expr> {
        use ExprKind::*;
        match &mut self.kind {
            Number(_) | Size(_) | Var(_) | Literal(_) => vec![],
            Unary(_, e)
            | Reduce(_, _, e)
            | Normalize(_, _, e)
            | Standardize(_, e)
            | Rename { expr: e, .. }
            | Merge { expr: e, .. }
            | Split { expr: e, .. }
            | Unroll { expr: e, .. }
            | PartialIndex { expr: e, .. }
            | TopK { expr: e, .. }
            | Det { expr: e, .. }
            | Inv { expr: e, .. } => vec![e],
            Binary(_, a, b) | Contract(_, a, b) => vec![a, b],
            Index { expr, index, .. } => vec![expr, index],
        }
    }
}

/// Variable bindings plus declared axis sizes.
#[derive(Clone, Debug, Default)]
pub struct Scope<T> {
    pub vars: HashMap<String, T>,
    pub axes: HashMap<String, usize>,
}

pub type ShapeEnv = Scope<Shape>;
pub type Env = Scope<NamedTensor>;

impl<T> Scope<T> {
    pub fn new() -> Self {
        Scope {
            vars: HashMap::new(),
            axes: HashMap::new(),
        }
    }

    pub fn bind(mut self, name: &str, value: T) -> Self {
        self.vars.insert(name.to_string(), value);
        self
    }

    pub fn declare(mut self, axis: &str, size: usize) -> Self {
        self.axes.insert(axis.to_string(), size);
        self
    }

    pub fn lookup(&self, name: &str) -> Result<&T> {
        self.vars
            .get(name)
            .ok_or_else(|| Error::UnboundVariable(name.to_string()))
    }

    pub(crate) fn declared(&self, axis: &str) -> Result<usize> {
        self.axes
            .get(axis)
            .copied()
            .ok_or_else(|| Error::UndeclaredAxis(axis.to_string()))
    }
}

impl Env {
    /// The shapes of every binding, with the same axis declarations.
    pub fn shapes(&self) -> ShapeEnv {
        Scope {
            vars: self.vars.iter().map(|(k, v)| (k.clone(), v.shape().clone())).collect(),
            axes: self.axes.clone(),
        }
    }
}

pub(crate) fn resolve<T>(spec: &AxisSpec, scope: &Scope<T>) -> Result<Axis> {
    let size = match spec.size {
        Some(n) => n,
        None => scope.declared(&spec.name)?,
    };
    Axis::new(&spec.name, size)
}

pub(crate) fn resolve_merge<T>(spec: &AxisSpec, parts: &Shape, scope: &Scope<T>) -> Result<Axis> {
    let size = spec
        .size
        .or_else(|| scope.axes.get(&spec.name).copied())
        .unwrap_or_else(|| parts.num_records());
    Axis::new(&spec.name, size)
}

/// Sizes of a split of `source`. An axis named like the source, or one with
/// no declared size, takes the quotient of the other.
pub(crate) fn resolve_split<T>(
    source: &Axis,
    outer: &AxisSpec,
    inner: &AxisSpec,
    scope: &Scope<T>,
) -> Result<(Axis, Axis)> {
    let known = |spec: &AxisSpec| {
        spec.size.or_else(|| {
            if spec.name == source.name.as_str() {
                None
            } else {
                scope.axes.get(&spec.name).copied()
            }
        })
    };
    let (o, i) = match (known(outer), known(inner)) {
        (Some(o), Some(i)) => (o, i),
        (None, Some(i)) => (source.size / i.max(1), i),
        (Some(o), None) => (o, source.size / o.max(1)),
        (None, None) => return Err(Error::UndeclaredAxis(inner.name.clone())),
    };
    Ok((Axis::new(&outer.name, o)?, Axis::new(&inner.name, i)?))
}
