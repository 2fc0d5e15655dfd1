use std::collections::{HashMap, HashSet};

use crate::autodiff::{infer_all, Expr, ExprKind, ShapeEnv, Span};
use crate::axes::{Axis, Shape};
use crate::error::Error;

use super::ast::{DeclAxis, Program, StmtKind};
use super::Diagnostic;

/// Checks every statement, collecting all diagnostics.
pub fn check(p: &Program) -> Vec<Diagnostic> {
    Checker::new(p).run(p)
}

/// Which identifiers a program binds anywhere, so declarations can tell
/// annotated bindings apart from random inputs.
pub(crate) fn bound_names(p: &Program) -> HashSet<String> {
    p.statements
        .iter()
        .filter_map(|s| match &s.kind {
            StmtKind::Bind { name, .. } => Some(name.clone()),
            _ => None,
        })
        .collect()
}

struct Checker {
    env: ShapeEnv,
    bound_later: HashSet<String>,
    /// Shapes announced by declarations of identifiers bound later.
    annotated: HashMap<String, Shape>,
    /// Identifiers whose definition failed; uses of them are not reported.
    failed: HashSet<String>,
    bound: HashSet<String>,
    diagnostics: Vec<Diagnostic>,
}

impl Checker {
    fn new(p: &Program) -> Self {
        Checker {
            env: ShapeEnv::new(),
            bound_later: bound_names(p),
            annotated: HashMap::new(),
            failed: HashSet::new(),
            bound: HashSet::new(),
            diagnostics: Vec::new(),
        }
    }

    fn error(&mut self, span: Span, err: &Error) {
        self.diagnostics.push(Diagnostic::from_error(span, err));
    }

    fn redefinition(&mut self, span: Span, what: &str) {
        self.diagnostics.push(Diagnostic::new(span, "Redefinition", what));
    }

    fn run(mut self, p: &Program) -> Vec<Diagnostic> {
        for stmt in &p.statements {
            let span = stmt.span;
            match &stmt.kind {
                StmtKind::Axis { name, size } => self.axis(span, name, *size),
                StmtKind::Decl { name, axes } => self.decl(span, name, axes),
                StmtKind::Bind { name, expr } => self.bind(span, name, expr),
                StmtKind::Directive { target, .. } => {
                    if !self.env.vars.contains_key(target) && !self.failed.contains(target) {
                        self.error(span, &Error::UnboundVariable(target.clone()));
                    }
                }
            }
        }
        self.diagnostics
    }

    fn axis(&mut self, span: Span, name: &str, size: usize) {
        if let Err(err) = Axis::new(name, size) {
            return self.error(span, &err);
        }
        if let Some(prev) = self.env.axes.get(name) {
            let msg = format!("axis {name} is already declared with size {prev}");
            return self.redefinition(span, &msg);
        }
        self.env.axes.insert(name.to_string(), size);
    }

    fn decl(&mut self, span: Span, name: &str, axes: &[DeclAxis]) {
        if self.annotated.contains_key(name) || self.env.vars.contains_key(name) {
            return self.redefinition(span, &format!("{name} is already declared"));
        }
        let mut list = Vec::new();
        for a in axes {
            let size = match (a.size, self.env.axes.get(&a.name).copied()) {
                (Some(n), Some(d)) if n != d => {
                    let msg = format!("axis {} is declared with size {d}, not {n}", a.name);
                    return self.error(span, &Error::SizeMismatch(msg));
                }
                (Some(n), _) | (None, Some(n)) => n,
                (None, None) => return self.error(span, &Error::UndeclaredAxis(a.name.clone())),
            };
            match Axis::new(&a.name, size) {
                Ok(axis) => list.push(axis),
                Err(err) => return self.error(span, &err),
            }
        }
        let shape = match Shape::from_axes(list) {
            Ok(shape) => shape,
            Err(err) => return self.error(span, &err),
        };
        for axis in shape.axes() {
            self.env.axes.entry(axis.name.to_string()).or_insert(axis.size);
        }
        if self.bound_later.contains(name) {
            self.annotated.insert(name.to_string(), shape);
        } else {
            self.env.vars.insert(name.to_string(), shape);
        }
    }

    fn bind(&mut self, span: Span, name: &str, expr: &Expr) {
        if self.bound.contains(name) {
            self.failed.insert(name.to_string());
            return self.redefinition(span, &format!("{name} is already bound"));
        }
        self.bound.insert(name.to_string());
        let before = self.diagnostics.len();
        self.literal_sizes(expr);
        let mut errors = Vec::new();
        let shape = infer_all(expr, &self.env, &mut errors);
        for (at, err) in errors {
            let masked = matches!(&err, Error::UnboundVariable(v) if self.failed.contains(v));
            if !masked {
                self.error(at, &err);
            }
        }
        match shape {
            Some(shape) if self.diagnostics.len() == before => {
                if let Some(declared) = self.annotated.get(name) {
                    if declared != &shape {
                        let err = Error::ShapeMismatch {
                            expected: declared.clone(),
                            found: shape.clone(),
                        };
                        self.error(expr.span, &err);
                    }
                }
                self.env.vars.insert(name.to_string(), shape);
            }
            _ => {
                self.failed.insert(name.to_string());
            }
        }
    }

    /// Literal axes must agree with declared sizes.
    fn literal_sizes(&mut self, e: &Expr) {
        if let ExprKind::Literal(t) = &e.kind {
            for axis in t.shape().axes() {
                if let Some(&d) = self.env.axes.get(axis.name.as_str()) {
                    if d != axis.size {
                        let msg = format!("literal axis {axis} but {} is declared with size {d}", axis.name);
                        self.error(e.span, &Error::SizeMismatch(msg));
                    }
                }
            }
        }
        for c in e.children() {
            self.literal_sizes(c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn codes(src: &str) -> Vec<(usize, usize, &'static str)> {
        check(&parse(src).unwrap())
            .into_iter()
            .map(|d| (d.line, d.col, d.code))
            .collect()
    }

    #[test]
    fn matrix_vector_product_checks() {
        let src = "A : R[height=3, width=3]\ny : R[width=3]\nC = dot{width}(A, y)\ncheck C";
        assert!(codes(src).is_empty());
    }

    #[test]
    fn missing_axis() {
        let src = "A : R[height=3, width=3]\ny : R[width=3]\nC = dot{chans}(A, y)";
        assert_eq!(codes(src), [(3, 5, "MissingAxis")]);
    }

    #[test]
    fn incompatible_sizes_name_both_shapes() {
        let src = "A : R[height=3]\nB : R[h=4]\nC = A + B[h->height]";
        let d = check(&parse(src).unwrap());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, "IncompatibleShapes");
        assert!(d[0].message.contains("height[3]") && d[0].message.contains("height[4]"));
        assert_eq!(d[0].shapes.len(), 2);
    }

    #[test]
    fn all_failures_reported_once() {
        let src = "axis a = 2\nx : R[a]\nB = x + q\nC = sum{b}(x)\nD = B * 2\nprint D\nprint E";
        assert_eq!(
            codes(src),
            [
                (3, 9, "UnboundVariable"),
                (4, 5, "MissingAxis"),
                (7, 1, "UnboundVariable")
            ]
        );
    }

    #[test]
    fn redefinitions() {
        let src = "axis a = 2\naxis a = 3\nx = 1\nx = 2\ny : R[a]\ny : R[a]";
        let got: Vec<_> = codes(src).into_iter().map(|c| c.2).collect();
        assert_eq!(got, ["Redefinition", "Redefinition", "Redefinition"]);
    }

    #[test]
    fn annotated_binding_must_match() {
        let src = "axis a = 2\nx : R[a]\nx = 1";
        assert_eq!(codes(src), [(3, 5, "ShapeMismatch")]);
        assert!(codes("axis a = 2\nx : R[a]\nx = [1, 2] over (a)").is_empty());
        assert_eq!(codes("axis a = 2\nx = [1, 2, 3] over (a)"), [(2, 5, "SizeMismatch")]);
    }
}
