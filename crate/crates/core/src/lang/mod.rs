//! A small language for named-tensor programs.
//!
//! ```text
//! axis height = 3
//! axis width = 3
//! A = [[3, 1, 4], [1, 5, 9], [2, 6, 5]] over (height, width)
//! y = [1, 4, 1] over (width)
//! C = A .{width} y
//! print C
//! ```
//!
//! Functions with axis arguments are written `f{axes}(args)`, contraction is
//! `A .{axes} B`, and suffixes rename (`A[a->b]`), merge (`A[(a,b)->c]`) or
//! index (`A[a=1]`). A declared identifier that is never bound
//! (`W : R[a, b]`) is an input filled with seeded uniform values in
//! `[-1, 1)`.

mod ast;
mod check;
mod lexer;
mod parser;
mod printer;
mod run;

use std::fmt;

use crate::autodiff::Span;
use crate::axes::Shape;
use crate::error::Error;

pub use ast::{DeclAxis, Directive, Program, Stmt, StmtKind};
pub use check::check;
pub use parser::{parse, parse_expr};
pub use printer::{print_expr, print_program};
pub use run::{evaluate, grad, Evaluation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// A located problem in a program.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub col: usize,
    pub span: Span,
    /// Stable category such as `SyntaxError` or `IncompatibleShapes`.
    pub code: &'static str,
    pub message: String,
    /// Shapes involved in the failure, if any.
    pub shapes: Vec<Shape>,
}

impl Diagnostic {
    pub fn new(span: Span, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            line: span.line,
            col: span.col,
            span,
            code,
            message: message.into(),
            shapes: Vec::new(),
        }
    }

    pub fn syntax(span: Span, message: impl Into<String>) -> Self {
        Diagnostic::new(span, "SyntaxError", message)
    }

    pub fn from_error(span: Span, err: &Error) -> Self {
        let shapes = match err {
            Error::IncompatibleShapes { left, right } => vec![left.clone(), right.clone()],
            Error::ShapeMismatch { expected, found } => vec![expected.clone(), found.clone()],
            Error::MissingAxis { shape, .. }
            | Error::InvalidRecord { shape, .. }
            | Error::ExtensionCollision { shape, .. }
            | Error::NameCollision { shape, .. }
            | Error::DataLength { shape, .. } => vec![shape.clone()],
            _ => Vec::new(),
        };
        Diagnostic {
            shapes,
            ..Diagnostic::new(span, err.kind(), err.to_string())
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {} [{}]",
            self.line, self.col, self.severity, self.message, self.code
        )
    }
}
