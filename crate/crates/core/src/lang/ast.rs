use crate::autodiff::{Expr, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeclAxis {
    pub name: String,
    pub size: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Directive {
    Print,
    Check,
    Grad,
}

impl Directive {
    pub fn keyword(self) -> &'static str {
        match self {
            Directive::Print => "print",
            Directive::Check => "check",
            Directive::Grad => "grad",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Directive> {
        [Directive::Print, Directive::Check, Directive::Grad]
            .into_iter()
            .find(|d| d.keyword() == word)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    /// `axis name = size`
    Axis {
        name: String,
        size: usize,
    },
    /// `name : R[ax, ...]`
    Decl {
        name: String,
        axes: Vec<DeclAxis>,
    },
    /// `name = expr`
    Bind {
        name: String,
        expr: Expr,
    },
    Directive {
        directive: Directive,
        target: String,
    },
}

/// A statement with its location. Equality ignores spans.
#[derive(Clone, Debug)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub statements: Vec<Stmt>,
}
