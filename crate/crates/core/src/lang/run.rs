use std::collections::{BTreeMap, HashMap};

use crate::autodiff::{self, Derivative, Env, Expr, Span};
use crate::axes::Shape;
use crate::rng::SplitMix64;
use crate::tensor::{shape_header, NamedTensor};

use super::ast::{Directive, Program, StmtKind};
use super::check::{bound_names, check};
use super::Diagnostic;

/// Values of every identifier and the text produced by directives.
#[derive(Clone, Debug, Default)]
pub struct Evaluation {
    pub values: BTreeMap<String, NamedTensor>,
    pub output: String,
}

/// Program state after evaluation: leaf values, plus each derived binding as
/// an expression over leaves.
struct Session {
    env: Env,
    leaves: Vec<String>,
    expanded: HashMap<String, Expr>,
    spans: HashMap<String, Span>,
}

impl Session {
    fn expression(&self, name: &str) -> Expr {
        self.expanded.get(name).cloned().unwrap_or_else(|| Expr::var(name))
    }

    fn derivative(&self, of: &str, wrt: &str) -> Result<Derivative, Diagnostic> {
        let span = self.spans.get(of).copied().unwrap_or_default();
        autodiff::jacobian(&self.expression(of), wrt, &self.env).map_err(|e| Diagnostic::from_error(span, &e))
    }
}

fn execute(p: &Program, seed: u64) -> Result<(Session, Evaluation), Vec<Diagnostic>> {
    let diagnostics = check(p);
    if !diagnostics.is_empty() {
        return Err(diagnostics);
    }
    let bound = bound_names(p);
    let mut rng = SplitMix64::new(seed);
    let mut session = Session {
        env: Env::new(),
        leaves: Vec::new(),
        expanded: HashMap::new(),
        spans: HashMap::new(),
    };
    let mut eval = Evaluation::default();
    let mut values = HashMap::new();

    for stmt in &p.statements {
        let fail = |e: crate::error::Error| vec![Diagnostic::from_error(stmt.span, &e)];
        match &stmt.kind {
            StmtKind::Axis { name, size } => {
                session.env.axes.insert(name.clone(), *size);
            }
            StmtKind::Decl { name, axes } => {
                for a in axes {
                    if let Some(n) = a.size {
                        session.env.axes.entry(a.name.clone()).or_insert(n);
                    }
                }
                if bound.contains(name) {
                    continue;
                }
                let pairs: Vec<(&str, usize)> = axes
                    .iter()
                    .map(|a| (a.name.as_str(), a.size.unwrap_or_else(|| session.env.axes[&a.name])))
                    .collect();
                let shape = Shape::new(pairs).map_err(fail)?;
                let value = rng.tensor(shape, -1.0, 1.0);
                session.leaves.push(name.clone());
                session.env.vars.insert(name.clone(), value.clone());
                values.insert(name.clone(), value);
            }
            StmtKind::Bind { name, expr } => {
                let mut scope = Env::new();
                scope.axes = session.env.axes.clone();
                scope.vars = values.clone();
                let value = autodiff::evaluate(expr, &scope).map_err(fail)?;
                session.spans.insert(name.clone(), stmt.span);
                if expr.variables().is_empty() {
                    session.leaves.push(name.clone());
                    session.env.vars.insert(name.clone(), value.clone());
                } else {
                    let e = expr.substitute(&session.expanded);
                    session.expanded.insert(name.clone(), e);
                }
                values.insert(name.clone(), value);
            }
            StmtKind::Directive { directive, target } => {
                let value = &values[target];
                match directive {
                    Directive::Print => {
                        eval.output.push_str(&format!("# {target}\n{}", value.to_text()));
                    }
                    Directive::Check => {
                        eval.output
                            .push_str(&format!("# {target}\n{}\n", shape_header(value.shape())));
                    }
                    Directive::Grad => {
                        let vars = session.expression(target).variables();
                        for leaf in session.leaves.iter().filter(|l| vars.contains(l)) {
                            let d = session.derivative(target, leaf).map_err(|d| vec![d])?;
                            eval.output
                                .push_str(&format!("# d{target}/d{leaf}\n{}", d.value.to_text()));
                        }
                    }
                }
            }
        }
    }
    eval.values = values.into_iter().collect();
    Ok((session, eval))
}

/// Checks and runs a program. Declared inputs without a binding are drawn
/// from a generator seeded with `seed`.
pub fn evaluate(p: &Program, seed: u64) -> Result<Evaluation, Vec<Diagnostic>> {
    execute(p, seed).map(|(_, eval)| eval)
}

/// Derivative of identifier `of` with respect to the input or constant `wrt`.
pub fn grad(p: &Program, of: &str, wrt: &str, seed: u64) -> Result<Derivative, Vec<Diagnostic>> {
    let (session, _) = execute(p, seed)?;
    let start = Span::new(1, 1, 0, 0);
    if !session.env.vars.contains_key(of) && !session.expanded.contains_key(of) {
        return Err(vec![Diagnostic::new(
            start,
            "UnboundVariable",
            format!("unbound variable {of}"),
        )]);
    }
    if !session.leaves.iter().any(|l| l == wrt) {
        let span = session.spans.get(wrt).copied().unwrap_or(start);
        let msg = format!("{wrt} is not an input or constant and cannot be differentiated against");
        return Err(vec![Diagnostic::new(span, "InvalidTarget", msg)]);
    }
    session.derivative(of, wrt).map_err(|d| vec![d])
}
