use std::fmt::Write;

use crate::autodiff::{AxisSpec, Expr, ExprKind};
use crate::ops::{BinaryOp, UnaryFn};
use crate::tensor::NamedTensor;

use super::ast::{Program, StmtKind};

// Binding strength, loosest first.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const CONTRACT: u8 = 3;
const PREFIX: u8 = 4;
const POWER: u8 = 5;
const ATOM: u8 = 6;

/// Source text that parses back to the same program.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for stmt in &p.statements {
        match &stmt.kind {
            StmtKind::Axis { name, size } => writeln!(out, "axis {name} = {size}"),
            StmtKind::Decl { name, axes } => {
                let axes: Vec<String> = axes
                    .iter()
                    .map(|a| match a.size {
                        Some(n) => format!("{}={n}", a.name),
                        None => a.name.clone(),
                    })
                    .collect();
                writeln!(out, "{name} : R[{}]", axes.join(", "))
            }
            StmtKind::Bind { name, expr } => writeln!(out, "{name} = {}", print_expr(expr)),
            StmtKind::Directive { directive, target } => writeln!(out, "{} {target}", directive.keyword()),
        }
        .expect("writing to a string");
    }
    out
}

pub fn print_expr(e: &Expr) -> String {
    print(e, SUM)
}

fn number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:?}")
    }
}

fn spec(a: &AxisSpec) -> String {
    match a.size {
        Some(n) => format!("{}={n}", a.name),
        None => a.name.clone(),
    }
}

fn literal(t: &NamedTensor) -> String {
    let names: Vec<&str> = t.shape().names().map(|n| n.as_str()).collect();
    if names.is_empty() {
        return number(t.data()[0]);
    }
    let sizes: Vec<usize> = t.shape().axes().iter().map(|a| a.size).collect();
    fn nest(data: &[f64], sizes: &[usize]) -> String {
        if sizes.len() == 1 {
            let items: Vec<String> = data.iter().map(|&v| number(v)).collect();
            return format!("[{}]", items.join(", "));
        }
        let chunk = data.len() / sizes[0];
        let items: Vec<String> = data.chunks(chunk).map(|c| nest(c, &sizes[1..])).collect();
        format!("[{}]", items.join(", "))
    }
    format!("{} over ({})", nest(t.data(), &sizes), names.join(", "))
}

fn strength(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => SUM,
        ExprKind::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PRODUCT,
        ExprKind::Binary(BinaryOp::Pow, ..) => POWER,
        ExprKind::Contract(..) => CONTRACT,
        ExprKind::Unary(UnaryFn::Neg, _) => PREFIX,
        ExprKind::Number(v) if v.is_sign_negative() && !v.is_nan() => PREFIX,
        _ => ATOM,
    }
}

fn print(e: &Expr, min: u8) -> String {
    let text = bare(e);
    if strength(e) < min {
        format!("({text})")
    } else {
        text
    }
}

fn call(name: &str, axes: &[String], args: &[&Expr]) -> String {
    let args: Vec<String> = args.iter().map(|a| print(a, SUM)).collect();
    format!("{name}{{{}}}({})", axes.join(", "), args.join(", "))
}

fn bare(e: &Expr) -> String {
    use ExprKind::*;
    match &e.kind {
        Number(v) => number(*v),
        Size(axis) => format!("size({axis})"),
        Var(name) => name.clone(),
        Literal(t) => literal(t),
        Unary(UnaryFn::Neg, x) => {
            // `-2` would read back as a negative number literal.
            if matches!(x.kind, Number(_)) {
                format!("-({})", bare(x))
            } else {
                format!("-{}", print(x, PREFIX))
            }
        }
        Unary(f, x) => format!("{}({})", f.name(), print(x, SUM)),
        Binary(BinaryOp::Eq, a, b) => format!("eq({}, {})", print(a, SUM), print(b, SUM)),
        Binary(op, a, b) => {
            let (l, r) = match op {
                BinaryOp::Add | BinaryOp::Sub => (SUM, PRODUCT),
                BinaryOp::Mul | BinaryOp::Div => (PRODUCT, CONTRACT),
                _ => (ATOM, PREFIX),
            };
            format!("{} {} {}", print(a, l), op.symbol(), print(b, r))
        }
        Reduce(kind, axes, x) => call(kind.name(), axes, &[x]),
        Contract(axes, a, b) => format!("{} .{{{}}} {}", print(a, CONTRACT), axes.join(", "), print(b, PREFIX)),
        Normalize(kind, axes, x) => call(kind.name(), axes, &[x]),
        Standardize(axes, x) => call("standardize", axes, &[x]),
        Rename { expr, from, to } => format!("{}[{from}->{to}]", print(expr, ATOM)),
        Merge { expr, parts, into } => format!("{}[({})->{}]", print(expr, ATOM), parts.join(", "), spec(into)),
        Split {
            expr,
            src,
            outer,
            inner,
        } => {
            if outer.name == *src && outer.size.is_none() {
                call("pool", &[src.clone(), spec(inner)], &[expr])
            } else {
                call("split", &[src.clone(), spec(outer), spec(inner)], &[expr])
            }
        }
        Unroll { expr, seq, kernel } => call("unroll", &[seq.clone(), spec(kernel)], &[expr]),
        Index { expr, ax, index } => call("index", std::slice::from_ref(ax), &[expr, index]),
        PartialIndex { expr, ax, at } => format!("{}[{ax}={at}]", print(expr, ATOM)),
        TopK { expr, argmax, ax, k } => {
            let name = if *argmax { "argmaxk" } else { "maxk" };
            call(name, &[ax.clone(), spec(k)], &[expr])
        }
        Det { expr, rows, cols } => call("det", &[rows.clone(), cols.clone()], &[expr]),
        Inv { expr, rows, cols } => call("inv", &[rows.clone(), cols.clone()], &[expr]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse, parse_expr};

    fn round_trip(src: &str) {
        let e = parse_expr(src).unwrap();
        let printed = print_expr(&e);
        assert_eq!(parse_expr(&printed).unwrap(), e, "{src} printed as {printed}");
    }

    #[test]
    fn expressions_reparse() {
        for src in [
            "a - (b - c)",
            "(a - b) - c",
            "a / (b * c)",
            "-(2) + -2",
            "(-2) ^ 2",
            "-2 ^ 2",
            "a ^ b ^ c",
            "(a ^ b) ^ c",
            "(a + b) .{k} (c .{k} d)",
            "-x .{k} -y",
            "softmax{seq}(Q .{key} K / sqrt(size(key)) + M)[seq->seq']",
            "pool{seq, kernel}(X) + split{seq, a, b=2}(X)",
            "[[1.5, -inf], [3, 1e-300]] over (b, a)",
            "sum{}(x) * eq(x, 2)",
            "maxk{state, beam}(h) + index{vocab}(E, i)[emb=1]",
        ] {
            round_trip(src);
        }
    }

    #[test]
    fn programs_reparse() {
        let src = "axis h = 3\nA : R[h, w=2]\n# note\nB = sum{h}(A)\nprint B\ncheck B\n";
        let p = parse(src).unwrap();
        let printed = print_program(&p);
        assert_eq!(parse(&printed).unwrap(), p);
        assert_eq!(printed, "axis h = 3\nA : R[h, w=2]\nB = sum{h}(A)\nprint B\ncheck B\n");
    }
}
