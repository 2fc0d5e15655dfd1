use crate::autodiff::{AxisSpec, Expr, ExprKind, Span};
use crate::ops::{BinaryOp, NormalizeKind, ReduceKind, UnaryFn};
use crate::tensor::NamedTensor;

use super::ast::{DeclAxis, Directive, Program, Stmt, StmtKind};
use super::lexer::{lex, Tok, Token};
use super::Diagnostic;

type PResult<T> = Result<T, Diagnostic>;

pub fn parse(source: &str) -> PResult<Program> {
    let mut p = Parser {
        tokens: lex(source)?,
        pos: 0,
    };
    let mut statements = Vec::new();
    while p.peek() != &Tok::Eof {
        statements.push(p.statement()?);
    }
    Ok(Program { statements })
}

/// Parses a single expression, rejecting trailing input.
pub fn parse_expr(source: &str) -> PResult<Expr> {
    let mut p = Parser {
        tokens: lex(source)?,
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        return Err(p.unexpected("end of expression"));
    }
    Ok(e)
}

/// Named functions written `f{axes}(args)` or `f(args)`.
enum Callee {
    Unary(UnaryFn),
    Reduce(ReduceKind),
    Normalize(NormalizeKind),
    Standardize,
    Dot,
    Eq,
    Size,
    Unroll,
    Pool,
    Split,
    Index,
    TopK(bool),
    Det,
    Inv,
}

fn callee(name: &str) -> Option<Callee> {
    if let Some(f) = UnaryFn::from_name(name) {
        return Some(Callee::Unary(f));
    }
    if let Some(k) = ReduceKind::from_name(name) {
        return Some(Callee::Reduce(k));
    }
    if let Some(k) = NormalizeKind::from_name(name) {
        return Some(Callee::Normalize(k));
    }
    Some(match name {
        "standardize" => Callee::Standardize,
        "dot" => Callee::Dot,
        "eq" => Callee::Eq,
        "size" => Callee::Size,
        "unroll" => Callee::Unroll,
        "pool" => Callee::Pool,
        "split" => Callee::Split,
        "index" => Callee::Index,
        "maxk" => Callee::TopK(false),
        "argmaxk" => Callee::TopK(true),
        "det" => Callee::Det,
        "inv" => Callee::Inv,
        _ => return None,
    })
}

struct AxisArg {
    name: String,
    size: Option<usize>,
    span: Span,
}

impl AxisArg {
    fn spec(&self) -> AxisSpec {
        AxisSpec {
            name: self.name.clone(),
            size: self.size,
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        Diagnostic::syntax(
            self.span(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.peek() == &tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) => Ok((name, self.bump().span)),
            _ => Err(self.unexpected("a name")),
        }
    }

    fn integer(&mut self) -> PResult<usize> {
        match *self.peek() {
            Tok::Number(v, true) if v <= usize::MAX as f64 => {
                self.bump();
                Ok(v as usize)
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let (name, _) = self.ident()?;
        let next_is_name = matches!(self.peek(), Tok::Ident(_));
        let kind = if name == "axis" && next_is_name {
            let (axis, _) = self.ident()?;
            self.expect(Tok::Eq)?;
            let size = self.integer()?;
            StmtKind::Axis { name: axis, size }
        } else if let (Some(directive), true) = (Directive::from_keyword(&name), next_is_name) {
            let (target, _) = self.ident()?;
            StmtKind::Directive { directive, target }
        } else if self.eat(&Tok::Colon) {
            let (r, _) = self.ident()?;
            if r != "R" {
                return Err(Diagnostic::syntax(
                    self.prev_span(),
                    format!("expected `R`, found `{r}`"),
                ));
            }
            self.expect(Tok::LBracket)?;
            let mut axes = Vec::new();
            if !self.eat(&Tok::RBracket) {
                loop {
                    let (axis, _) = self.ident()?;
                    let size = if self.eat(&Tok::Eq) {
                        Some(self.integer()?)
                    } else {
                        None
                    };
                    axes.push(DeclAxis { name: axis, size });
                    if self.eat(&Tok::RBracket) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
            }
            StmtKind::Decl { name, axes }
        } else if self.eat(&Tok::Eq) {
            StmtKind::Bind {
                name,
                expr: self.expr()?,
            }
        } else {
            return Err(self.unexpected("`=` or `:`"));
        };
        Ok(Stmt {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while self.peek() == &Tok::Dot {
            self.bump();
            self.expect(Tok::LBrace)?;
            let axes = self.axis_names(Tok::RBrace)?;
            let rhs = self.unary()?;
            let span = lhs.span.to(rhs.span);
            lhs = lhs.contract(rhs, &axes).at(span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.peek() != &Tok::Minus {
            return self.power();
        }
        let start = self.bump().span;
        if let Tok::Number(v, _) = *self.peek() {
            if self.peek_at(1) != &Tok::Caret {
                let end = self.bump().span;
                return Ok(Expr::number(-v).at(start.to(end)));
            }
        }
        if self.peek() == &Tok::Ident("inf".into()) && self.peek_at(1) != &Tok::Caret {
            let end = self.bump().span;
            return Ok(Expr::number(f64::NEG_INFINITY).at(start.to(end)));
        }
        let operand = self.unary()?;
        let span = start.to(operand.span);
        Ok(operand.unary(UnaryFn::Neg).at(span))
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.postfix_atom()?;
        if self.eat(&Tok::Caret) {
            let exponent = self.unary()?;
            return Ok(binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn postfix_atom(&mut self) -> PResult<Expr> {
        let atom = self.atom()?;
        self.postfix(atom)
    }

    fn postfix(&mut self, mut e: Expr) -> PResult<Expr> {
        while self.peek() == &Tok::LBracket {
            self.bump();
            if self.eat(&Tok::LParen) {
                let parts = self.axis_names(Tok::RParen)?;
                self.expect(Tok::Arrow)?;
                let into = self.axis_arg()?;
                let end = self.expect(Tok::RBracket)?;
                let span = e.span.to(end);
                e = e.merge(&parts, into.spec()).at(span);
                continue;
            }
            let (name, _) = self.ident()?;
            if self.eat(&Tok::Arrow) {
                let (to, _) = self.ident()?;
                let end = self.expect(Tok::RBracket)?;
                let span = e.span.to(end);
                e = e.rename(&name, &to).at(span);
                continue;
            }
            self.expect(Tok::Eq)?;
            let mut at = self.integer()?;
            let mut axis = name;
            loop {
                let span = e.span.to(self.prev_span());
                e = e.at_index(&axis, at).at(span);
                if !self.eat(&Tok::Comma) {
                    break;
                }
                axis = self.ident()?.0;
                self.expect(Tok::Eq)?;
                at = self.integer()?;
            }
            let end = self.expect(Tok::RBracket)?;
            e.span = e.span.to(end);
        }
        Ok(e)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Number(v, _) => {
                self.bump();
                Ok(Expr::number(v).at(start))
            }
            Tok::LParen => {
                self.bump();
                let mut e = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                e.span = start.to(end);
                Ok(e)
            }
            Tok::LBracket => self.literal(),
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "inf" => return Ok(Expr::number(f64::INFINITY).at(start)),
                    "nan" => return Ok(Expr::number(f64::NAN).at(start)),
                    _ => {}
                }
                match (self.peek(), callee(&name)) {
                    (Tok::LBrace | Tok::LParen, Some(f)) => self.call(&name, f, start),
                    (Tok::LBrace, None) => Err(Diagnostic::syntax(start, format!("unknown function `{name}`"))),
                    _ => Ok(Expr::var(&name).at(start)),
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn axis_arg(&mut self) -> PResult<AxisArg> {
        let (name, span) = self.ident()?;
        let size = if self.eat(&Tok::Eq) {
            Some(self.integer()?)
        } else {
            None
        };
        Ok(AxisArg {
            name,
            size,
            span: span.to(self.prev_span()),
        })
    }

    fn axis_args(&mut self, close: Tok) -> PResult<Vec<AxisArg>> {
        let mut out = Vec::new();
        if self.eat(&close) {
            return Ok(out);
        }
        loop {
            out.push(self.axis_arg()?);
            if self.eat(&close) {
                return Ok(out);
            }
            self.expect(Tok::Comma)?;
        }
    }

    /// A list of plain axis names.
    fn axis_names(&mut self, close: Tok) -> PResult<Vec<String>> {
        self.axis_args(close)?
            .into_iter()
            .map(|a| match a.size {
                None => Ok(a.name),
                Some(_) => Err(Diagnostic::syntax(a.span, "axis sizes are not allowed here")),
            })
            .collect()
    }

    fn call(&mut self, name: &str, f: Callee, start: Span) -> PResult<Expr> {
        let braced = self.eat(&Tok::LBrace);
        let brace_span = self.prev_span();
        let axes = if braced {
            self.axis_args(Tok::RBrace)?
        } else {
            Vec::new()
        };
        let paren = self.expect(Tok::LParen)?;

        if let Callee::Size = f {
            let (axis, _) = self.ident()?;
            let end = self.expect(Tok::RParen)?;
            return Ok(Expr::size(&axis).at(start.to(end)));
        }
        let mut args = vec![self.expr()?];
        while self.eat(&Tok::Comma) {
            args.push(self.expr()?);
        }
        let end = self.expect(Tok::RParen)?;
        let span = start.to(end);

        let arity = match f {
            Callee::Dot | Callee::Eq | Callee::Index => 2,
            _ => 1,
        };
        if args.len() != arity {
            return Err(Diagnostic::syntax(
                paren,
                format!("`{name}` takes {arity} argument(s), found {}", args.len()),
            ));
        }
        let axis_count = match f {
            Callee::Unary(_) | Callee::Eq => Some(0),
            Callee::Unroll | Callee::Pool | Callee::TopK(_) | Callee::Det | Callee::Inv => Some(2),
            Callee::Split => Some(3),
            Callee::Index => Some(1),
            _ => None,
        };
        if let Some(n) = axis_count {
            if axes.len() != n {
                return Err(Diagnostic::syntax(
                    brace_span,
                    format!("`{name}` takes {n} axis name(s), found {}", axes.len()),
                ));
            }
        }
        let sized_ok = matches!(f, Callee::Unroll | Callee::Pool | Callee::Split | Callee::TopK(_));
        for (i, a) in axes.iter().enumerate() {
            if a.size.is_some() && !(sized_ok && i > 0) {
                return Err(Diagnostic::syntax(a.span, "axis sizes are not allowed here"));
            }
        }
        let names: Vec<String> = axes.iter().map(|a| a.name.clone()).collect();
        let mut args = args.into_iter();
        let x = args.next().expect("arity checked");
        let e = match f {
            Callee::Unary(u) => x.unary(u),
            Callee::Reduce(k) => x.reduce(k, &names),
            Callee::Normalize(k) => x.normalize(k, &names),
            Callee::Standardize => x.standardize(&names),
            Callee::Dot => x.contract(args.next().expect("arity checked"), &names),
            Callee::Eq => x.binary(BinaryOp::Eq, args.next().expect("arity checked")),
            Callee::Index => x.index(&names[0], args.next().expect("arity checked")),
            Callee::Unroll => x.unroll(&names[0], axes[1].spec()),
            Callee::Pool => x.split(&names[0], names[0].as_str(), axes[1].spec()),
            Callee::Split => x.split(&names[0], axes[1].spec(), axes[2].spec()),
            Callee::TopK(argmax) => x.top_k(argmax, &names[0], axes[1].spec()),
            Callee::Det => x.det(&names[0], &names[1]),
            Callee::Inv => x.inv(&names[0], &names[1]),
            Callee::Size => unreachable!("handled above"),
        };
        Ok(e.at(span))
    }

    /// `[[1, 2], [3, 4]] over (a, b)`
    fn literal(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut values = Vec::new();
        let mut dims: Vec<Option<usize>> = Vec::new();
        self.nested(0, &mut dims, &mut values)?;
        let (over, _) = self.ident()?;
        if over != "over" {
            return Err(Diagnostic::syntax(
                self.prev_span(),
                format!("expected `over`, found `{over}`"),
            ));
        }
        self.expect(Tok::LParen)?;
        let axes = self.axis_names(Tok::RParen)?;
        let span = start.to(self.prev_span());
        if axes.len() != dims.len() {
            return Err(Diagnostic::syntax(
                span,
                format!(
                    "literal has {} nesting level(s) but names {} axes",
                    dims.len(),
                    axes.len()
                ),
            ));
        }
        let pairs: Vec<(&str, usize)> = axes
            .iter()
            .zip(&dims)
            .map(|(a, d)| (a.as_str(), d.unwrap_or(0)))
            .collect();
        let t = NamedTensor::from_ordered(&pairs, values).map_err(|e| Diagnostic::from_error(span, &e))?;
        Ok(Expr::literal(t).at(span))
    }

    fn nested(&mut self, depth: usize, dims: &mut Vec<Option<usize>>, values: &mut Vec<f64>) -> PResult<()> {
        let open = self.expect(Tok::LBracket)?;
        let ragged = || Diagnostic::syntax(open, "ragged literal");
        let lists = self.peek() == &Tok::LBracket;
        let mut count = 0;
        loop {
            if (self.peek() == &Tok::LBracket) != lists {
                return Err(ragged());
            }
            if lists {
                self.nested(depth + 1, dims, values)?;
            } else {
                values.push(self.signed_number()?);
            }
            count += 1;
            if self.eat(&Tok::RBracket) {
                break;
            }
            self.expect(Tok::Comma)?;
        }
        if dims.len() <= depth {
            dims.resize(depth + 1, None);
        }
        // Every leaf list must sit at the same depth.
        if !lists && dims.len() > depth + 1 {
            return Err(ragged());
        }
        match dims[depth] {
            None => dims[depth] = Some(count),
            Some(n) if n != count => return Err(ragged()),
            Some(_) => {}
        }
        Ok(())
    }

    fn signed_number(&mut self) -> PResult<f64> {
        let negative = self.eat(&Tok::Minus);
        let v = match self.peek().clone() {
            Tok::Number(v, _) => v,
            Tok::Ident(word) if word == "inf" => f64::INFINITY,
            Tok::Ident(word) if word == "nan" => f64::NAN,
            _ => return Err(self.unexpected("a number")),
        };
        self.bump();
        Ok(if negative { -v } else { v })
    }
}

fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
    let span = lhs.span.to(rhs.span);
    Expr {
        kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
        span,
    }
}
