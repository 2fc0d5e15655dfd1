use std::fmt;

use crate::axes::Shape;
use crate::error::Result;
use crate::lift;
use crate::tensor::NamedTensor;

/// Scalar functions applied elementwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryFn {
    Neg,
    Exp,
    Log,
    Sqrt,
    Sigmoid,
    Relu,
    Tanh,
    Abs,
    Sin,
    Cos,
}

impl UnaryFn {
    pub const ALL: [UnaryFn; 10] = [
        UnaryFn::Neg,
        UnaryFn::Exp,
        UnaryFn::Log,
        UnaryFn::Sqrt,
        UnaryFn::Sigmoid,
        UnaryFn::Relu,
        UnaryFn::Tanh,
        UnaryFn::Abs,
        UnaryFn::Sin,
        UnaryFn::Cos,
    ];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            UnaryFn::Neg => -x,
            UnaryFn::Exp => x.exp(),
            UnaryFn::Log => x.ln(),
            UnaryFn::Sqrt => x.sqrt(),
            UnaryFn::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            UnaryFn::Relu => x.max(0.0),
            UnaryFn::Tanh => x.tanh(),
            UnaryFn::Abs => x.abs(),
            UnaryFn::Sin => x.sin(),
            UnaryFn::Cos => x.cos(),
        }
    }

    /// `f'(x)` given `x` and `y = f(x)`. One-sided at kinks: `relu'(0) = 0`,
    /// `abs'(0) = 0`.
    pub fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            UnaryFn::Neg => -1.0,
            UnaryFn::Exp => y,
            UnaryFn::Log => 1.0 / x,
            UnaryFn::Sqrt => 0.5 / y,
            UnaryFn::Sigmoid => y * (1.0 - y),
            UnaryFn::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            UnaryFn::Tanh => 1.0 - y * y,
            UnaryFn::Abs => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            UnaryFn::Sin => x.cos(),
            UnaryFn::Cos => -x.sin(),
        }
    }

    /// Points where the function is not differentiable.
    pub fn kinks(self) -> &'static [f64] {
        match self {
            UnaryFn::Relu | UnaryFn::Abs => &[0.0],
            _ => &[],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Neg => "neg",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Sigmoid => "sigmoid",
            UnaryFn::Relu => "relu",
            UnaryFn::Tanh => "tanh",
            UnaryFn::Abs => "abs",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<UnaryFn> {
        UnaryFn::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for UnaryFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Binary scalar operators, broadcast over the union of operand shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    /// 1 where the operands are equal, 0 elsewhere.
    Eq,
}

impl BinaryOp {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
            BinaryOp::Pow => a.powf(b),
            BinaryOp::Eq => {
                if a == b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `(∂/∂a, ∂/∂b)` at `(a, b)` with `y = a op b`.
    pub fn partials(self, a: f64, b: f64, y: f64) -> (f64, f64) {
        match self {
            BinaryOp::Add => (1.0, 1.0),
            BinaryOp::Sub => (1.0, -1.0),
            BinaryOp::Mul => (b, a),
            BinaryOp::Div => (1.0 / b, -a / (b * b)),
            BinaryOp::Pow => {
                let da = if b == 0.0 { 0.0 } else { b * a.powf(b - 1.0) };
                let db = if a > 0.0 { y * a.ln() } else { 0.0 };
                (da, db)
            }
            BinaryOp::Eq => (0.0, 0.0),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
            BinaryOp::Eq => "eq",
        }
    }
}

/// Applies any scalar function at every record.
pub fn map_elementwise(a: &NamedTensor, f: impl Fn(f64) -> f64) -> NamedTensor {
    lift::map(a, f)
}

pub fn unary(a: &NamedTensor, f: UnaryFn) -> NamedTensor {
    lift::map(a, |x| f.apply(x))
}

pub fn binary(a: &NamedTensor, b: &NamedTensor, op: BinaryOp) -> Result<NamedTensor> {
    lift::zip(a, b, |x, y| op.apply(x, y))
}

pub fn binary_shape(a: &Shape, b: &Shape) -> Result<Shape> {
    a.union(b)
}

pub fn add(a: &NamedTensor, b: &NamedTensor) -> Result<NamedTensor> {
    binary(a, b, BinaryOp::Add)
}

pub fn sub(a: &NamedTensor, b: &NamedTensor) -> Result<NamedTensor> {
    binary(a, b, BinaryOp::Sub)
}

pub fn mul(a: &NamedTensor, b: &NamedTensor) -> Result<NamedTensor> {
    binary(a, b, BinaryOp::Mul)
}

pub fn div(a: &NamedTensor, b: &NamedTensor) -> Result<NamedTensor> {
    binary(a, b, BinaryOp::Div)
}

pub fn pow(a: &NamedTensor, b: &NamedTensor) -> Result<NamedTensor> {
    binary(a, b, BinaryOp::Pow)
}
