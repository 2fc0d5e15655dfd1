//! Expressions over named tensors and their derivatives.
//!
//! An [`Expr`] is a tree of lifted operations. Its shape is inferred node by
//! node with the same rules the operations enforce at run time. Derivatives
//! are computed by reverse accumulation: [`vjp`] pulls a cotangent back to a
//! variable, and [`jacobian`] assembles the full derivative tensor from one
//! reverse pass per output record, priming output names that collide with
//! input names.

mod backward;
mod eval;
mod expr;
mod infer;
mod jacobian;

pub use backward::{grad, gradients, vjp};
pub use eval::{evaluate, kink_margin, trace, Trace};
pub use expr::{AxisSpec, Env, Expr, ExprKind, Scope, ShapeEnv, Span};
pub use infer::{infer_all, infer_shape};
pub use jacobian::{jacobian, lifted_derivative_check, priming, Derivative, LiftCheck};
