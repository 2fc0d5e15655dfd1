//! Named tensors: tensors whose axes are identified by name rather than
//! position, with operations that lift over any extra axes.

pub mod autodiff;
pub mod axes;
pub mod error;
pub mod lang;
pub mod lift;
pub mod ops;
pub mod rng;
pub mod tensor;
pub mod zoo;

pub use axes::{Axis, AxisName, Record, Shape};
pub use error::{Error, Result};
pub use tensor::NamedTensor;
