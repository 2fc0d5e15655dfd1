use crate::axes::{AxisName, Record, Shape};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Variants carry enough context (offending names and shapes) for the
/// language front end to build a readable diagnostic without re-deriving it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid axis name {0:?}")]
    InvalidName(String),

    #[error("axis {0} must have a positive size")]
    EmptyAxis(AxisName),

    #[error("axis {0} appears more than once")]
    DuplicateAxis(AxisName),

    #[error("missing axis {axis} in shape {shape}")]
    MissingAxis { axis: AxisName, shape: Shape },

    #[error("incompatible shapes {left} and {right}")]
    IncompatibleShapes { left: Shape, right: Shape },

    #[error("record {record} is not a record of shape {shape}")]
    InvalidRecord { record: Record, shape: Shape },

    #[error("no entry for record {0}")]
    MissingEntry(Record),

    #[error("more than one entry for record {0}")]
    DuplicateEntry(Record),

    #[error("extension axis {axis} collides with {shape}")]
    ExtensionCollision { axis: AxisName, shape: Shape },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("axis name {axis} already used in {shape}")]
    NameCollision { axis: AxisName, shape: Shape },

    #[error("every entry along {0} is -inf")]
    AllMasked(String),

    #[error("index {value} out of range for axis {axis}[{size}]")]
    IndexOutOfRange { value: f64, axis: AxisName, size: usize },

    #[error("matrix over ({rows}, {cols}) is singular")]
    SingularMatrix { rows: AxisName, cols: AxisName },

    #[error("unbound variable {0}")]
    UnboundVariable(String),

    #[error("axis {0} has no declared size")]
    UndeclaredAxis(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: Shape, found: Shape },

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("buffer holds {found} values but shape {shape} needs {expected}")]
    DataLength {
        shape: Shape,
        expected: usize,
        found: usize,
    },

    #[error("{0} is not differentiable")]
    NotDifferentiable(String),

    #[error("malformed tensor text: {0}")]
    Format(String),
}

impl Error {
    /// Stable short name of the variant, used in diagnostics and tests.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidName(_) => "InvalidName",
            Error::EmptyAxis(_) => "EmptyAxis",
            Error::DuplicateAxis(_) => "DuplicateAxis",
            Error::MissingAxis { .. } => "MissingAxis",
            Error::IncompatibleShapes { .. } => "IncompatibleShapes",
            Error::InvalidRecord { .. } => "InvalidRecord",
            Error::MissingEntry(_) => "MissingEntry",
            Error::DuplicateEntry(_) => "DuplicateEntry",
            Error::ExtensionCollision { .. } => "ExtensionCollision",
            Error::SizeMismatch(_) => "SizeMismatch",
            Error::NameCollision { .. } => "NameCollision",
            Error::AllMasked(_) => "AllMasked",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::UnboundVariable(_) => "UnboundVariable",
            Error::UndeclaredAxis(_) => "UndeclaredAxis",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::DivisionByZero(_) => "DivisionByZero",
            Error::DataLength { .. } => "DataLength",
            Error::NotDifferentiable(_) => "NotDifferentiable",
            Error::Format(_) => "Format",
        }
    }

    /// True for errors that a static shape check is expected to catch.
    pub fn is_shape_error(&self) -> bool {
        !matches!(
            self,
            Error::AllMasked(_)
                | Error::IndexOutOfRange { .. }
                | Error::SingularMatrix { .. }
                | Error::DivisionByZero(_)
                | Error::NotDifferentiable(_)
                | Error::Format(_)
        )
    }
}
