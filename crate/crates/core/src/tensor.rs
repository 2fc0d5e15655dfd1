//! Dense named tensors over `f64`.

use std::collections::HashMap;
use std::fmt;

use crate::axes::{Axis, Record, Shape};
use crate::error::{Error, Result};

/// A mapping from the records of a shape to `f64` values.
///
/// Values are stored densely in canonical record-enumeration order, so two
/// tensors compare equal exactly when their shapes agree and every record
/// maps to the same value, regardless of how either was constructed. A tensor
/// over the empty shape is a scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedTensor {
    shape: Shape,
    data: Vec<f64>,
}

impl NamedTensor {
    /// Wraps a buffer already laid out in canonical order.
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        let expected = shape.num_records();
        if data.len() != expected {
            return Err(Error::DataLength {
                shape,
                expected,
                found: data.len(),
            });
        }
        Ok(NamedTensor { shape, data })
    }

    pub fn scalar(value: f64) -> Self {
        NamedTensor {
            shape: Shape::scalar(),
            data: vec![value],
        }
    }

    pub fn full(shape: Shape, value: f64) -> Self {
        let n = shape.num_records();
        NamedTensor {
            shape,
            data: vec![value; n],
        }
    }

    pub fn zeros(shape: Shape) -> Self {
        NamedTensor::full(shape, 0.0)
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(&Record) -> f64) -> Self {
        let data = shape.records().map(|r| f(&r)).collect();
        NamedTensor { shape, data }
    }

    /// Builds a tensor from exactly one entry per record of `shape`.
    pub fn from_entries(shape: Shape, entries: impl IntoIterator<Item = (Record, f64)>) -> Result<Self> {
        let mut slots: Vec<Option<f64>> = vec![None; shape.num_records()];
        for (record, value) in entries {
            let offset = shape.offset_of(&record)?;
            if slots[offset].replace(value).is_some() {
                return Err(Error::DuplicateEntry(record));
            }
        }
        let data = slots
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::MissingEntry(shape.record_at(i))))
            .collect::<Result<Vec<_>>>()?;
        Ok(NamedTensor { shape, data })
    }

    /// Builds a tensor from a row-major buffer whose axis order is given
    /// explicitly (first axis slowest).
    pub fn from_ordered(axes: &[(&str, usize)], data: Vec<f64>) -> Result<Self> {
        let shape = Shape::new(axes.iter().copied())?;
        if data.len() != shape.num_records() {
            return Err(Error::DataLength {
                expected: shape.num_records(),
                found: data.len(),
                shape,
            });
        }
        let order: Vec<&str> = axes.iter().map(|(n, _)| *n).collect();
        let source = ordered_layout(&shape, &order)?;
        // Each canonical record's offset in the caller's layout.
        let offsets = source.offsets_of(&shape);
        let mut out = vec![0.0; data.len()];
        for (slot, src) in out.iter_mut().zip(offsets) {
            *slot = data[src];
        }
        NamedTensor::new(shape, out)
    }

    /// The values as a row-major buffer in the given axis order.
    pub fn to_ordered(&self, order: &[&str]) -> Result<Vec<f64>> {
        if order.len() != self.shape.rank() {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                found: self.shape.select(order)?,
            });
        }
        let layout = ordered_layout(&self.shape, order)?;
        let mut out = vec![0.0; self.data.len()];
        for (dst, v) in layout.offsets_of(&self.shape).into_iter().zip(&self.data) {
            out[dst] = *v;
        }
        Ok(out)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn into_parts(self) -> (Shape, Vec<f64>) {
        (self.shape, self.data)
    }

    /// The value of a scalar tensor.
    pub fn as_scalar(&self) -> Option<f64> {
        self.shape.is_scalar().then(|| self.data[0])
    }

    /// `A_r` for a full record `r`.
    pub fn get(&self, r: &Record) -> Result<f64> {
        Ok(self.data[self.shape.offset_of(r)?])
    }

    /// `A_s` for a record over a subset of the names: a fresh tensor over the
    /// remaining axes.
    pub fn partial_index(&self, s: &Record) -> Result<NamedTensor> {
        let strides = self.shape.strides();
        let mut base = 0;
        for (name, index) in s.iter() {
            let pos = self.shape.position(name.as_str()).ok_or_else(|| Error::InvalidRecord {
                record: s.clone(),
                shape: self.shape.clone(),
            })?;
            let size = self.shape.axes()[pos].size;
            if index == 0 || index > size {
                return Err(Error::InvalidRecord {
                    record: s.clone(),
                    shape: self.shape.clone(),
                });
            }
            base += (index - 1) * strides[pos];
        }
        let rest: Vec<Axis> = self
            .shape
            .axes()
            .iter()
            .filter(|a| s.index(&a.name).is_none())
            .cloned()
            .collect();
        let rest = Shape::from_axes(rest)?;
        let data = self
            .shape
            .offsets_of(&rest)
            .into_iter()
            .map(|o| self.data[base + o])
            .collect();
        NamedTensor::new(rest, data)
    }

    /// Iterates `(record, value)` pairs in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (Record, f64)> + '_ {
        self.shape.records().zip(self.data.iter().copied())
    }

    /// Applies a scalar function at every record.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> NamedTensor {
        NamedTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Largest absolute entrywise difference between two same-shaped tensors.
    pub fn max_abs_diff(&self, other: &NamedTensor) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                found: other.shape.clone(),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() })
            .fold(0.0, f64::max))
    }

    /// Renders the tensor text format: a `shape:` header line in canonical
    /// order followed by the values in record order, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = shape_header(&self.shape);
        out.push('\n');
        let row = self.shape.axes().last().map_or(1, |a| a.size);
        for chunk in self.data.chunks(row) {
            let line: Vec<String> = chunk.iter().map(|v| format_value(*v)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the tensor text format. Lines starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("missing shape header".into()))?;
        let spec = header
            .strip_prefix("shape:")
            .ok_or_else(|| Error::Format(format!("expected `shape:` header, found {header:?}")))?;
        let mut pairs = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, size) = part
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("expected name=size, found {part:?}")))?;
            let size: usize = size
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad axis size in {part:?}")))?;
            pairs.push((name.trim(), size));
        }
        let shape = Shape::new(pairs)?;
        let data = lines
            .flat_map(str::split_whitespace)
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::Format(format!("bad value {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        NamedTensor::new(shape, data)
    }
}

/// The `shape: name=size, ...` header line of the text format, without the
/// newline.
pub fn shape_header(shape: &Shape) -> String {
    let mut out = String::from("shape:");
    for (i, a) in shape.axes().iter().enumerate() {
        out.push_str(if i == 0 { " " } else { ", " });
        out.push_str(&format!("{}={}", a.name, a.size));
    }
    out
}

/// Formats a value with 17 significant digits, which round-trips every `f64`.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

impl fmt::Display for NamedTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl From<f64> for NamedTensor {
    fn from(v: f64) -> Self {
        NamedTensor::scalar(v)
    }
}

/// Strides for `shape` laid out in `order` rather than canonical order.
fn ordered_layout(shape: &Shape, order: &[&str]) -> Result<OrderedLayout> {
    if order.len() != shape.rank() {
        return Err(Error::ShapeMismatch {
            expected: shape.clone(),
            found: shape.select(order)?,
        });
    }
    let mut sizes = Vec::with_capacity(order.len());
    let mut seen = HashMap::new();
    for (i, name) in order.iter().enumerate() {
        let axis = shape.axis(name)?;
        if seen.insert(axis.name.clone(), i).is_some() {
            return Err(Error::DuplicateAxis(axis.name.clone()));
        }
        sizes.push(axis.size);
    }
    Ok(OrderedLayout { seen, sizes })
}

/// Row-major layout over an explicit axis order.
struct OrderedLayout {
    seen: HashMap<crate::axes::AxisName, usize>,
    sizes: Vec<usize>,
}

impl OrderedLayout {
    /// Offsets in this layout of each record of `shape`, in canonical order.
    fn offsets_of(&self, shape: &Shape) -> Vec<usize> {
        let mut strides = vec![1usize; self.sizes.len()];
        for i in (0..self.sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.sizes[i + 1];
        }
        let axis_strides: Vec<usize> = shape.axes().iter().map(|a| strides[self.seen[&a.name]]).collect();
        shape
            .records()
            .map(|r| {
                shape
                    .axes()
                    .iter()
                    .zip(&axis_strides)
                    .map(|(a, s)| (r.index(&a.name).unwrap_or(1) - 1) * s)
                    .sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(pairs: &[(&str, usize)]) -> Record {
        Record::new(pairs.iter().copied()).unwrap()
    }

    /// The 3×3 matrix used throughout the worked examples.
    fn matrix_a() -> NamedTensor {
        NamedTensor::from_ordered(&[("height", 3), ("width", 3)], vec![3., 1., 4., 1., 5., 9., 2., 6., 5.]).unwrap()
    }

    #[test]
    fn from_entries_examples() {
        let s = NamedTensor::from_entries(Shape::scalar(), [(Record::empty(), 5.0)]).unwrap();
        assert_eq!(s.as_scalar(), Some(5.0));

        let shape = Shape::new([("height", 3), ("width", 3)]).unwrap();
        let values = [[3., 1., 4.], [1., 5., 9.], [2., 6., 5.]];
        let entries: Vec<_> = shape
            .records()
            .map(|r| {
                let (h, w) = (r.get("height").unwrap(), r.get("width").unwrap());
                (r, values[h - 1][w - 1])
            })
            .collect();
        let a = NamedTensor::from_entries(shape, entries).unwrap();
        assert_eq!(a.get(&rec(&[("height", 1), ("width", 3)])).unwrap(), 4.0);
        assert_eq!(a, matrix_a());

        let err = NamedTensor::from_entries(Shape::new([("height", 2)]).unwrap(), [(rec(&[("height", 1)]), 1.0)])
            .unwrap_err();
        assert_eq!(err.kind(), "MissingEntry");
        let err = NamedTensor::from_entries(
            Shape::new([("height", 1)]).unwrap(),
            [(rec(&[("height", 1)]), 1.0), (rec(&[("height", 1)]), 2.0)],
        )
        .unwrap_err();
        assert_eq!(err.kind(), "DuplicateEntry");
    }

    #[test]
    fn get_is_order_independent() {
        let a = matrix_a();
        assert_eq!(a.get(&rec(&[("height", 1), ("width", 3)])).unwrap(), 4.0);
        assert_eq!(a.get(&rec(&[("width", 3), ("height", 1)])).unwrap(), 4.0);
        let err = a.get(&rec(&[("height", 4), ("width", 1)])).unwrap_err();
        assert_eq!(err.kind(), "InvalidRecord");
    }

    #[test]
    fn transposed_construction_is_equal() {
        let t = NamedTensor::from_ordered(&[("width", 3), ("height", 3)], vec![3., 1., 2., 1., 5., 6., 4., 9., 5.])
            .unwrap();
        assert_eq!(t, matrix_a());
        assert_eq!(
            t.to_ordered(&["width", "height"]).unwrap(),
            vec![3., 1., 2., 1., 5., 6., 4., 9., 5.]
        );
    }

    #[test]
    fn partial_index_examples() {
        let a = matrix_a();
        let row = a.partial_index(&rec(&[("height", 1)])).unwrap();
        assert_eq!(row.shape(), &Shape::new([("width", 3)]).unwrap());
        assert_eq!(row.data(), &[3., 1., 4.]);
        let col = a.partial_index(&rec(&[("width", 3)])).unwrap();
        assert_eq!(col.shape(), &Shape::new([("height", 3)]).unwrap());
        assert_eq!(col.data(), &[4., 9., 5.]);
        assert_eq!(a.partial_index(&Record::empty()).unwrap(), a);
        assert!(a.partial_index(&rec(&[("chans", 1)])).is_err());
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let t = NamedTensor::from_ordered(&[("b", 2), ("a", 2)], vec![0.1, -0.0, f64::NEG_INFINITY, 1e-300]).unwrap();
        let text = t.to_text();
        assert!(text.starts_with("shape: a=2, b=2\n"));
        let back = NamedTensor::from_text(&text).unwrap();
        for (x, y) in t.data().iter().zip(back.data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        let s = NamedTensor::scalar(1.0 / 3.0);
        assert_eq!(NamedTensor::from_text(&s.to_text()).unwrap(), s);
        assert_eq!(s.to_text(), "shape:\n3.3333333333333331e-1\n");
    }
}
