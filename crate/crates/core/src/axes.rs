//! Axis names, axes, records and shapes.
//!
//! A [`Shape`] is a set of axes with pairwise-distinct names. Axis order never
//! carries meaning; wherever an order is needed (storage, printing, record
//! enumeration) the canonical order of [`AxisName`] is used. Indices are
//! 1-based at this boundary, as in `height(1)`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// The name of an axis, e.g. `height` or `seq'`.
///
/// Letters, digits and underscores, optionally followed by prime marks.
/// Names order by their unprimed base first and prime count second, so
/// `ax < ax' < ax'' < axb`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AxisName(Arc<str>);

impl AxisName {
    pub fn new(text: &str) -> Result<Self> {
        let base = text.trim_end_matches('\'');
        let valid = !base.is_empty() && base.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(Error::InvalidName(text.to_string()));
        }
        Ok(AxisName(Arc::from(text)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The name with all trailing prime marks removed.
    pub fn base(&self) -> &str {
        self.0.trim_end_matches('\'')
    }

    pub fn primes(&self) -> usize {
        self.0.len() - self.base().len()
    }

    /// The same name with one more prime mark.
    pub fn primed(&self) -> AxisName {
        AxisName(Arc::from(format!("{}'", self.0)))
    }
}

impl Ord for AxisName {
    fn cmp(&self, other: &Self) -> Ordering {
        self.base().cmp(other.base()).then(self.primes().cmp(&other.primes()))
    }
}

impl PartialOrd for AxisName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl TryFrom<&str> for AxisName {
    type Error = Error;

    fn try_from(text: &str) -> Result<Self> {
        AxisName::new(text)
    }
}

/// A named axis with index set `{1..size}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Axis {
    pub name: AxisName,
    pub size: usize,
}

impl Axis {
    pub fn new(name: &str, size: usize) -> Result<Self> {
        let name = AxisName::new(name)?;
        Axis::named(name, size)
    }

    pub fn named(name: AxisName, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyAxis(name));
        }
        Ok(Axis { name, size })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name, self.size)
    }
}

/// A set of named indices, e.g. `{height(1), width(3)}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Record(BTreeMap<AxisName, usize>);

impl Record {
    pub fn empty() -> Self {
        Record(BTreeMap::new())
    }

    /// Builds a record from `(name, index)` pairs; indices are 1-based.
    pub fn new<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (name, index) in pairs {
            let name = AxisName::new(name)?;
            if map.insert(name.clone(), index).is_some() {
                return Err(Error::DuplicateAxis(name));
            }
        }
        Ok(Record(map))
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.0.iter().find(|(k, _)| k.as_str() == name).map(|(_, &v)| v)
    }

    pub fn index(&self, name: &AxisName) -> Option<usize> {
        self.0.get(name).copied()
    }

    pub fn insert(&mut self, name: AxisName, index: usize) -> Option<usize> {
        self.0.insert(name, index)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &AxisName> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AxisName, usize)> {
        self.0.iter().map(|(k, &v)| (k, v))
    }

    /// `self ∪ other` for records over disjoint names.
    pub fn join(&self, other: &Record) -> Result<Record> {
        let mut out = self.0.clone();
        for (k, &v) in &other.0 {
            if out.insert(k.clone(), v).is_some() {
                return Err(Error::DuplicateAxis(k.clone()));
            }
        }
        Ok(Record(out))
    }

    /// True if every named index of `self` also appears in `other`.
    pub fn is_subrecord_of(&self, other: &Record) -> bool {
        self.0.iter().all(|(k, v)| other.0.get(k) == Some(v))
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}({v})")?;
        }
        f.write_str("}")
    }
}

/// A set of axes with pairwise-distinct names, stored in canonical order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Shape {
    axes: Vec<Axis>,
}

impl Shape {
    /// The empty shape; tensors over it are scalars.
    pub fn scalar() -> Self {
        Shape { axes: Vec::new() }
    }

    /// Builds a shape from `(name, size)` pairs given in any order.
    pub fn new<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Result<Self> {
        let axes = pairs
            .into_iter()
            .map(|(n, s)| Axis::new(n, s))
            .collect::<Result<Vec<_>>>()?;
        Shape::from_axes(axes)
    }

    pub fn from_axes(mut axes: Vec<Axis>) -> Result<Self> {
        axes.sort_by(|a, b| a.name.cmp(&b.name));
        for pair in axes.windows(2) {
            if pair[0].name == pair[1].name {
                return Err(Error::DuplicateAxis(pair[0].name.clone()));
            }
        }
        if let Some(a) = axes.iter().find(|a| a.size == 0) {
            return Err(Error::EmptyAxis(a.name.clone()));
        }
        Ok(Shape { axes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn names(&self) -> impl Iterator<Item = &AxisName> + '_ {
        self.axes.iter().map(|a| &a.name)
    }

    /// Number of axes.
    pub fn rank(&self) -> usize {
        self.axes.len()
    }

    pub fn is_scalar(&self) -> bool {
        self.axes.is_empty()
    }

    /// `|rec(S)|`, the product of axis sizes (1 for the empty shape).
    pub fn num_records(&self) -> usize {
        self.axes.iter().map(|a| a.size).product()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.axes.iter().position(|a| a.name.as_str() == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn size_of(&self, name: &str) -> Option<usize> {
        self.position(name).map(|i| self.axes[i].size)
    }

    pub fn axis(&self, name: &str) -> Result<&Axis> {
        self.position(name)
            .map(|i| &self.axes[i])
            .ok_or_else(|| self.missing(name))
    }

    pub(crate) fn missing(&self, name: &str) -> Error {
        match AxisName::new(name) {
            Ok(axis) => Error::MissingAxis {
                axis,
                shape: self.clone(),
            },
            Err(e) => e,
        }
    }

    /// Every name present in both shapes has the same size in both.
    pub fn compatible(&self, other: &Shape) -> bool {
        self.axes.iter().all(|a| match other.size_of(a.name.as_str()) {
            Some(n) => n == a.size,
            None => true,
        })
    }

    /// No name appears in both shapes.
    pub fn orthogonal(&self, other: &Shape) -> bool {
        self.axes.iter().all(|a| !other.contains(a.name.as_str()))
    }

    /// Set union of axes; shared names appear once.
    pub fn union(&self, other: &Shape) -> Result<Shape> {
        if !self.compatible(other) {
            return Err(Error::IncompatibleShapes {
                left: self.clone(),
                right: other.clone(),
            });
        }
        let mut axes = self.axes.clone();
        axes.extend(other.axes.iter().filter(|a| !self.contains(a.name.as_str())).cloned());
        Shape::from_axes(axes)
    }

    /// The axes of `self` whose names do not occur in `other`.
    pub fn difference(&self, other: &Shape) -> Shape {
        Shape {
            axes: self
                .axes
                .iter()
                .filter(|a| !other.contains(a.name.as_str()))
                .cloned()
                .collect(),
        }
    }

    /// The axes of `self` whose names also occur in `other`.
    pub fn intersection(&self, other: &Shape) -> Shape {
        Shape {
            axes: self
                .axes
                .iter()
                .filter(|a| other.contains(a.name.as_str()))
                .cloned()
                .collect(),
        }
    }

    /// Every axis of `self` appears in `other` with the same size.
    pub fn is_subset_of(&self, other: &Shape) -> bool {
        self.axes.iter().all(|a| other.size_of(a.name.as_str()) == Some(a.size))
    }

    /// The sub-shape on the given names, all of which must be present.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Shape> {
        let axes = names
            .iter()
            .map(|n| self.axis(n.as_ref()).cloned())
            .collect::<Result<Vec<_>>>()?;
        Shape::from_axes(axes)
    }

    /// The shape without the given names, all of which must be present.
    pub fn remove<S: AsRef<str>>(&self, names: &[S]) -> Result<Shape> {
        let removed = self.select(names)?;
        Ok(self.difference(&removed))
    }

    /// Adds an axis whose name must be fresh.
    pub fn with(&self, axis: Axis) -> Result<Shape> {
        if self.contains(axis.name.as_str()) {
            return Err(Error::NameCollision {
                axis: axis.name,
                shape: self.clone(),
            });
        }
        let mut axes = self.axes.clone();
        axes.push(axis);
        Shape::from_axes(axes)
    }

    /// Row-major strides in canonical order (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.axes.len()];
        for i in (0..self.axes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.axes[i + 1].size;
        }
        strides
    }

    /// Whether `r` is a member of `rec(self)`.
    pub fn contains_record(&self, r: &Record) -> bool {
        r.len() == self.axes.len()
            && self.axes.iter().all(|a| match r.index(&a.name) {
                Some(i) => i >= 1 && i <= a.size,
                None => false,
            })
    }

    /// Buffer offset of a record of this shape.
    pub fn offset_of(&self, r: &Record) -> Result<usize> {
        if !self.contains_record(r) {
            return Err(Error::InvalidRecord {
                record: r.clone(),
                shape: self.clone(),
            });
        }
        let strides = self.strides();
        Ok(self
            .axes
            .iter()
            .zip(strides)
            .map(|(a, s)| (r.index(&a.name).unwrap_or(1) - 1) * s)
            .sum())
    }

    /// The record stored at a buffer offset.
    pub fn record_at(&self, mut offset: usize) -> Record {
        let mut indices = vec![0; self.axes.len()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            indices[i] = offset % a.size + 1;
            offset /= a.size;
        }
        Record(
            self.axes
                .iter()
                .zip(indices)
                .map(|(a, i)| (a.name.clone(), i))
                .collect(),
        )
    }

    /// Enumerates `rec(self)` in odometer order, last axis fastest.
    pub fn records(&self) -> Records<'_> {
        Records {
            shape: self,
            next: 0,
            total: self.num_records(),
        }
    }

    /// Offsets into a buffer laid out by `self` for each record of `sub`,
    /// enumerated in `sub`'s canonical order. Names of `sub` absent from
    /// `self` contribute nothing, which is exactly broadcasting along them.
    pub fn offsets_of(&self, sub: &Shape) -> Vec<usize> {
        let strides = self.strides();
        let sub_strides: Vec<usize> = sub
            .axes
            .iter()
            .map(|a| self.position(a.name.as_str()).map_or(0, |p| strides[p]))
            .collect();
        let sizes: Vec<usize> = sub.axes.iter().map(|a| a.size).collect();
        let total = sub.num_records();
        let mut out = Vec::with_capacity(total);
        let mut counter = vec![0usize; sizes.len()];
        let mut offset = 0usize;
        for _ in 0..total {
            out.push(offset);
            for d in (0..sizes.len()).rev() {
                counter[d] += 1;
                offset += sub_strides[d];
                if counter[d] < sizes[d] {
                    break;
                }
                offset -= sub_strides[d] * sizes[d];
                counter[d] = 0;
            }
        }
        out
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.axes.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

/// Iterator over the records of a shape.
pub struct Records<'a> {
    shape: &'a Shape,
    next: usize,
    total: usize,
}

impl Iterator for Records<'_> {
    type Item = Record;

    fn next(&mut self) -> Option<Record> {
        if self.next >= self.total {
            return None;
        }
        let r = self.shape.record_at(self.next);
        self.next += 1;
        Some(r)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.total - self.next;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Records<'_> {}

/// `t|S`: the unique sub-record of `t` on exactly the names of `shape`.
pub fn restrict(t: &Record, shape: &Shape) -> Result<Record> {
    let mut out = Record::empty();
    for a in shape.axes() {
        match t.index(&a.name) {
            Some(i) if i >= 1 && i <= a.size => {
                out.insert(a.name.clone(), i);
            }
            Some(_) => {
                return Err(Error::InvalidRecord {
                    record: t.clone(),
                    shape: shape.clone(),
                })
            }
            None => {
                return Err(Error::MissingAxis {
                    axis: a.name.clone(),
                    shape: shape.clone(),
                })
            }
        }
    }
    Ok(out)
}

pub fn compatible(s: &Shape, t: &Shape) -> bool {
    s.compatible(t)
}

pub fn orthogonal(s: &Shape, t: &Shape) -> bool {
    s.orthogonal(t)
}

pub fn shape_union(s: &Shape, t: &Shape) -> Result<Shape> {
    s.union(t)
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    const NAMES: [&str; 5] = ["a", "b", "c", "d", "e"];

    fn arb_shape() -> impl Strategy<Value = Shape> {
        proptest::collection::btree_map(0usize..5, 1usize..4, 0..4)
            .prop_map(|m| Shape::new(m.into_iter().map(|(k, v)| (NAMES[k], v))).unwrap())
    }

    proptest! {
        #[test]
        fn symmetric_relations(s in arb_shape(), t in arb_shape()) {
            prop_assert_eq!(s.compatible(&t), t.compatible(&s));
            prop_assert_eq!(s.orthogonal(&t), t.orthogonal(&s));
            if s.orthogonal(&t) {
                prop_assert!(s.compatible(&t));
            }
        }

        #[test]
        fn enumeration_is_complete(s in arb_shape()) {
            let recs: std::collections::BTreeSet<Record> = s.records().collect();
            prop_assert_eq!(recs.len(), s.num_records());
            prop_assert!(recs.iter().all(|r| s.contains_record(r)));
        }

        #[test]
        fn nested_restriction(s in arb_shape(), keep in proptest::collection::vec(any::<bool>(), 5)) {
            for t in s.records().take(7) {
                let names: Vec<&str> = s.names().map(|n| n.as_str()).collect();
                let mid: Vec<&str> = names.iter().copied().zip(&keep).filter(|(_, k)| **k).map(|(n, _)| n).collect();
                let inner: Vec<&str> = mid.iter().copied().step_by(2).collect();
                let mid_shape = s.select(&mid).unwrap();
                let inner_shape = s.select(&inner).unwrap();
                let once = restrict(&t, &inner_shape).unwrap();
                let twice = restrict(&restrict(&t, &mid_shape).unwrap(), &inner_shape).unwrap();
                prop_assert!(once.is_subrecord_of(&t));
                prop_assert_eq!(once, twice);
            }
        }
    }
}
