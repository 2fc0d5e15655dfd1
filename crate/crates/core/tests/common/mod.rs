//! Shared test helpers: random inputs, finite differences, and reference
//! implementations written entry by entry from records.
#![allow(dead_code)]

use namedtensor::autodiff::{self, Env, Expr};
use namedtensor::axes::restrict;
use namedtensor::rng::SplitMix64;
use namedtensor::{NamedTensor, Record, Shape};

pub const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

pub fn shape(axes: &[(&str, usize)]) -> Shape {
    Shape::new(axes.iter().copied()).unwrap()
}

pub fn tensor(axes: &[(&str, usize)], data: Vec<f64>) -> NamedTensor {
    NamedTensor::from_ordered(axes, data).unwrap()
}

pub fn uniform(rng: &mut SplitMix64, s: &Shape) -> NamedTensor {
    rng.tensor(s.clone(), -1.0, 1.0)
}

/// `count` distinct names from `pool` not in `taken`.
pub fn pick_names<'a>(rng: &mut SplitMix64, pool: &[&'a str], count: usize, taken: &[&str]) -> Vec<&'a str> {
    let mut free: Vec<&str> = pool.iter().copied().filter(|n| !taken.contains(n)).collect();
    let mut out = Vec::new();
    for _ in 0..count.min(free.len()) {
        out.push(free.remove(rng.below(free.len())));
    }
    out
}

/// A shape over `names` with sizes in `1..=max`.
pub fn random_shape(rng: &mut SplitMix64, names: &[&str], max: usize) -> Shape {
    let pairs: Vec<(&str, usize)> = names.iter().map(|n| (*n, 1 + rng.below(max))).collect();
    Shape::new(pairs).unwrap()
}

/// The entry of `t` at the part of `r` naming its axes.
pub fn at(t: &NamedTensor, r: &Record) -> f64 {
    t.get(&restrict(r, t.shape()).unwrap()).unwrap()
}

pub fn join(r: &Record, s: &Record) -> Record {
    r.join(s).unwrap()
}

fn with(r: &Record, name: &str, index: usize) -> Record {
    let mut out = Record::empty();
    for (n, i) in r.iter() {
        out.insert(n.clone(), i);
    }
    out.insert(namedtensor::AxisName::new(name).unwrap(), index);
    out
}

/// Applies `fold` to every slice over `axes`.
pub fn reduce_ref(a: &NamedTensor, axes: &[&str], fold: impl Fn(&[f64]) -> f64) -> NamedTensor {
    let reduced = a.shape().select(axes).unwrap();
    let out = a.shape().difference(&reduced);
    NamedTensor::from_fn(out, |r| {
        let values: Vec<f64> = reduced.records().map(|s| a.get(&join(r, &s)).unwrap()).collect();
        fold(&values)
    })
}

pub fn sum(v: &[f64]) -> f64 {
    v.iter().sum()
}

pub fn mean(v: &[f64]) -> f64 {
    sum(v) / v.len() as f64
}

pub fn var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

pub fn min(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `f(a[r], b[r])` over the union of the two shapes.
pub fn zip_ref(a: &NamedTensor, b: &NamedTensor, f: impl Fn(f64, f64) -> f64) -> NamedTensor {
    let out = a.shape().union(b.shape()).unwrap();
    NamedTensor::from_fn(out, |r| f(at(a, r), at(b, r)))
}

pub fn contract_ref(a: &NamedTensor, b: &NamedTensor, axes: &[&str]) -> NamedTensor {
    let all = a.shape().union(b.shape()).unwrap();
    let summed = all.select(axes).unwrap();
    NamedTensor::from_fn(all.difference(&summed), |r| {
        summed
            .records()
            .map(|s| {
                let rs = join(r, &s);
                at(a, &rs) * at(b, &rs)
            })
            .sum()
    })
}

/// Applies `f` to each slice over `axes`, producing a slice of the same shape.
pub fn slice_map_ref(a: &NamedTensor, axes: &[&str], f: impl Fn(&[f64]) -> Vec<f64>) -> NamedTensor {
    let inner = a.shape().select(axes).unwrap();
    let outer = a.shape().difference(&inner);
    let mut entries = Vec::new();
    for r in outer.records() {
        let records: Vec<Record> = inner.records().map(|s| join(&r, &s)).collect();
        let values: Vec<f64> = records.iter().map(|rs| a.get(rs).unwrap()).collect();
        entries.extend(records.into_iter().zip(f(&values)));
    }
    NamedTensor::from_entries(a.shape().clone(), entries).unwrap()
}

pub fn softmax_slice(v: &[f64]) -> Vec<f64> {
    let m = max(v);
    let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    let s = sum(&e);
    e.iter().map(|x| x / s).collect()
}

/// Uniform mass over the entries equal to `pick(v)`.
pub fn arg_slice(v: &[f64], pick: fn(&[f64]) -> f64) -> Vec<f64> {
    let m = pick(v);
    let ties = v.iter().filter(|&&x| x == m).count() as f64;
    v.iter().map(|&x| if x == m { 1.0 / ties } else { 0.0 }).collect()
}

pub fn standardize_slice(v: &[f64], eps: f64) -> Vec<f64> {
    let (m, s) = (mean(v), (var(v) + eps).sqrt());
    v.iter().map(|x| (x - m) / s).collect()
}

pub fn rename_ref(a: &NamedTensor, old: &str, new: &str) -> NamedTensor {
    let pairs: Vec<(&str, usize)> = a
        .shape()
        .axes()
        .iter()
        .map(|ax| (if ax.name.as_str() == old { new } else { ax.name.as_str() }, ax.size))
        .collect();
    NamedTensor::from_fn(Shape::new(pairs).unwrap(), |r| {
        let i = r.get(new).unwrap();
        let mut back = Record::empty();
        for (n, j) in r.iter().filter(|(n, _)| n.as_str() != new) {
            back.insert(n.clone(), j);
        }
        a.get(&with(&back, old, i)).unwrap()
    })
}

/// Merged index `1 + Σ (i_p − 1)·stride_p`, first part slowest.
pub fn merge_ref(a: &NamedTensor, parts: &[&str], into: &str) -> NamedTensor {
    let sizes: Vec<usize> = parts.iter().map(|p| a.shape().size_of(p).unwrap()).collect();
    let total: usize = sizes.iter().product();
    let rest = a.shape().remove(parts).unwrap();
    let out = rest.with(namedtensor::Axis::new(into, total).unwrap()).unwrap();
    NamedTensor::from_fn(out, |r| {
        let mut k = r.get(into).unwrap() - 1;
        let mut src = restrict(r, &rest).unwrap();
        for (p, n) in parts.iter().zip(&sizes).rev() {
            src = with(&src, p, k % n + 1);
            k /= n;
        }
        a.get(&src).unwrap()
    })
}

/// `Y[outer(o), inner(i)] = X[src((o − 1)·|inner| + i)]`.
pub fn split_ref(a: &NamedTensor, src: &str, outer: (&str, usize), inner: (&str, usize)) -> NamedTensor {
    let rest = a.shape().remove(&[src]).unwrap();
    let out = rest
        .with(namedtensor::Axis::new(outer.0, outer.1).unwrap())
        .unwrap()
        .with(namedtensor::Axis::new(inner.0, inner.1).unwrap())
        .unwrap();
    NamedTensor::from_fn(out, |r| {
        let (o, i) = (r.get(outer.0).unwrap(), r.get(inner.0).unwrap());
        a.get(&with(&restrict(r, &rest).unwrap(), src, (o - 1) * inner.1 + i))
            .unwrap()
    })
}

/// `Y[seq(i), kernel(j)] = X[seq(i + j − 1)]`.
pub fn unroll_ref(a: &NamedTensor, seq: &str, kernel: (&str, usize)) -> NamedTensor {
    let n = a.shape().size_of(seq).unwrap();
    let rest = a.shape().remove(&[seq]).unwrap();
    let out = rest
        .with(namedtensor::Axis::new(seq, n + 1 - kernel.1).unwrap())
        .unwrap()
        .with(namedtensor::Axis::new(kernel.0, kernel.1).unwrap())
        .unwrap();
    NamedTensor::from_fn(out, |r| {
        let (i, j) = (r.get(seq).unwrap(), r.get(kernel.0).unwrap());
        a.get(&with(&restrict(r, &rest).unwrap(), seq, i + j - 1)).unwrap()
    })
}

/// `Y[r] = A[r, ax(I[r])]`.
pub fn index_ref(a: &NamedTensor, ax: &str, idx: &NamedTensor) -> NamedTensor {
    let rest = a.shape().remove(&[ax]).unwrap();
    let out = rest.union(idx.shape()).unwrap();
    NamedTensor::from_fn(out, |r| {
        let i = at(idx, r) as usize;
        a.get(&with(&restrict(r, &rest).unwrap(), ax, i)).unwrap()
    })
}

/// The `k` largest values along `ax`, over a new axis `k_name`.
pub fn maxk_ref(a: &NamedTensor, ax: &str, k_name: &str, k: usize) -> NamedTensor {
    let rest = a.shape().remove(&[ax]).unwrap();
    let n = a.shape().size_of(ax).unwrap();
    let out = rest.with(namedtensor::Axis::new(k_name, k).unwrap()).unwrap();
    NamedTensor::from_fn(out, |r| {
        let base = restrict(r, &rest).unwrap();
        let mut v: Vec<f64> = (1..=n).map(|i| a.get(&with(&base, ax, i)).unwrap()).collect();
        v.sort_by(|x, y| y.total_cmp(x));
        v[r.get(k_name).unwrap() - 1]
    })
}

/// `|a − b| / max(1, |a|, |b|)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Central-difference check of the reverse-mode vector-Jacobian product
/// against a random cotangent. `None` when the input sits within `1e-4` of a
/// kink or tie.
pub fn fd_check(e: &Expr, x: &str, env: &Env, rng: &mut SplitMix64) -> Option<f64> {
    let trace = autodiff::trace(e, env).unwrap();
    if autodiff::kink_margin(e, &trace) < 1e-4 {
        return None;
    }
    let w = uniform(rng, trace.value.shape());
    let analytic = autodiff::vjp(e, x, env, &w).unwrap();
    let base = env.lookup(x).unwrap().clone();
    let objective = |t: &NamedTensor| {
        let out = autodiff::evaluate(e, &env.clone().bind(x, t.clone())).unwrap();
        out.data().iter().zip(w.data()).map(|(a, b)| a * b).sum::<f64>()
    };
    let mut worst = 0.0f64;
    for i in 0..base.data().len() {
        let h = 1e-6 * (1.0 + base.data()[i].abs());
        let bump = |d: f64| {
            let mut v = base.data().to_vec();
            v[i] += d;
            NamedTensor::new(base.shape().clone(), v).unwrap()
        };
        let fd = (objective(&bump(h)) - objective(&bump(-h))) / (2.0 * h);
        worst = worst.max(rel_err(analytic.data()[i], fd));
    }
    Some(worst)
}
