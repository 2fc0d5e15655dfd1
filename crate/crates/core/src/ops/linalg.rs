use crate::axes::Shape;
use crate::error::{Error, Result};
use crate::lift::{self, Signature};
use crate::tensor::NamedTensor;

use super::name;

/// Pivots at or below this fraction of the largest entry count as zero.
const SINGULAR_TOLERANCE: f64 = 1e-12;

/// Row-major LU with partial pivoting, in place. Returns the permutation sign,
/// the row permutation and whether some pivot was numerically zero.
fn lu(m: &mut [f64], n: usize) -> (f64, Vec<usize>, bool) {
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let threshold = SINGULAR_TOLERANCE * scale;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut singular = scale == 0.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .expect("nonempty column");
        if pivot != col {
            for j in 0..n {
                m.swap(col * n + j, pivot * n + j);
            }
            perm.swap(col, pivot);
            sign = -sign;
        }
        let p = m[col * n + col];
        if p.abs() <= threshold {
            singular = true;
            if p == 0.0 {
                continue;
            }
        }
        for i in col + 1..n {
            let factor = m[i * n + col] / p;
            m[i * n + col] = factor;
            for j in col + 1..n {
                m[i * n + j] -= factor * m[col * n + j];
            }
        }
    }
    (sign, perm, singular)
}

/// Determinant of an `n × n` row-major matrix.
pub fn lu_det(matrix: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut m = matrix.to_vec();
    let (sign, _, _) = lu(&mut m, n);
    (0..n).fold(sign, |acc, i| acc * m[i * n + i])
}

/// Inverse of an `n × n` row-major matrix, or `None` if it is singular.
pub fn lu_inverse(matrix: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = matrix.to_vec();
    let (_, perm, singular) = lu(&mut m, n);
    if singular {
        return None;
    }
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        // Solve L U x = P e_col.
        let mut x: Vec<f64> = perm.iter().map(|&r| if r == col { 1.0 } else { 0.0 }).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= m[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= m[i * n + j] * x[j];
            }
            x[i] /= m[i * n + i];
        }
        for i in 0..n {
            inv[i * n + col] = x[i];
        }
    }
    Some(inv)
}

fn square(a: &Shape, rows: &str, cols: &str) -> Result<Shape> {
    let r = a.axis(rows)?;
    let c = a.axis(cols)?;
    if rows == cols {
        return Err(Error::DuplicateAxis(name(rows)?));
    }
    if r.size != c.size {
        return Err(Error::SizeMismatch(format!("{r} and {c} do not form a square matrix")));
    }
    a.select(&[rows, cols])
}

/// Whether canonical storage of `base` is already row-major for `rows`.
fn matrix_order(base: &Shape, rows: &str) -> bool {
    base.axes()[0].name.as_str() == rows
}

fn transpose(values: &[f64], n: usize) -> Vec<f64> {
    (0..n * n).map(|k| values[(k % n) * n + k / n]).collect()
}

fn det_signature(a: &Shape, rows: &str, cols: &str) -> Result<Signature> {
    Ok(Signature::new(vec![square(a, rows, cols)?], Shape::scalar()))
}

/// Determinant of the matrix with `rows` and `cols`, lifted over other axes.
pub fn det(a: &NamedTensor, rows: &str, cols: &str) -> Result<NamedTensor> {
    let sig = det_signature(a.shape(), rows, cols)?;
    let n = sig.inputs[0].axes()[0].size;
    // det Mᵀ = det M, so storage order does not matter.
    lift::extend_unary(&sig, |x| Ok(NamedTensor::scalar(lu_det(x.data(), n))), a)
}

pub fn det_shape(a: &Shape, rows: &str, cols: &str) -> Result<Shape> {
    lift::extended_shape(&det_signature(a, rows, cols)?, &[a])
}

/// `inv(A)_{rows(i), cols(j)} = (M⁻¹)_{ij}` where `M_{ij} = A_{rows(i), cols(j)}`.
pub fn inv(a: &NamedTensor, rows: &str, cols: &str) -> Result<NamedTensor> {
    let base = square(a.shape(), rows, cols)?;
    let sig = Signature::new(vec![base.clone()], base.clone());
    let n = base.axes()[0].size;
    let row_major = matrix_order(&base, rows);
    lift::extend_unary(
        &sig,
        |x| {
            let m = if row_major {
                x.data().to_vec()
            } else {
                transpose(x.data(), n)
            };
            let inverse = lu_inverse(&m, n).ok_or_else(|| Error::SingularMatrix {
                rows: name(rows).expect("valid name"),
                cols: name(cols).expect("valid name"),
            })?;
            let data = if row_major { inverse } else { transpose(&inverse, n) };
            NamedTensor::new(base.clone(), data)
        },
        a,
    )
}

pub fn inv_shape(a: &Shape, rows: &str, cols: &str) -> Result<Shape> {
    square(a, rows, cols)?;
    Ok(a.clone())
}
