//! Dense row-major matrices over either scalar backend. Sizes here are tiny
//! (n <= 6), so plain `Vec<Vec<S>>` keeps exact and float paths identical.

use crate::error::{MkitError, Result};
use crate::scalar::Scalar;

pub type Matrix<S> = Vec<Vec<S>>;

pub fn identity<S: Scalar>(n: usize) -> Matrix<S> {
    (0..n).map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect()
}

pub fn diagonal<S: Scalar>(d: &[S]) -> Matrix<S> {
    let n = d.len();
    (0..n).map(|i| (0..n).map(|j| if i == j { d[i].clone() } else { S::zero() }).collect()).collect()
}

pub fn transpose<S: Scalar>(a: &Matrix<S>) -> Matrix<S> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| (0..rows).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn mat_mul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols).map(|j| (0..inner).fold(S::zero(), |acc, k| acc + row[k].clone() * b[k][j].clone())).collect()
        })
        .collect()
}

pub fn mat_vec<S: Scalar>(a: &Matrix<S>, v: &[S]) -> Vec<S> {
    a.iter().map(|row| dot(row, v)).collect()
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn is_symmetric<S: Scalar>(a: &Matrix<S>) -> bool {
    let n = a.len();
    a.iter().all(|r| r.len() == n) && (0..n).all(|i| (0..i).all(|j| a[i][j] == a[j][i]))
}

/// Index of the pivot in `col` among rows `from..`: the first nonzero entry
/// on the exact backend, the largest magnitude on floats.
fn pick_pivot<S: Scalar>(a: &Matrix<S>, col: usize, from: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (r, row) in a.iter().enumerate().skip(from) {
        if row[col].is_zero() {
            continue;
        }
        let m = row[col].magnitude();
        match S::BACKEND {
            crate::scalar::Backend::Exact => return Some(r),
            crate::scalar::Backend::Float => {
                if best.is_none_or(|(_, bm)| m > bm) {
                    best = Some((r, m));
                }
            }
        }
    }
    best.map(|(r, _)| r)
}

/// Solves `A X = B` for square nonsingular `A`.
pub fn solve<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(MkitError::Dimension("solve expects a square system".into()));
    }
    let m = b.first().map_or(0, Vec::len);
    let mut aug: Matrix<S> = a.iter().zip(b).map(|(ra, rb)| ra.iter().chain(rb).cloned().collect()).collect();
    for col in 0..n {
        let p = pick_pivot(&aug, col, col).ok_or(MkitError::DegeneratePoint)?;
        aug.swap(col, p);
        let inv = S::one() / aug[col][col].clone();
        for j in col..n + m {
            aug[col][j] = aug[col][j].clone() * inv.clone();
        }
        for r in 0..n {
            if r == col || aug[r][col].is_zero() {
                continue;
            }
            let factor = aug[r][col].clone();
            for j in col..n + m {
                let delta = factor.clone() * aug[col][j].clone();
                aug[r][j] = aug[r][j].clone() - delta;
            }
        }
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn solve_vec<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Result<Vec<S>> {
    let rhs: Matrix<S> = b.iter().map(|v| vec![v.clone()]).collect();
    Ok(solve(a, &rhs)?.into_iter().map(|mut r| r.remove(0)).collect())
}

pub fn inverse<S: Scalar>(a: &Matrix<S>) -> Result<Matrix<S>> {
    solve(a, &identity(a.len()))
}

pub fn determinant<S: Scalar>(a: &Matrix<S>) -> S {
    let n = a.len();
    let mut m = a.clone();
    let mut det = S::one();
    for col in 0..n {
        let Some(p) = pick_pivot(&m, col, col) else {
            return S::zero();
        };
        if p != col {
            m.swap(col, p);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det = det * pivot.clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone() / pivot.clone();
            for j in col..n {
                let delta = factor.clone() * m[col][j].clone();
                m[r][j] = m[r][j].clone() - delta;
            }
        }
    }
    det
}
