//! Numeric types usable for evaluation: exact rationals and `f64`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_q(q: &BigRational) -> Self;
    fn from_i64(v: i64) -> Self;
    /// Size used for pivoting.
    fn magnitude(&self) -> f64;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_q(q: &BigRational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_q(q: &BigRational) -> Self {
        q.clone()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::MAX).max(f64::MIN_POSITIVE)
        }
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Solve `a * x = b` (columns of `b`) by Gauss-Jordan elimination with
/// magnitude pivoting. Returns `None` when `a` is singular.
pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let m = b.first().map(|r| r.len()).unwrap_or(0);
    let mut aug: Vec<Vec<T>> = a
        .iter()
        .zip(b.iter())
        .map(|(ra, rb)| ra.iter().cloned().chain(rb.iter().cloned()).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .filter(|&r| !aug[r][col].is_zero())
            .max_by(|&r1, &r2| aug[r1][col].magnitude().partial_cmp(&aug[r2][col].magnitude()).unwrap())?;
        aug.swap(col, piv);
        let p = aug[col][col].clone();
        if p.magnitude() == 0.0 && p.is_zero() {
            return None;
        }
        let inv = T::one() / p;
        for v in aug[col].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for r in 0..n {
            if r == col || aug[r][col].is_zero() {
                continue;
            }
            let f = aug[r][col].clone();
            for c in col..n + m {
                let d = aug[col][c].clone() * f.clone();
                aug[r][c] = aug[r][c].clone() - d;
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn identity<T: Scalar>(n: usize) -> Vec<Vec<T>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect()
}

pub fn invert<T: Scalar>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    solve(a, &identity::<T>(a.len()))
}

pub fn matmul<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let k = b.len();
    let m = b.first().map(|r| r.len()).unwrap_or(0);
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| (0..k).fold(T::zero(), |acc, l| acc + row[l].clone() * b[l][j].clone()))
                .collect()
        })
        .collect()
}

pub fn matvec<T: Scalar>(a: &[Vec<T>], v: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone()))
        .collect()
}

pub fn transpose<T: Clone>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    let m = a.first().map(|r| r.len()).unwrap_or(0);
    (0..m).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfields::poly::{q, qr};

    #[test]
    fn exact_inverse() {
        let a = vec![vec![q(2), q(1)], vec![q(1), q(1)]];
        let inv = invert(&a).unwrap();
        assert_eq!(inv, vec![vec![q(1), q(-1)], vec![q(-1), q(2)]]);
        assert_eq!(matmul(&a, &inv), identity::<BigRational>(2));
    }

    #[test]
    fn singular_detected() {
        let a = vec![vec![qr(1, 2), q(1)], vec![q(1), q(2)]];
        assert!(invert(&a).is_none());
    }

    #[test]
    fn float_solve() {
        let a = vec![vec![0.0, 2.0], vec![3.0, 1.0]];
        let x = solve(&a, &[vec![4.0], vec![5.0]]).unwrap();
        assert!((x[0][0] - 1.0).abs() < 1e-15 && (x[1][0] - 2.0).abs() < 1e-15);
    }
}
