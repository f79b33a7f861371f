//! Exact algebra: polynomials and rational functions over the rationals,
//! vector fields on the cotangent bundle and their brackets.

pub mod field;
pub mod gcd;
pub mod identities;
pub mod phase;
pub mod poly;
pub mod ratfunc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}
