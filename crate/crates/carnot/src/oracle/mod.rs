//! Independent checks of the closed forms: exact canonical-frame data from
//! iterated brackets, Laurent fits of the Jacobi curve and a cost-Hessian
//! probe.

pub mod frame;
pub mod hchart;
pub mod probe;
pub mod pullback;
pub mod sample;
pub mod suite;
pub mod taylor;

use serde::Serialize;
use thiserror::Error;

use crate::curvature::CurvatureError;
use crate::hamiltonian::FlowError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("singular covector: {0}")]
    SingularCovector(String),
    #[error("lemma condition failed: {0}")]
    LemmaConditionFailed(String),
    #[error("index {index} out of range (max {max})")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("graph map ill-conditioned at {dropped} of {total} grid times")]
    IllConditioned { dropped: usize, total: usize },
    #[error("shooting diverged with residual {residual:e}")]
    ShootingDiverged { residual: f64 },
    #[error("finite-difference step unbalanced: {0}")]
    StepUnbalanced(String),
    #[error("geodesic is not ample and equiregular at t = 0")]
    NotAmpleEquiregular,
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub mode: &'static str,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

impl Check {
    pub fn exact(name: impl Into<String>, expected: impl ToString, actual: impl ToString) -> Self {
        let (e, a) = (expected.to_string(), actual.to_string());
        Check { name: name.into(), mode: "exact", pass: e == a, expected: e, actual: a }
    }

    pub fn float(name: impl Into<String>, expected: f64, actual: f64, rel_tol: f64) -> Self {
        let pass = (actual - expected).abs() <= rel_tol * expected.abs().max(f64::MIN_POSITIVE) || actual == expected;
        Check {
            name: name.into(),
            mode: "float",
            expected: format!("{:.12e}", expected),
            actual: format!("{:.12e}", actual),
            pass,
        }
    }
}
