//! Verification suites shared by the command-line front end and the
//! integration tests.

use rayon::prelude::*;
use serde::Serialize;

use super::frame::{CanonicalFrame, R11Oracle};
use super::hchart::aij_checks;
use super::probe::cost_hessian_probe;
use super::pullback::pullback_checks;
use super::sample::sample_covectors;
use super::taylor::sflat_fit;
use super::{Check, OracleError};
use crate::curvature::{r11, young_diagram};
use crate::groups::{GroupKind, GroupModel};
use crate::scalar::Scalar;
use crate::symfields::identities::verify_bracket_identities;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Exact,
    Fit,
    Slow,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Suite::Exact),
            "fit" => Ok(Suite::Fit),
            "slow" => Ok(Suite::Slow),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite '{}' (expected exact, fit, slow or all)", s)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub group: String,
    pub suite: Suite,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

pub const EXACT_SAMPLES: usize = 50;
pub const FIT_SAMPLES: usize = 5;
pub const FIT_LEAD_TOL: f64 = 1e-6;
pub const FIT_LIN_TOL: f64 = 1e-3;
pub const PROBE_T: f64 = 0.1;
pub const PROBE_TOL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuiteTolerances {
    pub fit_lead: f64,
    pub fit_lin: f64,
    pub probe: f64,
}

impl Default for SuiteTolerances {
    fn default() -> Self {
        SuiteTolerances { fit_lead: FIT_LEAD_TOL, fit_lin: FIT_LIN_TOL, probe: PROBE_TOL }
    }
}

/// Exact `R_{aa,11}` against the closed form, with the conditions on `E_top`.
pub fn r11_checks(model: &GroupModel, seed: u64, count: usize) -> Result<Vec<Check>, OracleError> {
    let oracle = R11Oracle::new(model);
    let hs = sample_covectors(model.kind, seed, count);
    let per: Vec<Result<Vec<Check>, OracleError>> = hs
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            let exact = oracle.r11(h)?;
            let closed = r11(model.kind, h)?;
            let mut out = vec![Check::exact(format!("r11 #{}", i), closed, exact)];
            for mut c in oracle.lemma_conditions(h)? {
                c.name = format!("{} #{}", c.name, i);
                out.push(c);
            }
            Ok(out)
        })
        .collect();
    let mut out = Vec::new();
    for p in per {
        out.extend(p?);
    }
    Ok(out)
}

/// Largest Goursat dimension for which the whole `F` column is built. Above
/// it, and for Cartan, the cost runs to minutes and only the first rows are used.
pub const FULL_FRAME_MAX_DIM: usize = 6;
pub const PARTIAL_FRAME_ROWS: usize = 2;

/// Darboux pairings and structural residuals of the frame at one sampled
/// covector.
pub fn frame_checks(model: &GroupModel, seed: u64) -> Result<Vec<Check>, OracleError> {
    let (na, _) = young_diagram(model.kind);
    let full = matches!(model.kind, GroupKind::Goursat(n) if n <= FULL_FRAME_MAX_DIM);
    let rows = if full { na } else { PARTIAL_FRAME_ROWS.min(na) };
    let h = &sample_covectors(model.kind, seed, 1)[0];
    let frame = CanonicalFrame::new(model, rows);
    let mut out = frame.darboux_check(h)?;
    out.extend(frame.structural_residuals(h)?);
    Ok(out)
}

pub fn identity_checks(model: &GroupModel) -> Vec<Check> {
    verify_bracket_identities(model)
        .checks
        .into_iter()
        .map(|c| Check {
            name: format!("identity {}", c.name),
            mode: "exact",
            expected: "0".into(),
            actual: c.residual.unwrap_or_else(|| "0".into()),
            pass: c.pass,
        })
        .collect()
}

pub fn fit_checks(model: &GroupModel, seed: u64, count: usize) -> Result<Vec<Check>, OracleError> {
    fit_checks_tol(model, seed, count, FIT_LEAD_TOL, FIT_LIN_TOL)
}

pub fn fit_checks_tol(model: &GroupModel, seed: u64, count: usize, lead_tol: f64, lin_tol: f64) -> Result<Vec<Check>, OracleError> {
    let hs = sample_covectors(model.kind, seed, count);
    let fits: Vec<Result<Vec<Check>, OracleError>> = hs
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            let fit = sflat_fit(model, h, None)?;
            Ok(fit
                .checks(lead_tol, lin_tol)
                .into_iter()
                .map(|mut c| {
                    c.name = format!("{} #{}", c.name, i);
                    c
                })
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for f in fits {
        out.extend(f?);
    }
    Ok(out)
}

/// Probe covector `(1, 0, 1, 0, …)`.
pub fn probe_covector(kind: GroupKind) -> Vec<f64> {
    let mut h = vec![0.0; kind.dim()];
    h[0] = 1.0;
    h[2] = 1.0;
    h
}

pub fn probe_checks(model: &GroupModel, rel_tol: f64) -> Result<Vec<Check>, OracleError> {
    let p = cost_hessian_probe(model, &probe_covector(model.kind), PROBE_T, 0.02 * PROBE_T)?;
    Ok(p.checks(model, rel_tol))
}

pub fn run_suite(model: &GroupModel, suite: Suite, seed: u64) -> Result<SuiteReport, OracleError> {
    run_suite_with(model, suite, seed, &SuiteTolerances::default())
}

pub fn run_suite_with(model: &GroupModel, suite: Suite, seed: u64, tol: &SuiteTolerances) -> Result<SuiteReport, OracleError> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Exact | Suite::All) {
        checks.extend(r11_checks(model, seed, EXACT_SAMPLES)?);
        checks.extend(frame_checks(model, seed)?);
        checks.extend(identity_checks(model));
        if let GroupKind::Goursat(n) = model.kind {
            if n >= 3 {
                checks.extend(aij_checks(model, &sample_covectors(model.kind, seed, 1)[0])?);
            }
        }
    }
    if matches!(suite, Suite::Fit | Suite::All) {
        checks.extend(fit_checks_tol(model, seed, FIT_SAMPLES, tol.fit_lead, tol.fit_lin)?);
        let h: Vec<f64> = sample_covectors(model.kind, seed, 1)[0].iter().map(|x| x.to_f64()).collect();
        checks.extend(pullback_checks(model, &h)?);
    }
    if matches!(suite, Suite::Slow | Suite::All) {
        checks.extend(probe_checks(model, tol.probe)?);
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    Ok(SuiteReport {
        group: model.kind.to_string(),
        suite,
        seed,
        passed,
        failed: checks.len() - passed,
        checks,
    })
}

/// `A₁, A₂` in closed form against their defining double sums.
pub fn coefficient_sum_checks(n_range: std::ops::RangeInclusive<usize>) -> Vec<Check> {
    let mut out = Vec::new();
    for n in n_range {
        let (a1, a2) = crate::curvature::coeff_a(n);
        let (s1, s2) = crate::curvature::coeff_a_sums(n);
        out.push(Check::exact(format!("A1({})", n), &s1, &a1));
        out.push(Check::exact(format!("A2({})", n), &s2, &a2));
    }
    out
}
