//! The bracket oracle against the flow: `d/dt M(t)⁻¹ W(λ(t))` at `t = 0`
//! by finite differences, compared with `[H⃗, W](λ0)`.

use serde::Serialize;

use super::{Check, OracleError};
use crate::groups::{Covector, GroupModel};
use crate::hamiltonian::{integrate_with, FlowOptions, FlowSystem};
use crate::symfields::field::RatVecField;
use crate::symfields::phase::PhaseSpace;

pub const PULLBACK_STEPS: (f64, f64) = (1e-3, 1e-4);
pub const PULLBACK_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct PullbackDerivative {
    pub numeric: Vec<f64>,
    pub bracket: Vec<f64>,
    /// Sup-norm error relative to `max(1, |bracket|)`.
    pub rel_error: f64,
}

fn pulled_back(sys: &FlowSystem, w: &RatVecField, lambda0: &Covector<f64>, t: f64) -> Result<Vec<f64>, OracleError> {
    let opts = FlowOptions { step: t / 20.0, with_variational: true, drift_bound: f64::INFINITY };
    let tr = integrate_with(sys, lambda0, t, &opts)?;
    let last = tr.len() - 1;
    let d = 2 * tr.n();
    let m = tr.variational_at(last).expect("requested");
    let jac: Vec<Vec<f64>> = (0..d).map(|i| m[i * d..(i + 1) * d].to_vec()).collect();
    let wt = w.eval(&tr.states[last]).ok_or_else(|| OracleError::SingularCovector("field has a pole on the geodesic".into()))?;
    let rhs: Vec<Vec<f64>> = wt.iter().map(|v| vec![*v]).collect();
    let sol = crate::scalar::solve(&jac, &rhs).ok_or_else(|| OracleError::SingularCovector("variational matrix is singular".into()))?;
    Ok(sol.into_iter().map(|r| r[0]).collect())
}

/// One-sided differences at the two steps of [`PULLBACK_STEPS`], combined by
/// Richardson extrapolation.
pub fn pullback_derivative(model: &GroupModel, w: &RatVecField, h: &[f64]) -> Result<PullbackDerivative, OracleError> {
    let ps = PhaseSpace::new(model);
    let sys = FlowSystem::new(model);
    let lambda0 = Covector::at_origin(h.to_vec());
    let s0 = lambda0.state();
    let w0 = w.eval(&s0).ok_or_else(|| OracleError::SingularCovector("field has a pole at λ0".into()))?;
    let (s1, s2) = PULLBACK_STEPS;
    let g1 = pulled_back(&sys, w, &lambda0, s1)?;
    let g2 = pulled_back(&sys, w, &lambda0, s2)?;
    let r = s1 / s2;
    let numeric: Vec<f64> = (0..w0.len())
        .map(|i| {
            let d1 = (g1[i] - w0[i]) / s1;
            let d2 = (g2[i] - w0[i]) / s2;
            (r * d2 - d1) / (r - 1.0)
        })
        .collect();
    let bracket = ps.h_vec().bracket(w).eval(&s0).ok_or_else(|| OracleError::SingularCovector("bracket has a pole at λ0".into()))?;
    let scale = bracket.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let err = numeric.iter().zip(&bracket).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    Ok(PullbackDerivative { numeric, bracket, rel_error: err / scale })
}

/// The vertical frame `∂_{h_i}` and `E_top` at `h`.
pub fn pullback_checks(model: &GroupModel, h: &[f64]) -> Result<Vec<Check>, OracleError> {
    let ps = PhaseSpace::new(model);
    let mut fields: Vec<(String, RatVecField)> = (0..model.dim).map(|i| (format!("dh{}", i + 1), ps.dh(i))).collect();
    fields.push(("E_top".into(), super::frame::canonical_e_top(&ps)));
    let mut out = Vec::new();
    for (name, w) in fields {
        let d = pullback_derivative(model, &w, h)?;
        out.push(Check {
            name: format!("pullback derivative {}", name),
            mode: "float",
            expected: format!("rel error <= {:e}", PULLBACK_TOL),
            actual: format!("{:e}", d.rel_error),
            pass: d.rel_error <= PULLBACK_TOL,
        });
    }
    Ok(out)
}
