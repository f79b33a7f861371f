//! Finite-difference probe of the geodesic cost `c_t(x) = −d²(x, γ(t))/2t`.
//!
//! For `x` near the initial point the minimizing geodesic to `γ(t)` is found
//! by Newton shooting on its initial covector `λ_x`; then `c_t(x) = −t H(λ_x)`.

use serde::Serialize;

use super::{Check, OracleError};
use crate::curvature::young_diagram;
use crate::groups::{Covector, GroupModel};
use crate::hamiltonian::{integrate_with, FlowOptions, FlowSystem};

pub const SHOOTING_TOL: f64 = 1e-10;
pub const MAX_NEWTON: usize = 50;

#[derive(Clone, Debug, Serialize)]
pub struct CostProbe {
    pub t: f64,
    pub h_base: f64,
    pub dt: f64,
    /// Entries in the basis `(v_a, v_b)` of the distribution at the origin,
    /// `v_b = γ̇(0)` and `v_a` its orthogonal complement.
    pub hessian: [[f64; 2]; 2],
    pub max_residual: f64,
    pub newton_iterations: usize,
}

impl CostProbe {
    /// Diagonal entries against `n_a²/t²` and `1/t²`.
    pub fn checks(&self, model: &GroupModel, rel_tol: f64) -> Vec<Check> {
        let (na, _) = young_diagram(model.kind);
        let t2 = self.t * self.t;
        vec![
            Check::float("Q_aa t^2", (na * na) as f64, self.hessian[0][0] * t2, rel_tol),
            Check::float("Q_bb t^2", 1.0, self.hessian[1][1] * t2, rel_tol),
        ]
    }
}

struct Shooter<'a> {
    sys: FlowSystem,
    model: &'a GroupModel,
    opts: FlowOptions,
}

impl<'a> Shooter<'a> {
    fn endpoint(&self, x: &[f64], p: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>), OracleError> {
        let cv = Covector { base: x.to_vec(), p: p.to_vec() };
        let tr = integrate_with(&self.sys, &cv, t, &self.opts)?;
        let n = x.len();
        let last = tr.len() - 1;
        let end = tr.states[last][..n].to_vec();
        Ok((end, tr.variational_at(last).expect("requested").to_vec()))
    }

    /// Initial momenta at `x` reaching `target` at time `t`.
    fn shoot(&self, x: &[f64], target: &[f64], t: f64, guess: &[f64]) -> Result<(Vec<f64>, f64, usize), OracleError> {
        let n = x.len();
        let d = 2 * n;
        let mut p = guess.to_vec();
        let mut res = f64::INFINITY;
        for it in 0..MAX_NEWTON {
            let (end, m) = self.endpoint(x, &p, t)?;
            let r: Vec<f64> = end.iter().zip(target).map(|(a, b)| a - b).collect();
            res = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if res <= SHOOTING_TOL {
                return Ok((p, res, it));
            }
            // ∂x(t)/∂p(0): upper-right block of the variational matrix
            let jac: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[i * d + n + j]).collect()).collect();
            let rhs: Vec<Vec<f64>> = r.iter().map(|v| vec![*v]).collect();
            let step = crate::scalar::solve(&jac, &rhs).ok_or(OracleError::ShootingDiverged { residual: res })?;
            for (pj, s) in p.iter_mut().zip(step) {
                *pj -= s[0];
            }
        }
        Err(OracleError::ShootingDiverged { residual: res })
    }
}

/// Finite-difference `d²ċ_t` at the origin restricted to the distribution,
/// along the geodesic with initial frame coordinates `h`.
pub fn cost_hessian_probe(model: &GroupModel, h: &[f64], t: f64, h_base: f64) -> Result<CostProbe, OracleError> {
    let n = model.dim;
    if h.len() != n {
        return Err(OracleError::IndexOutOfRange { index: h.len(), max: n });
    }
    if !(t > 0.0) || !(h_base > 0.0) || h_base >= 0.5 * t {
        return Err(OracleError::StepUnbalanced(format!("t = {}, h = {}", t, h_base)));
    }
    let dt = 0.01 * t;
    let rho = h[0].hypot(h[1]);
    if rho == 0.0 {
        return Err(OracleError::NotAmpleEquiregular);
    }
    let sys = FlowSystem::new(model);
    let step = (t / 200.0).min(crate::hamiltonian::DEFAULT_STEP);
    let shooter = Shooter { sys, model, opts: FlowOptions { step, with_variational: true, drift_bound: f64::INFINITY } };
    let origin = vec![0.0; n];
    let lambda0 = Covector::at_origin(h.to_vec());
    let times = [t - dt, t, t + dt];
    let mut targets = Vec::new();
    for &s in &times {
        let tr = integrate_with(&shooter.sys, &lambda0, s, &FlowOptions { with_variational: false, ..shooter.opts.clone() })?;
        targets.push(tr.states.last().unwrap()[..n].to_vec());
    }
    let mut va = vec![0.0; n];
    let mut vb = vec![0.0; n];
    va[0] = -h[1] / rho;
    va[1] = h[0] / rho;
    vb[0] = h[0] / rho;
    vb[1] = h[1] / rho;
    let mut max_res = 0.0f64;
    let mut iters = 0;
    // ċ_t at x0 + u
    let mut cdot = |u: &[f64]| -> Result<f64, OracleError> {
        let x: Vec<f64> = origin.iter().zip(u).map(|(a, b)| a + b).collect();
        let guess = Covector::at_origin(h.to_vec()).p;
        let mut c = [0.0; 3];
        let mut g = guess;
        for (k, &s) in times.iter().enumerate() {
            let (p, res, it) = shooter.shoot(&x, &targets[k], s, &g)?;
            max_res = max_res.max(res);
            iters = iters.max(it);
            let hh = crate::groups::Covector { base: x.clone(), p: p.clone() }.h(shooter.model).map_err(crate::hamiltonian::FlowError::from)?;
            c[k] = -s * crate::groups::hamiltonian(&hh);
            g = p;
        }
        Ok((c[2] - c[0]) / (2.0 * dt))
    };
    let comb = |a: f64, b: f64| -> Vec<f64> { (0..n).map(|i| a * va[i] + b * vb[i]).collect() };
    let hb = h_base;
    let c0 = cdot(&comb(0.0, 0.0))?;
    let caa = (cdot(&comb(hb, 0.0))? - 2.0 * c0 + cdot(&comb(-hb, 0.0))?) / (hb * hb);
    let cbb = (cdot(&comb(0.0, hb))? - 2.0 * c0 + cdot(&comb(0.0, -hb))?) / (hb * hb);
    let cab = (cdot(&comb(hb, hb))? - cdot(&comb(hb, -hb))? - cdot(&comb(-hb, hb))? + cdot(&comb(-hb, -hb))?) / (4.0 * hb * hb);
    Ok(CostProbe {
        t,
        h_base,
        dt,
        hessian: [[caa, cab], [cab, cbb]],
        max_residual: max_res,
        newton_iterations: iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{build_group, GroupKind};

    #[test]
    fn heisenberg_leading_term() {
        let m = build_group(GroupKind::Goursat(3)).unwrap();
        let t = 0.1;
        let p = cost_hessian_probe(&m, &[1.0, 0.0, 1.0], t, 0.02 * t).unwrap();
        assert!(p.max_residual <= SHOOTING_TOL);
        assert!(p.checks(&m, 0.05).iter().all(|c| c.pass), "{:?}", p);
    }

    #[test]
    fn straight_line_is_defined() {
        let m = build_group(GroupKind::Goursat(3)).unwrap();
        let t = 0.1;
        let p = cost_hessian_probe(&m, &[1.0, 0.0, 0.0], t, 0.02 * t).unwrap();
        assert!(p.checks(&m, 0.05).iter().all(|c| c.pass), "{:?}", p);
    }

    #[test]
    fn rejects_unbalanced_steps() {
        let m = build_group(GroupKind::Goursat(3)).unwrap();
        assert!(matches!(cost_hessian_probe(&m, &[1.0, 0.0, 1.0], 0.1, 0.1), Err(OracleError::StepUnbalanced(_))));
    }
}
