//! Bracket identities between the Hamiltonian field and the frame-adapted
//! fields, checked as exact equalities of fields.

use serde::Serialize;

use super::field::RatVecField;
use super::phase::PhaseSpace;
use super::ratfunc::RatFunc;
use crate::groups::{GroupKind, GroupModel};

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub statement: String,
    pub pass: bool,
    /// `exact` or `unit-level` (holds modulo `h_1² + h_2² − 1`).
    pub mode: &'static str,
    pub residual: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub group: String,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn exact(ps: &PhaseSpace, name: &str, statement: &str, lhs: RatVecField, rhs: RatVecField) -> IdentityCheck {
    let r = lhs.sub(&rhs);
    IdentityCheck {
        name: name.to_string(),
        statement: statement.to_string(),
        pass: r.is_zero(),
        mode: "exact",
        residual: if r.is_zero() { None } else { Some(r.fmt_with(&ps.names())) },
    }
}

/// Residual must vanish on `2H = 1`: every component divisible by `2H − 1`.
fn unit_level(ps: &PhaseSpace, name: &str, statement: &str, lhs: RatVecField, rhs: RatVecField) -> IdentityCheck {
    let r = lhs.sub(&rhs);
    let u = ps.unit_level_residual();
    let pass = r.comps().iter().all(|c| c.is_zero() || c.num().div_exact(&u).is_some());
    IdentityCheck {
        name: name.to_string(),
        statement: statement.to_string(),
        pass,
        mode: "unit-level",
        residual: if pass { None } else { Some(r.fmt_with(&ps.names())) },
    }
}

fn hx_check(ps: &PhaseSpace, hv: &RatVecField, name: &str) -> IdentityCheck {
    let lhs = hv.bracket(&ps.x_theta());
    let rhs = ps.lifted_x(2).neg().add(&ps.x_theta_bar().scale(&ps.h_rf(2)));
    unit_level(ps, name, "[H, X_theta] = -X3 + h3 X_thetabar", lhs, rhs)
}

/// Check the identity list of the model.
pub fn verify_bracket_identities(model: &GroupModel) -> IdentityReport {
    let ps = PhaseSpace::new(model);
    let hv = ps.h_vec();
    let mut checks = Vec::new();
    checks.push(hx_check(&ps, &hv, match model.kind {
        GroupKind::Cartan => "CHX",
        _ => "HX",
    }));
    match model.kind {
        GroupKind::Goursat(n) => {
            let mut rhs = ps.x_theta();
            if n >= 4 {
                let mut extra = RatVecField::zero(ps.nvars());
                for i in 3..n {
                    // h_{i+1} ∂_{h_i}, one-based
                    extra = extra.add(&ps.dh(i - 1).scale(&ps.h_rf(i)));
                }
                rhs = rhs.add(&extra.scale(&ps.h_rf(1)));
            }
            let st = if n == 3 {
                "[H, d_theta] = X_theta"
            } else {
                "[H, d_theta] = X_theta + h2 sum_{i=3}^{n-1} h_{i+1} d_{h_i}"
            };
            checks.push(exact(&ps, "Hht", st, hv.bracket(&ps.d_theta()), rhs));
            checks.push(exact(&ps, "Hh3", "[H, d_h3] = -d_theta", hv.bracket(&ps.dh(2)), ps.d_theta().neg()));
            for i in 4..=n {
                let lhs = hv.bracket(&ps.dh(i - 1));
                let rhs = ps.dh(i - 2).scale(&ps.h_rf(0)).neg();
                let st = format!("[H, d_h{}] = -h1 d_h{}", i, i - 1);
                checks.push(exact(&ps, &format!("Hh{}", i), &st, lhs, rhs));
            }
            checks.push(exact(&ps, "He", "[H, e] = -H", hv.bracket(&ps.euler()), hv.neg()));
        }
        GroupKind::Cartan => {
            let h = |i: usize| ps.h_rf(i);
            checks.push(exact(&ps, "Ch5", "[H, d_h5] = -h2 d_h3", hv.bracket(&ps.dh(4)), ps.dh(2).scale(&h(1)).neg()));
            checks.push(exact(&ps, "Ch4", "[H, d_h4] = -h1 d_h3", hv.bracket(&ps.dh(3)), ps.dh(2).scale(&h(0)).neg()));
            checks.push(exact(&ps, "Ch3", "[H, d_h3] = -d_theta", hv.bracket(&ps.dh(2)), ps.d_theta().neg()));
            let coeff: RatFunc = &(&h(1) * &h(3)) - &(&h(0) * &h(4));
            let rhs = ps.x_theta().add(&ps.dh(2).scale(&coeff));
            checks.push(exact(&ps, "Cht", "[H, d_theta] = X_theta + (h2 h4 - h1 h5) d_h3", hv.bracket(&ps.d_theta()), rhs));
            checks.push(exact(&ps, "CHe", "[H, e] = -H", hv.bracket(&ps.euler()), hv.neg()));
        }
    }
    IdentityReport { group: model.kind.to_string(), checks }
}
