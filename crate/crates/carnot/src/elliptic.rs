//! Jacobi elliptic functions and the pendulum picture of the vertical flow
//! for the Engel and Cartan groups.
//!
//! Both groups reduce to the pendulum `ψ̈ = −α sin ψ` with `α ≥ 0`:
//! `ψ = θ` (Engel, `α > 0`), `ψ = θ + π` (Engel, `α < 0`, then `|α|`) and
//! `ψ = θ − β` (Cartan). Chart conventions are those of
//! [`crate::groups::chart_of`].

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::{chart_of, h_from_chart, wrap_angle, GroupKind};

/// Tolerance for the equalities that define the boundary strata.
pub const EPS_CLASS: f64 = 1e-10;
/// Margin inside which a strict classification is flagged as uncertain.
pub const UNCERTAIN_MARGIN: f64 = 1e-7;
const UNIT_SPEED_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("modulus {0} outside [0, 1)")]
    ModulusOutOfRange(f64),
    #[error("covector is not on the unit level: h1^2 + h2^2 = {0}")]
    NotUnitSpeed(f64),
    #[error("pendulum strata are defined for engel and cartan only, got {0}")]
    UnsupportedGroup(String),
    #[error("operation needs C1, C2 or C3, got {0}")]
    WrongStratum(Stratum),
}

/// `(sn, cn, dn)` of `u` with modulus `k ∈ [0, 1]`, by descending Landen
/// transformations.
pub fn jacobi_sn_cn_dn(u: f64, k: f64) -> (f64, f64, f64) {
    let k = k.abs();
    if k == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    if k >= 1.0 {
        let s = 1.0 / u.cosh();
        return (u.tanh(), s, s);
    }
    const CAP: usize = 12;
    let mut emc = 1.0 - k * k;
    let mut u = u;
    let mut em = [0.0; CAP + 1];
    let mut en = [0.0; CAP + 1];
    let mut a = 1.0;
    let mut dn = 1.0;
    let mut c = 1.0;
    let mut l = 0;
    for i in 0..=CAP {
        l = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() <= 1e-15 * a {
            break;
        }
        emc *= a;
        a = c;
    }
    u *= c;
    let mut sn = u.sin();
    let mut cn = u.cos();
    if sn != 0.0 {
        let mut a = cn / sn;
        c *= a;
        for ii in (0..=l).rev() {
            let b = em[ii];
            a *= c;
            c *= dn;
            dn = (en[ii] + a) / (b + a);
            a = c / b;
        }
        a = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn >= 0.0 { a } else { -a };
        cn = c * sn;
    }
    (sn, cn, dn)
}

/// Complete elliptic integral of the first kind, `K(k)`, by the
/// arithmetic-geometric mean.
pub fn complete_k(k: f64) -> Result<f64, EllipticError> {
    if !(0.0..1.0).contains(&k.abs()) {
        return Err(EllipticError::ModulusOutOfRange(k));
    }
    let (mut a, mut b) = (1.0f64, (1.0 - k * k).sqrt());
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    Ok(PI / (2.0 * a))
}

/// Trapezoid rule on `∫_0^{π/2} dθ / √(1 − k² sin²θ)`; the integrand is
/// smooth and periodic, so the rule converges geometrically.
pub fn complete_k_quadrature(k: f64, panels: usize) -> f64 {
    let h = FRAC_PI_2 / panels as f64;
    let f = |t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt();
    let mut s = 0.5 * (f(0.0) + f(FRAC_PI_2));
    for i in 1..panels {
        s += f(i as f64 * h);
    }
    s * h
}

/// Carlson's symmetric integral `R_F(x, y, z)`.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..100 {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        let mu = (x + y + z) / 3.0;
        let (dx, dy, dz) = (1.0 - x / mu, 1.0 - y / mu, 1.0 - z / mu);
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-9 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / mu.sqrt();
        }
    }
    1.0 / ((x + y + z) / 3.0).sqrt()
}

/// Incomplete integral `F(φ, k)` for any real amplitude, `k < 1`.
pub fn incomplete_f(phi: f64, k: f64) -> Result<f64, EllipticError> {
    let kk = complete_k(k)?;
    let m = (phi / PI).round();
    let r = phi - m * PI;
    let (s, c) = r.sin_cos();
    Ok(s * carlson_rf(c * c, 1.0 - k * k * s * s, 1.0) + 2.0 * m * kk)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StratumKind {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
}

/// A pendulum stratum; `sign` is the sign of `α` for Engel `C1..C5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stratum {
    pub kind: StratumKind,
    pub sign: Option<i8>,
}

impl std::fmt::Display for Stratum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.kind)?;
        match self.sign {
            Some(s) if s > 0 => write!(f, "+"),
            Some(_) => write!(f, "-"),
            None => Ok(()),
        }
    }
}

impl Stratum {
    /// Strata whose geodesics are not ample.
    pub fn is_abnormal(&self, kind: GroupKind) -> bool {
        match self.kind {
            StratumKind::C4 | StratumKind::C5 => true,
            StratumKind::C7 => kind == GroupKind::Cartan,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PendulumChart {
    pub group: GroupKind,
    pub stratum: Stratum,
    pub energy: f64,
    /// Chart angle and velocity.
    pub theta: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: Option<f64>,
    /// Elliptic modulus on `C1..C3`.
    pub k: Option<f64>,
    /// Elliptic time on `C1..C3`.
    pub phi: Option<f64>,
    /// `K(k)` on `C1, C2`.
    pub big_k: Option<f64>,
    pub boundary_uncertain: bool,
}

impl PendulumChart {
    /// Pendulum angle `ψ` and strength `|α|`.
    fn pendulum(&self) -> (f64, f64) {
        pendulum_angle(self.group, self.theta, self.alpha, self.beta)
    }
}

fn pendulum_angle(group: GroupKind, theta: f64, alpha: f64, beta: Option<f64>) -> (f64, f64) {
    match group {
        GroupKind::Cartan => (wrap_angle(theta - beta.unwrap_or(0.0)), alpha),
        _ if alpha < 0.0 => (wrap_angle(theta + PI), -alpha),
        _ => (wrap_angle(theta), alpha),
    }
}

fn from_pendulum(group: GroupKind, psi: f64, alpha_orig: f64, beta: Option<f64>) -> f64 {
    match group {
        GroupKind::Cartan => psi + beta.unwrap_or(0.0),
        _ if alpha_orig < 0.0 => psi - PI,
        _ => psi,
    }
}

fn check_group(kind: GroupKind) -> Result<(), EllipticError> {
    if kind == GroupKind::Cartan || kind.is_engel() {
        Ok(())
    } else {
        Err(EllipticError::UnsupportedGroup(kind.to_string()))
    }
}

/// Stratum of a unit-level covector given in frame coordinates.
pub fn classify_pendulum(kind: GroupKind, h: &[f64]) -> Result<PendulumChart, EllipticError> {
    classify_pendulum_tol(kind, h, EPS_CLASS)
}

pub fn classify_pendulum_tol(kind: GroupKind, h: &[f64], eps: f64) -> Result<PendulumChart, EllipticError> {
    check_group(kind)?;
    let r2 = h[0] * h[0] + h[1] * h[1];
    if (r2 - 1.0).abs() > UNIT_SPEED_TOL {
        return Err(EllipticError::NotUnitSpeed(r2));
    }
    let ch = chart_of(kind, h).expect("engel or cartan");
    let (psi, a) = pendulum_angle(kind, ch.theta, ch.alpha, ch.beta);
    let c = ch.c;
    let energy = 0.5 * c * c - a * psi.cos();
    let near = |x: f64| x.abs() <= eps;
    let close = |x: f64| x.abs() > eps && x.abs() <= UNCERTAIN_MARGIN;
    let sign = if kind.is_engel() && !near(a) { Some(if ch.alpha > 0.0 { 1 } else { -1 }) } else { None };
    let (sk, uncertain) = if near(a) {
        if near(c) {
            (StratumKind::C7, a != 0.0 || c != 0.0 || close(c))
        } else {
            (StratumKind::C6, a != 0.0 || close(c) || close(a))
        }
    } else {
        let up = energy - a;
        let down = energy + a;
        let u = close(a) || close(up) || close(down);
        if near(down) {
            (StratumKind::C4, u || down != 0.0)
        } else if near(up) {
            if near(c) {
                (StratumKind::C5, u || up != 0.0 || c != 0.0)
            } else {
                (StratumKind::C3, u || up != 0.0 || close(c))
            }
        } else if up < 0.0 {
            (StratumKind::C1, u)
        } else {
            (StratumKind::C2, u)
        }
    };
    let mut chart = PendulumChart {
        group: kind,
        stratum: Stratum { kind: sk, sign },
        energy,
        theta: ch.theta,
        c,
        alpha: ch.alpha,
        beta: ch.beta,
        k: None,
        phi: None,
        big_k: None,
        boundary_uncertain: uncertain,
    };
    if matches!(sk, StratumKind::C1 | StratumKind::C2 | StratumKind::C3) {
        let (k, phi, big_k) = elliptic_from_pendulum(sk, psi, c, a);
        chart.k = Some(k);
        chart.phi = Some(phi);
        chart.big_k = big_k;
    }
    Ok(chart)
}

fn elliptic_from_pendulum(sk: StratumKind, psi: f64, c: f64, a: f64) -> (f64, f64, Option<f64>) {
    let sa = a.sqrt();
    let e = 0.5 * c * c - a * psi.cos();
    let half = 0.5 * psi;
    match sk {
        StratumKind::C1 => {
            let k = ((e + a) / (2.0 * a)).sqrt().min(1.0 - 1e-16);
            let big_k = complete_k(k).unwrap();
            // am(u) from sn = sin(ψ/2)/k, cn = c/(2k√α)
            let am = (half.sin() / k).atan2(c / (2.0 * k * sa));
            let mut u = incomplete_f(am, k).unwrap();
            u = u.rem_euclid(4.0 * big_k);
            (k, u / sa, Some(big_k))
        }
        StratumKind::C2 => {
            let k = (2.0 * a / (e + a)).sqrt().min(1.0 - 1e-16);
            let big_k = complete_k(k).unwrap();
            let sg = if c >= 0.0 { 1.0 } else { -1.0 };
            let am = (sg * half.sin()).atan2(half.cos());
            let u = incomplete_f(am, k).unwrap().rem_euclid(2.0 * big_k);
            (k, k * u / sa, Some(big_k))
        }
        _ => {
            let sg = if c >= 0.0 { 1.0 } else { -1.0 };
            let s = (sg * half.sin()).clamp(-1.0 + 1e-16, 1.0 - 1e-16);
            (1.0, s.atanh() / sa, None)
        }
    }
}

/// Elliptic coordinates `(k, φ, α, β)` of a covector in `C1 ∪ C2 ∪ C3`.
pub fn elliptic_coords(kind: GroupKind, h: &[f64]) -> Result<(f64, f64, f64, Option<f64>), EllipticError> {
    let ch = classify_pendulum(kind, h)?;
    match (ch.k, ch.phi) {
        (Some(k), Some(phi)) => Ok((k, phi, ch.alpha, ch.beta)),
        _ => Err(EllipticError::WrongStratum(ch.stratum)),
    }
}

/// Chart angle and velocity at time `t` along the flow.
pub fn pendulum_state(chart: &PendulumChart, t: f64) -> (f64, f64) {
    let (psi0, a) = chart.pendulum();
    let sa = a.sqrt();
    let sg = if chart.c >= 0.0 { 1.0 } else { -1.0 };
    let (psi, c) = match chart.stratum.kind {
        StratumKind::C1 => {
            let k = chart.k.unwrap();
            let (sn, cn, dn) = jacobi_sn_cn_dn(sa * (chart.phi.unwrap() + t), k);
            (2.0 * (k * sn).atan2(dn), 2.0 * k * sa * cn)
        }
        StratumKind::C2 => {
            let k = chart.k.unwrap();
            let (sn, cn, dn) = jacobi_sn_cn_dn(sa * (chart.phi.unwrap() + t) / k, k);
            (2.0 * (sg * sn).atan2(cn), 2.0 * sg * sa / k * dn)
        }
        StratumKind::C3 => {
            let u = sa * (chart.phi.unwrap() + t);
            let sech = 1.0 / u.cosh();
            (2.0 * (sg * u.tanh()).atan2(sech), 2.0 * sg * sa * sech)
        }
        StratumKind::C6 => (psi0 + chart.c * t, chart.c),
        _ => (psi0, chart.c),
    };
    (wrap_angle(from_pendulum(chart.group, psi, chart.alpha, chart.beta)), c)
}

/// Frame coordinates `h(t)` from the closed-form pendulum solution.
pub fn pendulum_closed_form(chart: &PendulumChart, t: f64) -> Vec<f64> {
    let (theta, c) = pendulum_state(chart, t);
    h_from_chart(chart.group, theta, c, chart.alpha, chart.beta.unwrap_or(0.0)).expect("engel or cartan")
}

/// `h_1(t)` on `C1..C3` of the Engel group in elliptic form, for `α > 0`.
pub fn engel_h1_closed_form(chart: &PendulumChart, t: f64) -> Result<f64, EllipticError> {
    let a = chart.alpha.abs();
    let sa = a.sqrt();
    let sg = if chart.c >= 0.0 { 1.0 } else { -1.0 };
    let flip = if chart.alpha < 0.0 { -1.0 } else { 1.0 };
    let v = match (chart.stratum.kind, chart.k, chart.phi) {
        (StratumKind::C1, Some(k), Some(phi)) => {
            let (sn, _, dn) = jacobi_sn_cn_dn(sa * (phi + t), k);
            -2.0 * k * sn * dn
        }
        (StratumKind::C2, Some(k), Some(phi)) => {
            let (sn, cn, _) = jacobi_sn_cn_dn(sa * (phi + t) / k, k);
            -2.0 * sg * sn * cn
        }
        (StratumKind::C3, _, Some(phi)) => {
            let u = sa * (phi + t);
            -2.0 * sg * u.tanh() / u.cosh()
        }
        _ => return Err(EllipticError::WrongStratum(chart.stratum)),
    };
    Ok(flip * v)
}

/// Zeros in `[0, T]` of the coordinate whose vanishing breaks
/// equiregularity (`h_1` for Engel, `h_3` for Cartan), from the closed form.
pub fn closed_form_loss_times(chart: &PendulumChart, t_end: f64) -> Vec<f64> {
    let (_, a) = chart.pendulum();
    let sa = a.sqrt();
    let mut out = Vec::new();
    let mut push_grid = |first: f64, period: f64| {
        if !(period > 0.0) || !period.is_finite() {
            return;
        }
        let mut m = (-first / period).ceil();
        loop {
            let t = first + m * period;
            if t > t_end + 1e-12 {
                break;
            }
            if t >= -1e-12 {
                out.push(t.max(0.0));
            }
            m += 1.0;
        }
    };
    match (chart.group, chart.stratum.kind) {
        (GroupKind::Cartan, StratumKind::C1) => {
            // c ∝ cn(√α(φ+t)): zeros at √α(φ+t) = K + 2mK
            let kk = chart.big_k.unwrap();
            push_grid((kk / sa) - chart.phi.unwrap(), 2.0 * kk / sa);
        }
        (GroupKind::Cartan, _) => {}
        (_, StratumKind::C1) => {
            let kk = chart.big_k.unwrap();
            push_grid(-chart.phi.unwrap(), 2.0 * kk / sa);
        }
        (_, StratumKind::C2) => {
            // sn·cn of √α(φ+t)/k vanishes at multiples of K
            let k = chart.k.unwrap();
            let kk = chart.big_k.unwrap();
            push_grid(-chart.phi.unwrap(), k * kk / sa);
        }
        (_, StratumKind::C3) => {
            let t = -chart.phi.unwrap();
            if (0.0..=t_end).contains(&t) {
                out.push(t);
            }
        }
        (_, StratumKind::C6) => {
            // h1 = −sin θ with θ = θ0 + ct
            let period = PI / chart.c.abs();
            push_grid((-chart.theta / chart.c).rem_euclid(period), period);
        }
        // the remaining strata are either free of zeros or vanish identically
        _ => {}
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_group;
    use crate::hamiltonian::{integrate_flow, FlowOptions};
    use crate::groups::Covector;

    const ENGEL: GroupKind = GroupKind::Goursat(4);

    #[test]
    fn jacobi_special_values() {
        assert_eq!(jacobi_sn_cn_dn(0.0, 0.7), (0.0, 1.0, 1.0));
        let (s, c, d) = jacobi_sn_cn_dn(0.9, 0.0);
        assert_eq!((s, c, d), (0.9f64.sin(), 0.9f64.cos(), 1.0));
        let (s, c, d) = jacobi_sn_cn_dn(0.9, 1.0);
        assert!((s - 0.9f64.tanh()).abs() < 1e-15 && (c - 1.0 / 0.9f64.cosh()).abs() < 1e-15 && c == d);
        // sn(K) = 1
        let k = 0.8;
        let kk = complete_k(k).unwrap();
        let (s, c, d) = jacobi_sn_cn_dn(kk, k);
        assert!((s - 1.0).abs() < 1e-12 && c.abs() < 1e-7 && (d - 0.6).abs() < 1e-12);
    }

    #[test]
    fn complete_integral() {
        assert!((complete_k(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!(matches!(complete_k(1.0), Err(EllipticError::ModulusOutOfRange(_))));
        let k = 0.5f64.sqrt();
        let a = complete_k(k).unwrap();
        let b = complete_k_quadrature(k, 400);
        assert!((a - b).abs() < 1e-12);
        assert!((incomplete_f(FRAC_PI_2, k).unwrap() - a).abs() < 1e-13);
        assert!((incomplete_f(PI + 0.3, k).unwrap() - 2.0 * a - incomplete_f(0.3, k).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn strata_examples() {
        let h = |th: f64, c: f64, a: f64| h_from_chart(ENGEL, th, c, a, 0.0).unwrap();
        assert_eq!(classify_pendulum(ENGEL, &h(0.0, 1.0, 0.0)).unwrap().stratum.kind, StratumKind::C6);
        let c7 = classify_pendulum(ENGEL, &h(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(c7.stratum.kind, StratumKind::C7);
        let hc = h_from_chart(GroupKind::Cartan, 0.0, 1.0, 1.0, 0.0).unwrap();
        let ch = classify_pendulum(GroupKind::Cartan, &hc).unwrap();
        assert_eq!(ch.stratum.kind, StratumKind::C1);
        assert!((ch.energy + 0.5).abs() < 1e-15);
        assert!(matches!(classify_pendulum(GroupKind::Goursat(5), &[1.0, 0.0, 0.0, 0.0, 0.0]), Err(EllipticError::UnsupportedGroup(_))));
        assert!(matches!(classify_pendulum(ENGEL, &[1.0, 1.0, 0.0, 0.0]), Err(EllipticError::NotUnitSpeed(_))));
        let s4 = classify_pendulum(ENGEL, &h(0.0, 0.0, 2.0)).unwrap();
        assert_eq!(s4.stratum, Stratum { kind: StratumKind::C4, sign: Some(1) });
        let s5 = classify_pendulum(ENGEL, &h(0.0, 0.0, -2.0)).unwrap();
        assert_eq!(s5.stratum, Stratum { kind: StratumKind::C5, sign: Some(-1) });
    }

    #[test]
    fn elliptic_coordinate_examples() {
        let a: f64 = 2.0;
        let k0 = 0.6;
        let h = h_from_chart(ENGEL, 0.0, 2.0 * k0 * a.sqrt(), a, 0.0).unwrap();
        let (k, phi, _, _) = elliptic_coords(ENGEL, &h).unwrap();
        assert!((k - k0).abs() < 1e-14 && phi.abs() < 1e-14);
        let h3 = h_from_chart(ENGEL, 0.0, 2.0 * a.sqrt(), a, 0.0).unwrap();
        let ch = classify_pendulum(ENGEL, &h3).unwrap();
        assert_eq!(ch.stratum.kind, StratumKind::C3);
        assert_eq!(ch.k, Some(1.0));
        assert!(ch.phi.unwrap().abs() < 1e-14);
        let hc = h_from_chart(GroupKind::Cartan, 0.4, 3.0, 1.5, -0.7).unwrap();
        let (k, _, _, _) = elliptic_coords(GroupKind::Cartan, &hc).unwrap();
        let expect = 1.0 / (((0.4f64 + 0.7) / 2.0).sin().powi(2) + 9.0 / 6.0).sqrt();
        assert!((k - expect).abs() < 1e-14);
        let h6 = h_from_chart(ENGEL, 0.0, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(elliptic_coords(ENGEL, &h6), Err(EllipticError::WrongStratum(_))));
    }

    fn sup_error(kind: GroupKind, h0: &[f64]) -> f64 {
        let m = build_group(kind).unwrap();
        let chart = classify_pendulum(kind, h0).unwrap();
        let opts = FlowOptions { drift_bound: f64::INFINITY, ..Default::default() };
        let tr = integrate_flow(&m, &Covector::at_origin(h0.to_vec()), 5.0, &opts).unwrap();
        let mut err = 0.0f64;
        for (t, h) in tr.times.iter().zip(&tr.h) {
            let cf = pendulum_closed_form(&chart, *t);
            for (a, b) in cf.iter().zip(h) {
                err = err.max((a - b).abs());
            }
        }
        err
    }

    #[test]
    fn closed_forms_follow_the_flow() {
        let cases: Vec<(GroupKind, Vec<f64>)> = vec![
            (ENGEL, h_from_chart(ENGEL, 0.3, 0.5, 1.3, 0.0).unwrap()),
            (ENGEL, h_from_chart(ENGEL, 1.0, -0.4, -0.8, 0.0).unwrap()),
            (ENGEL, h_from_chart(ENGEL, 0.2, 3.0, 1.1, 0.0).unwrap()),
            (ENGEL, h_from_chart(ENGEL, 0.2, -3.0, -1.1, 0.0).unwrap()),
            (ENGEL, h_from_chart(ENGEL, 0.0, 2.0, 1.0, 0.0).unwrap()),
            (ENGEL, h_from_chart(ENGEL, 0.5, 0.7, 0.0, 0.0).unwrap()),
            (GroupKind::Cartan, h_from_chart(GroupKind::Cartan, 0.3, 0.5, 1.3, 0.4).unwrap()),
            (GroupKind::Cartan, h_from_chart(GroupKind::Cartan, -0.5, -2.5, 0.9, 1.1).unwrap()),
            (GroupKind::Cartan, h_from_chart(GroupKind::Cartan, 0.9, 2.0, 1.0, 0.9).unwrap()),
            (GroupKind::Cartan, h_from_chart(GroupKind::Cartan, 0.1, -0.6, 0.0, 0.0).unwrap()),
        ];
        for (kind, h) in cases {
            let e = sup_error(kind, &h);
            assert!(e < 1e-6, "{} {:?}: {}", kind, classify_pendulum(kind, &h).unwrap().stratum, e);
        }
    }

    #[test]
    fn engel_h1_forms() {
        for (th, c, a) in [(0.3, 0.5, 1.0), (0.2, 3.0, 1.0), (0.0, 2.0, 1.0), (0.4, 0.6, -1.7)] {
            let h = h_from_chart(ENGEL, th, c, a, 0.0).unwrap();
            let ch = classify_pendulum(ENGEL, &h).unwrap();
            for t in [0.0, 0.7, 2.5] {
                let a = engel_h1_closed_form(&ch, t).unwrap();
                let b = pendulum_closed_form(&ch, t)[0];
                assert!((a - b).abs() < 1e-12, "{:?} {} {}", ch.stratum, a, b);
            }
        }
    }

    #[test]
    fn loss_time_counts() {
        let engel_c3 = h_from_chart(ENGEL, -0.5, 2.0 * 0.25f64.cos(), 1.0, 0.0).unwrap();
        let ch = classify_pendulum(ENGEL, &engel_c3).unwrap();
        assert_eq!(ch.stratum.kind, StratumKind::C3);
        assert_eq!(closed_form_loss_times(&ch, 50.0).len(), 1);
        let c1 = classify_pendulum(ENGEL, &h_from_chart(ENGEL, 0.3, 0.5, 1.3, 0.0).unwrap()).unwrap();
        assert!(closed_form_loss_times(&c1, 50.0).len() > 5);
        let cc2 = classify_pendulum(GroupKind::Cartan, &h_from_chart(GroupKind::Cartan, 0.3, 3.0, 1.0, 0.0).unwrap()).unwrap();
        assert!(closed_form_loss_times(&cc2, 50.0).is_empty());
    }

    proptest::proptest! {
        #[test]
        fn jacobi_identities(u in -50.0f64..50.0, k in 0.0f64..1.0) {
            let (s, c, d) = jacobi_sn_cn_dn(u, k);
            proptest::prop_assert!((s * s + c * c - 1.0).abs() < 1e-12);
            proptest::prop_assert!((d * d + k * k * s * s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn sn_period(u in -10.0f64..10.0, k in 0.0f64..0.99) {
            let kk = complete_k(k).unwrap();
            let a = jacobi_sn_cn_dn(u, k).0;
            let b = jacobi_sn_cn_dn(u + 4.0 * kk, k).0;
            proptest::prop_assert!((a - b).abs() < 1e-10);
        }

        #[test]
        fn chart_round_trip(th in -3.0f64..3.0, c in -3.0f64..3.0, a in 0.2f64..2.0, b in -3.0f64..3.0) {
            for kind in [ENGEL, GroupKind::Cartan] {
                let h = h_from_chart(kind, th, c, a, b).unwrap();
                let ch = classify_pendulum(kind, &h).unwrap();
                if ch.k.is_some() && !ch.boundary_uncertain {
                    let back = pendulum_closed_form(&ch, 0.0);
                    for (x, y) in back.iter().zip(&h) {
                        proptest::prop_assert!((x - y).abs() < 1e-10, "{:?} {:?} {:?}", ch.stratum, back, h);
                    }
                }
            }
        }
    }
}
