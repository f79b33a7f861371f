//! Exact Taylor expansion of the flow and its linearization at a rational
//! covector, and Laurent fits of the Jacobi curve built from it.
//!
//! The pulled-back vertical space at time `t` is represented through the
//! Darboux frame at `t = 0`: with `w_j = M(t)⁻¹ ∂_{p_j}` and `M` symplectic,
//! `σ(E_i, w_j) = −(M E_i)_{x_j}` and `σ(w_j, F_k) = (M F_k)_{x_j}`, so only
//! the base components of `M(t)` applied to frame vectors are needed.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::frame::{eval_field, R11Oracle};
use super::{Check, OracleError};
use crate::curvature::{omega, r11 as r11_closed, young_diagram};
use crate::groups::GroupModel;
use crate::hamiltonian::FlowSystem;
use crate::scalar::solve;
use crate::symfields::poly::{Poly, Q};

/// Polynomials in the state variables evaluated on power series, one
/// coefficient at a time.
struct SeriesEval {
    /// `(parent, var)`: product node `parent · y_var`.
    nodes: Vec<(Option<usize>, usize)>,
    polys: Vec<Vec<(Q, Option<usize>)>>,
    vals: Vec<Vec<Q>>,
}

impl SeriesEval {
    fn new(polys: &[Poly]) -> Self {
        let mut nodes: Vec<(Option<usize>, usize)> = Vec::new();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut out = Vec::with_capacity(polys.len());
        for p in polys {
            let mut terms = Vec::new();
            for (m, c) in p.terms() {
                let mut path = Vec::new();
                let mut node = None;
                for (v, &e) in m.0.iter().enumerate() {
                    for _ in 0..e {
                        path.push(v);
                        node = Some(*index.entry(path.clone()).or_insert_with(|| {
                            nodes.push((node, v));
                            nodes.len() - 1
                        }));
                    }
                }
                terms.push((c.clone(), node));
            }
            out.push(terms);
        }
        let vals = vec![Vec::new(); nodes.len()];
        SeriesEval { nodes, polys: out, vals }
    }

    /// Coefficient `k` of every polynomial, given coefficients `0..=k` of `y`.
    fn step(&mut self, y: &[Vec<Q>], k: usize) -> Vec<Q> {
        for id in 0..self.nodes.len() {
            let (parent, v) = self.nodes[id];
            let c = match parent {
                None => y[v][k].clone(),
                Some(p) => {
                    let mut s = Q::zero();
                    for i in 0..=k {
                        let a = &self.vals[p][i];
                        let b = &y[v][k - i];
                        if !a.is_zero() && !b.is_zero() {
                            s += a * b;
                        }
                    }
                    s
                }
            };
            self.vals[id].push(c);
        }
        self.polys
            .iter()
            .map(|terms| {
                let mut s = Q::zero();
                for (c, node) in terms {
                    match node {
                        None => {
                            if k == 0 {
                                s += c.clone();
                            }
                        }
                        Some(id) => {
                            let v = &self.vals[*id][k];
                            if !v.is_zero() {
                                s += c * v;
                            }
                        }
                    }
                }
                s
            })
            .collect()
    }
}

/// Taylor coefficients of `λ(t)` and of the Jacobian of the flow field along
/// it, up to a fixed order.
#[derive(Clone, Debug)]
pub struct TaylorFlow {
    pub order: usize,
    /// `state[var][k]`.
    pub state: Vec<Vec<Q>>,
    /// `jac[r][c][k]`.
    jac: Vec<Vec<Vec<Q>>>,
}

impl TaylorFlow {
    pub fn new(model: &GroupModel, s0: &[Q], order: usize) -> Self {
        let sys = FlowSystem::new(model);
        let f = sys.rhs_polys().to_vec();
        let d = f.len();
        let mut ev = SeriesEval::new(&f);
        let mut y: Vec<Vec<Q>> = s0.iter().map(|x| vec![x.clone()]).collect();
        for k in 0..order {
            let fk = ev.step(&y, k);
            let den = Q::from_integer((k as i64 + 1).into());
            for (yi, fi) in y.iter_mut().zip(fk) {
                yi.push(fi / &den);
            }
        }
        let jac_polys: Vec<Poly> = f.iter().flat_map(|p| (0..d).map(move |c| p.derivative(c))).collect();
        let mut jev = SeriesEval::new(&jac_polys);
        let mut jac = vec![vec![Vec::with_capacity(order + 1); d]; d];
        for k in 0..=order {
            for (idx, v) in jev.step(&y, k).into_iter().enumerate() {
                jac[idx / d][idx % d].push(v);
            }
        }
        TaylorFlow { order, state: y, jac }
    }

    /// Taylor coefficients of `M(t) v`: `δ_{k+1} = (Σ_m J_m δ_{k−m}) / (k+1)`.
    pub fn propagate(&self, v: &[Q]) -> Vec<Vec<Q>> {
        let d = v.len();
        let mut delta: Vec<Vec<Q>> = vec![v.to_vec()];
        for k in 0..self.order {
            let den = Q::from_integer((k as i64 + 1).into());
            let next: Vec<Q> = (0..d)
                .map(|r| {
                    let mut s = Q::zero();
                    for m in 0..=k {
                        for c in 0..d {
                            let a = &self.jac[r][c][m];
                            let b = &delta[k - m][c];
                            if !a.is_zero() && !b.is_zero() {
                                s += a * b;
                            }
                        }
                    }
                    s / &den
                })
                .collect();
            delta.push(next);
        }
        delta
    }
}

fn horner(coeffs: &[Q], t: &Q) -> Q {
    let mut acc = Q::zero();
    for c in coeffs.iter().rev() {
        acc = acc * t + c;
    }
    acc
}

/// Coefficients and estimates for the `(a1, b1)` block of the graph map.
#[derive(Clone, Debug, Serialize)]
pub struct SflatFit {
    /// `t·S♭⁻¹_{a1,a1} ≈ lead_a + lin_a t²`.
    pub lead_a: f64,
    pub lin_a: f64,
    pub lead_b: f64,
    pub lin_b: f64,
    /// Off-diagonal entry at the smallest grid time.
    pub offdiag: f64,
    pub window: (f64, f64),
    pub dropped: usize,
    /// Closed-form predictions.
    pub expected_lead_a: f64,
    pub expected_lin_a: f64,
}

impl SflatFit {
    pub fn checks(&self, lead_tol: f64, lin_tol: f64) -> Vec<Check> {
        vec![
            Check::float("lead_a", self.expected_lead_a, self.lead_a, lead_tol),
            Check::float("lead_b", -1.0, self.lead_b, lead_tol),
            Check::float("lin_a", self.expected_lin_a, self.lin_a, lin_tol),
        ]
    }
}

/// Jacobi-curve data at a fixed covector.
pub struct JacobiCurve {
    n: usize,
    na: usize,
    /// x-components of `M(t)E_i`, `i` over `E_{a1..an_a}, E_{b1}`.
    e_series: Vec<Vec<Vec<Q>>>,
    /// x-components of `M(t)F_{a1}` and `M(t)F_{b1}`.
    f_series: Vec<Vec<Vec<Q>>>,
    /// The same coefficients times a common denominator.
    e_int: Vec<Vec<Vec<BigInt>>>,
    f_int: Vec<Vec<Vec<BigInt>>>,
    r11: Q,
}

impl JacobiCurve {
    pub fn new(model: &GroupModel, h: &[Q]) -> Result<Self, OracleError> {
        let oracle = R11Oracle::new(model);
        let r11 = oracle.r11(h)?;
        let jets = oracle.jets();
        let ps = &jets.ps;
        let n = ps.n();
        let (na, _) = young_diagram(model.kind);
        let order = 2 * na + 30;
        let s0 = ps.origin_point(h);
        let flow = TaylorFlow::new(model, &s0, order);
        let mut es = Vec::new();
        for i in 1..=na {
            es.push(jets.e_at(na - i, h)?);
        }
        es.push(eval_field(ps, &ps.euler(), h)?);
        let f_a1: Vec<Q> = jets.e_at(na, h)?.into_iter().map(|x| -x).collect();
        let f_b1 = eval_field(ps, &jets.hv, h)?;
        let xpart = |v: &Vec<Q>| -> Vec<Vec<Q>> {
            let d = flow.propagate(v);
            (0..n).map(|j| d.iter().map(|dk| dk[j].clone()).collect()).collect()
        };
        let e_series: Vec<_> = es.par_iter().map(xpart).collect();
        let f_series: Vec<_> = [f_a1, f_b1].par_iter().map(xpart).collect();
        let mut den = BigInt::one();
        for c in e_series.iter().chain(&f_series).flatten().flatten() {
            den = den.lcm(c.denom());
        }
        let scale = |s: &Vec<Vec<Vec<Q>>>| -> Vec<Vec<Vec<BigInt>>> {
            s.iter()
                .map(|v| v.iter().map(|cs| cs.iter().map(|c| c.numer() * (&den / c.denom())).collect()).collect())
                .collect()
        };
        let e_int = scale(&e_series);
        let f_int = scale(&f_series);
        Ok(JacobiCurve { n, na, e_series, f_series, e_int, f_int, r11 })
    }

    pub fn r11(&self) -> &Q {
        &self.r11
    }

    /// Solve `Yᵀ Z = Xᵀ` and keep the `(a1, b1)` rows and columns, where
    /// `Y_ij = σ(E_i, w_j)` and `X_kj = σ(w_j, F_k)`.
    fn block<T: Clone>(&self, z: &[Vec<T>]) -> [[T; 2]; 2] {
        let cols = [0, self.na];
        [
            [z[cols[0]][0].clone(), z[cols[1]][0].clone()],
            [z[cols[0]][1].clone(), z[cols[1]][1].clone()],
        ]
    }

    /// `S♭(t)⁻¹` restricted to `(a1, b1)`, exactly at rational `t`; `None`
    /// when the pulled-back space is not a graph over the `F` directions.
    pub fn sflat_inv(&self, t: &Q) -> Option<[[Q; 2]; 2]> {
        let n = self.n;
        let yt: Vec<Vec<Q>> = (0..n).map(|j| (0..n).map(|i| -horner(&self.e_series[i][j], t)).collect()).collect();
        let xt: Vec<Vec<Q>> = (0..n).map(|j| (0..2).map(|k| horner(&self.f_series[k][j], t)).collect()).collect();
        let z = solve(&yt, &xt)?;
        Some(self.block(&z))
    }

    /// `t · S♭(t)⁻¹` on the `(a1, b1)` block at `t = 1/m`, in integer
    /// arithmetic and rounded once at the end.
    pub fn scaled_sflat_inv(&self, m: u64) -> Option<[[f64; 2]; 2]> {
        let n = self.n;
        let mb = BigInt::from(m);
        let ev = |cs: &[BigInt]| {
            let mut acc = BigInt::zero();
            for c in cs {
                acc = acc * &mb + c;
            }
            acc
        };
        // rows j: [Yᵀ | Xᵀ]
        let mut a: Vec<Vec<BigInt>> = (0..n)
            .map(|j| {
                let mut row: Vec<BigInt> = (0..n).map(|i| -ev(&self.e_int[i][j])).collect();
                row.extend((0..2).map(|k| ev(&self.f_int[k][j])));
                row
            })
            .collect();
        let det = bareiss_jordan(&mut a, n)?;
        let z: Vec<Vec<BigInt>> = a.iter().map(|r| r[n..].to_vec()).collect();
        let b = self.block(&z);
        let den = &det * &mb;
        let f = |x: &BigInt| ratio_to_f64(x, &den);
        Some([[f(&b[0][0]), f(&b[0][1])], [f(&b[1][0]), f(&b[1][1])]])
    }
}

/// Fraction-free Gauss-Jordan elimination on the first `n` columns of `a`.
/// On success the left block is `det·I` and the right block `det·A⁻¹B`;
/// returns `det` (up to the sign of the row permutation, which cancels).
fn bareiss_jordan(a: &mut [Vec<BigInt>], n: usize) -> Option<BigInt> {
    let cols = a[0].len();
    let mut prev = BigInt::one();
    for k in 0..n {
        let p = (k..n).find(|&r| !a[r][k].is_zero())?;
        a.swap(k, p);
        let pivot = a[k][k].clone();
        for i in 0..n {
            if i == k {
                continue;
            }
            let aik = a[i][k].clone();
            for j in 0..cols {
                if j == k {
                    continue;
                }
                let v = (&pivot * &a[i][j] - &aik * &a[k][j]) / &prev;
                a[i][j] = v;
            }
            a[i][k] = BigInt::zero();
        }
        prev = pivot;
    }
    Some(prev)
}

/// `x / d` for large integers without overflowing `f64` on the way.
fn ratio_to_f64(x: &BigInt, d: &BigInt) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let shift = x.bits() as i64 - d.bits() as i64 - 60;
    let q = if shift >= 0 { x / (d << shift as usize) } else { (x << (-shift) as usize) / d };
    q.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

/// Least squares for `u = a + b s` over pairs `(s, u)`.
fn line_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(s, u) in pts {
        sxx += (s - mx) * (s - mx);
        sxy += (s - mx) * (u - my);
    }
    let b = sxy / sxx;
    (my - b * mx, b)
}

pub fn geometric_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    let r = (t_max / t_min).ln() / (points - 1) as f64;
    (0..points).map(|i| t_min * (r * i as f64).exp()).collect()
}

pub const DEFAULT_GRID: (f64, f64, usize) = (1e-3, 1e-1, 20);

/// Fit `t·S♭⁻¹` on `grid`; returns `(lead_a, lin_a, lead_b, lin_b, offdiag, dropped)`.
fn fit_on_grid(curve: &JacobiCurve, grid: &[f64]) -> Result<(f64, f64, f64, f64, f64, usize), OracleError> {
    let vals: Vec<Option<(f64, [[f64; 2]; 2])>> = grid
        .par_iter()
        .map(|&t| {
            let m = (1.0 / t).round().max(1.0) as u64;
            Some((1.0 / m as f64, curve.scaled_sflat_inv(m)?))
        })
        .collect();
    let dropped = vals.iter().filter(|v| v.is_none()).count();
    if 2 * dropped > grid.len() {
        return Err(OracleError::IllConditioned { dropped, total: grid.len() });
    }
    let good: Vec<(f64, [[f64; 2]; 2])> = vals.into_iter().flatten().collect();
    let pa: Vec<(f64, f64)> = good.iter().map(|(t, m)| (t * t, m[0][0])).collect();
    let pb: Vec<(f64, f64)> = good.iter().map(|(t, m)| (t * t, m[1][1])).collect();
    let (a0, a1) = line_fit(&pa);
    let (b0, b1) = line_fit(&pb);
    let off = good[0].1[0][1] / good[0].0;
    Ok((a0, a1, b0, b1, off, dropped))
}

/// Laurent fit of the `(a1, b1)` block of `S♭(t)⁻¹` as `a/t + b t`. The
/// window `[t_max/100, t_max]` starts at `t_grid` and is halved until the
/// linear coefficient is stable to `1e−4` relative.
pub fn sflat_fit(model: &GroupModel, h: &[Q], t_grid: Option<(f64, f64, usize)>) -> Result<SflatFit, OracleError> {
    let curve = JacobiCurve::new(model, h)?;
    let (na, _) = young_diagram(model.kind);
    let (t_min, mut t_max, points) = t_grid.unwrap_or(DEFAULT_GRID);
    let ratio = t_max / t_min;
    let mut prev = fit_on_grid(&curve, &geometric_grid(t_min, t_max, points))?;
    let mut window = (t_min, t_max);
    for _ in 0..30 {
        t_max /= 2.0;
        let cur = fit_on_grid(&curve, &geometric_grid(t_max / ratio, t_max, points))?;
        let stable = (cur.1 - prev.1).abs() <= 1e-4 * cur.1.abs().max(1e-12);
        window = (t_max / ratio, t_max);
        prev = cur;
        if stable {
            break;
        }
    }
    let r = r11_closed(model.kind, h)?;
    let (lead_a, lin_a, lead_b, lin_b, offdiag, dropped) = prev;
    Ok(SflatFit {
        lead_a,
        lin_a,
        lead_b,
        lin_b,
        offdiag,
        window,
        dropped,
        expected_lead_a: -((na * na) as f64),
        expected_lin_a: (omega(na, na) * r).to_f64().unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{build_group, GroupKind};
    use crate::symfields::poly::{q, qr};

    #[test]
    fn taylor_matches_linear_flow() {
        // Heisenberg vertical motion is a rotation: h1 = cos(ct), h2 = sin(ct)
        // with c = h3 for (1, 0, c).
        let m = build_group(GroupKind::Goursat(3)).unwrap();
        let s0 = vec![q(0), q(0), q(0), q(1), q(0), q(2)];
        let f = TaylorFlow::new(&m, &s0, 12);
        let t = qr(1, 10);
        let p1 = horner(&f.state[3], &t).to_f64().unwrap();
        assert!((p1 - 0.2f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn integer_path_matches_exact() {
        let m = build_group(GroupKind::Goursat(4)).unwrap();
        let h = [qr(5, 13), qr(12, 13), qr(-1, 2), q(2)];
        let c = JacobiCurve::new(&m, &h).unwrap();
        let t = qr(1, 40);
        let exact = c.sflat_inv(&t).unwrap();
        let approx = c.scaled_sflat_inv(40).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = (&exact[i][j] * &t).to_f64().unwrap();
                assert!((e - approx[i][j]).abs() <= 1e-13 * e.abs().max(1.0), "{} {}", e, approx[i][j]);
            }
        }
    }

    #[test]
    fn heisenberg_fit() {
        let m = build_group(GroupKind::Goursat(3)).unwrap();
        let h = [qr(3, 5), qr(4, 5), qr(3, 2)];
        let fit = sflat_fit(&m, &h, None).unwrap();
        assert!(fit.checks(1e-6, 1e-3).iter().all(|c| c.pass), "{:?}", fit);
    }
}
