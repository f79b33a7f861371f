//! Growth vectors of geodesics, ample and equiregular classification, and
//! times of loss of equiregularity.

use serde::Serialize;
use thiserror::Error;

use crate::groups::{Covector, GroupKind, GroupModel};
use crate::hamiltonian::{integrate_with, FlowError, FlowOptions, FlowSystem};
use crate::scalar::Scalar;
use crate::symfields::field::RatVecField;
use crate::symfields::phase::PhaseSpace;
use crate::symfields::poly::{Poly, Q};

pub const BISECTION_TOL: f64 = 1e-10;
pub const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegularityError {
    #[error("covector component {0} is not finite")]
    NonFinite(f64),
    #[error("no usable modulus for the exact rank")]
    NoUsablePrime,
    #[error("geodesic is not ample")]
    NotAmple,
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RegularityStatus {
    AmpleEquiregular,
    /// Ample, but the covector sits at a time of loss of equiregularity.
    AmpleNotEquiregular,
    Abnormal,
    /// `h_1 = h_2 = 0`: the covector generates no motion.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub growth: Vec<usize>,
    pub step: usize,
    pub ample: bool,
    pub equiregular: bool,
    pub abnormal: bool,
    pub loss_times: Vec<f64>,
    pub young_diagram: Option<[usize; 2]>,
}

fn is_zero_tol<T: Scalar>(x: &T, tol: f64) -> bool {
    x.is_zero() || x.magnitude() <= tol
}

/// Classification at a covector from the vanishing pattern of its frame
/// coordinates; components with magnitude `≤ tol` count as zero.
pub fn closed_form_status_tol<T: Scalar>(kind: GroupKind, h: &[T], tol: f64) -> RegularityStatus {
    let z = |i: usize| is_zero_tol(&h[i], tol);
    if z(0) && z(1) {
        return RegularityStatus::Degenerate;
    }
    match kind {
        GroupKind::Goursat(3) => RegularityStatus::AmpleEquiregular,
        GroupKind::Goursat(_) => {
            if !z(0) {
                RegularityStatus::AmpleEquiregular
            } else if !z(2) {
                RegularityStatus::AmpleNotEquiregular
            } else {
                RegularityStatus::Abnormal
            }
        }
        GroupKind::Cartan => {
            if !z(2) {
                RegularityStatus::AmpleEquiregular
            } else {
                let cross = h[0].clone() * h[3].clone() + h[1].clone() * h[4].clone();
                if is_zero_tol(&cross, tol) {
                    RegularityStatus::Abnormal
                } else {
                    RegularityStatus::AmpleNotEquiregular
                }
            }
        }
    }
}

pub fn closed_form_status<T: Scalar>(kind: GroupKind, h: &[T]) -> RegularityStatus {
    closed_form_status_tol(kind, h, 0.0)
}

/// Growth vector predicted from the vanishing pattern of `h`.
pub fn growth_vector_closed_form<T: Scalar>(kind: GroupKind, h: &[T]) -> GrowthReport {
    growth_vector_closed_form_tol(kind, h, 0.0)
}

pub fn growth_vector_closed_form_tol<T: Scalar>(kind: GroupKind, h: &[T], tol: f64) -> GrowthReport {
    let n = kind.dim();
    let status = closed_form_status_tol(kind, h, tol);
    let growth: Vec<usize> = match (kind, status) {
        (_, RegularityStatus::Degenerate) => vec![2],
        (_, RegularityStatus::AmpleEquiregular) => (2..=n).collect(),
        (GroupKind::Goursat(_), RegularityStatus::AmpleNotEquiregular) => {
            let mut g = vec![2];
            let mut v = 3;
            while v <= n {
                g.push(v);
                if v < n {
                    g.push(v);
                }
                v += 1;
            }
            g
        }
        (GroupKind::Cartan, RegularityStatus::AmpleNotEquiregular) => vec![2, 3, 4, 4, 5],
        (GroupKind::Goursat(_), RegularityStatus::Abnormal) => vec![2, 3],
        (GroupKind::Cartan, RegularityStatus::Abnormal) => vec![2, 3, 4],
    };
    let ample = matches!(status, RegularityStatus::AmpleEquiregular | RegularityStatus::AmpleNotEquiregular);
    let equiregular = status == RegularityStatus::AmpleEquiregular;
    let young = if ample { Some(young_diagram(kind)) } else { None };
    GrowthReport {
        step: growth.len(),
        growth,
        ample,
        equiregular,
        abnormal: !ample,
        loss_times: Vec::new(),
        young_diagram: young,
    }
}

pub fn young_diagram(kind: GroupKind) -> [usize; 2] {
    let (a, b) = crate::curvature::young_diagram(kind);
    [a, b]
}

/// Iterated brackets `ad_{H⃗}^k ∂_{p_j}` near the zero section of the base,
/// compiled for evaluation over the origin.
/// Moduli for the exact rank. A rank over `𝔽_p` never exceeds the rank over
/// `ℚ` and equals it unless `p` divides every nonzero maximal minor; the
/// larger of the two ranks is taken.
pub const RANK_PRIMES: [u64; 2] = [2_305_843_009_213_693_951, 1_000_000_007];

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> Option<u64> {
    (a % p != 0).then(|| pow_mod(a, p - 2, p))
}

fn bigint_mod(x: &num_bigint::BigInt, p: u64) -> u64 {
    use num_traits::ToPrimitive;
    let r = x % num_bigint::BigInt::from(p);
    let r = r.to_i128().expect("residue fits");
    r.rem_euclid(p as i128) as u64
}

fn rational_mod(x: &Q, p: u64) -> Option<u64> {
    Some(mul_mod(bigint_mod(x.numer(), p), inv_mod(bigint_mod(x.denom(), p), p)?, p))
}

/// The exact value of a finite double, reduced mod `p`.
fn f64_mod(x: f64, p: u64) -> Result<Option<u64>, RegularityError> {
    if !x.is_finite() {
        return Err(RegularityError::NonFinite(x));
    }
    if x == 0.0 {
        return Ok(Some(0));
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    let m = mant % p;
    let m = if x < 0.0 { (p - m) % p } else { m };
    let two = if e >= 0 { Some(pow_mod(2, e as u64, p)) } else { inv_mod(pow_mod(2, (-e) as u64, p), p) };
    Ok(two.map(|t| mul_mod(m, t, p)))
}

/// Polynomial with coefficients reduced modulo each of [`RANK_PRIMES`];
/// `None` where a denominator vanishes.
#[derive(Clone, Debug)]
struct ModPoly {
    terms: Vec<([Option<u64>; 2], Vec<(usize, u64)>)>,
}

impl ModPoly {
    fn new(p: &Poly) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let vars = m.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e as u64)).collect();
                (RANK_PRIMES.map(|q| rational_mod(c, q)), vars)
            })
            .collect();
        ModPoly { terms }
    }

    fn eval(&self, k: usize, x: &[u64]) -> Option<u64> {
        let p = RANK_PRIMES[k];
        let mut s = 0;
        for (c, vars) in &self.terms {
            let mut t = (*c)[k]?;
            for &(i, e) in vars {
                t = mul_mod(t, pow_mod(x[i], e, p), p);
            }
            s = (s + t) % p;
        }
        Some(s)
    }
}

/// Column space built one vector at a time by elimination mod `p`.
struct Echelon {
    p: u64,
    /// Reduced basis vectors with their pivot index.
    basis: Vec<(usize, Vec<u64>)>,
}

impl Echelon {
    fn insert(&mut self, mut v: Vec<u64>) {
        let p = self.p;
        for (piv, b) in &self.basis {
            let f = v[*piv];
            if f != 0 {
                for (x, y) in v.iter_mut().zip(b) {
                    *x = (*x + p - mul_mod(f, *y, p)) % p;
                }
            }
        }
        if let Some(piv) = v.iter().position(|&x| x != 0) {
            let inv = inv_mod(v[piv], p).expect("nonzero mod prime");
            for x in v.iter_mut() {
                *x = mul_mod(*x, inv, p);
            }
            for (_, b) in self.basis.iter_mut() {
                let f = b[piv];
                if f != 0 {
                    for (x, y) in b.iter_mut().zip(&v) {
                        *x = (*x + p - mul_mod(f, *y, p)) % p;
                    }
                }
            }
            self.basis.push((piv, v));
        }
    }
}

/// Exact growth vectors from the ranks of `{ad_H^k ∂_{p_j}}` over the origin.
#[derive(Clone, Debug)]
pub struct RankOracle {
    pub n: usize,
    pub max_order: usize,
    /// `fields[k][j]`: components of `ad^k ∂_{p_j}` as polynomials in `p`.
    fields: Vec<Vec<Vec<ModPoly>>>,
}

impl RankOracle {
    pub fn new(model: &GroupModel, max_order: usize) -> Self {
        let ps = PhaseSpace::new(model);
        let hv = ps.h_vec();
        let n = ps.n();
        let order = max_order as u32;
        let mut cur: Vec<RatVecField> = (0..n).map(|j| RatVecField::coordinate(2 * n, n + j)).collect();
        let mut fields = Vec::with_capacity(max_order + 1);
        for k in 0..=max_order {
            fields.push(cur.iter().map(|v| at_origin(&ps, v)).collect());
            if k < max_order {
                let budget = order - k as u32;
                cur = cur.iter().map(|v| ps.ad_h_jet(&hv, v, budget)).collect();
            }
        }
        RankOracle { n, max_order, fields }
    }

    /// Flag dimensions `k_1, k_2, …` at the covector over the origin with
    /// frame coordinates `h`, each double read as the rational it encodes.
    /// Stops once the full dimension is reached; when it is not reached
    /// trailing repeats are dropped.
    pub fn growth_vector(&self, h: &[f64]) -> Result<Vec<usize>, RegularityError> {
        let n = self.n;
        let mut best: Option<Vec<usize>> = None;
        'primes: for (k, &p) in RANK_PRIMES.iter().enumerate() {
            let mut pt = vec![0u64; n];
            for &x in h {
                match f64_mod(x, p)? {
                    Some(r) => pt.push(r),
                    None => continue 'primes,
                }
            }
            let mut ech = Echelon { p, basis: Vec::new() };
            let mut dims = Vec::new();
            for i in 0..=self.max_order {
                for j in 0..n {
                    let col: Option<Vec<u64>> = self.fields[i][j].iter().map(|c| c.eval(k, &pt)).collect();
                    match col {
                        Some(c) => ech.insert(c),
                        None => continue 'primes,
                    }
                }
                if i > 0 {
                    dims.push(ech.basis.len() - n);
                    if ech.basis.len() == 2 * n {
                        break;
                    }
                }
            }
            best = Some(match best {
                None => dims,
                Some(b) => {
                    if b.len() != dims.len() {
                        // a shorter sequence reached full rank sooner
                        if b.len() < dims.len() { b } else { dims }
                    } else {
                        b.iter().zip(&dims).map(|(x, y)| *x.max(y)).collect()
                    }
                }
            });
        }
        let mut dims = best.ok_or(RegularityError::NoUsablePrime)?;
        if dims.last() != Some(&n) {
            while dims.len() > 1 && dims[dims.len() - 1] == dims[dims.len() - 2] {
                dims.pop();
            }
        }
        Ok(dims)
    }
}

fn at_origin(ps: &PhaseSpace, v: &RatVecField) -> Vec<ModPoly> {
    let bv = ps.base_vars();
    v.comps()
        .iter()
        .map(|c| {
            debug_assert!(c.is_polynomial());
            let num = c.num().at_zero(&bv).scale(&c.den().constant_term().recip());
            ModPoly::new(&num)
        })
        .collect()
}

/// Rank-oracle growth vector at time `t` along the geodesic of `h0`, by
/// left invariance evaluated over the origin at `h(t)`.
pub fn growth_vector_rank_oracle(
    model: &GroupModel,
    oracle: &RankOracle,
    h0: &[f64],
    t: f64,
) -> Result<Vec<usize>, RegularityError> {
    let h = if t == 0.0 {
        h0.to_vec()
    } else {
        let sys = FlowSystem::new(model);
        let opts = FlowOptions { drift_bound: f64::INFINITY, ..Default::default() };
        let tr = integrate_with(&sys, &Covector::at_origin(h0.to_vec()), t, &opts)?;
        tr.h.last().unwrap().clone()
    };
    oracle.growth_vector(&h)
}

/// Report from a rank-oracle sequence.
pub fn report_from_sequence(kind: GroupKind, growth: Vec<usize>) -> GrowthReport {
    let n = kind.dim();
    let ample = growth.last() == Some(&n);
    let equiregular = ample && growth.len() == n - 1;
    GrowthReport {
        step: growth.len(),
        growth,
        ample,
        equiregular,
        abnormal: !ample,
        loss_times: Vec::new(),
        young_diagram: if ample { Some(young_diagram(kind)) } else { None },
    }
}

/// Index of the frame coordinate whose zeros are the loss times, if any.
pub fn loss_coordinate(kind: GroupKind) -> Option<usize> {
    match kind {
        GroupKind::Goursat(3) => None,
        GroupKind::Goursat(_) => Some(0),
        GroupKind::Cartan => Some(2),
    }
}

/// Times in `[0, T]` at which the geodesic from `h0` (over the origin) loses
/// equiregularity.
pub fn equiregularity_loss_times(model: &GroupModel, h0: &[f64], t_end: f64, step: f64) -> Result<Vec<f64>, RegularityError> {
    match closed_form_status(model.kind, h0) {
        RegularityStatus::Abnormal | RegularityStatus::Degenerate => return Err(RegularityError::NotAmple),
        _ => {}
    }
    let idx = match loss_coordinate(model.kind) {
        Some(i) => i,
        None => return Ok(Vec::new()),
    };
    let sys = FlowSystem::new(model);
    let opts = FlowOptions { step, with_variational: false, drift_bound: f64::INFINITY };
    let tr = integrate_with(&sys, &Covector::at_origin(h0.to_vec()), t_end, &opts)?;
    let g = |k: usize| tr.h[k][idx];
    let mut out: Vec<f64> = Vec::new();
    let push = |out: &mut Vec<f64>, t: f64| {
        if out.last().map_or(true, |&l| (t - l).abs() > DEDUP_TOL) {
            out.push(t);
        }
    };
    for k in 0..tr.len() {
        if g(k) == 0.0 {
            push(&mut out, tr.times[k]);
            continue;
        }
        if k + 1 < tr.len() && g(k + 1) != 0.0 && g(k).signum() != g(k + 1).signum() {
            let t = bisect(&sys, &tr.states[k], tr.times[k], tr.times[k + 1], idx);
            push(&mut out, t);
        }
    }
    Ok(out)
}

fn bisect(sys: &FlowSystem, s0: &[f64], t0: f64, t1: f64, idx: usize) -> f64 {
    let value_at = |t: f64| {
        let mut s = s0.to_vec();
        if t > t0 {
            sys.rk4_step(&mut s, None, t - t0);
        }
        sys.h_of_state(&s)[idx]
    };
    let (mut a, mut b) = (t0, t1);
    let mut ga = value_at(a);
    while b - a > BISECTION_TOL {
        let mid = 0.5 * (a + b);
        let gm = value_at(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_group;
    use crate::symfields::poly::q;

    #[test]
    fn closed_form_examples() {
        let r = growth_vector_closed_form(GroupKind::Goursat(5), &[q(1), q(0), q(0), q(0), q(1)]);
        assert_eq!(r.growth, vec![2, 3, 4, 5]);
        let r = growth_vector_closed_form(GroupKind::Goursat(4), &[q(0), q(1), q(1), q(0)]);
        assert_eq!(r.growth, vec![2, 3, 3, 4]);
        assert!(r.ample && !r.equiregular);
        let r = growth_vector_closed_form(GroupKind::Goursat(5), &[q(0), q(1), q(1), q(0), q(0)]);
        assert_eq!(r.growth, vec![2, 3, 3, 4, 4, 5]);
        let r = growth_vector_closed_form(GroupKind::Cartan, &[q(1), q(0), q(0), q(1), q(0)]);
        assert_eq!(r.growth, vec![2, 3, 4, 4, 5]);
        let r = growth_vector_closed_form(GroupKind::Cartan, &[q(1), q(0), q(0), q(0), q(1)]);
        assert!(r.abnormal);
        let r = growth_vector_closed_form(GroupKind::Goursat(3), &[q(0), q(1), q(0)]);
        assert_eq!(r.growth, vec![2, 3]);
        assert_eq!(r.young_diagram, Some([2, 1]));
    }

    #[test]
    fn rank_oracle_examples() {
        let m4 = build_group(GroupKind::Goursat(4)).unwrap();
        let o4 = RankOracle::new(&m4, 8);
        assert_eq!(o4.growth_vector(&[1.0, 0.0, 1.0, 1.0]).unwrap(), vec![2, 3, 4]);
        assert_eq!(o4.growth_vector(&[0.0, 1.0, 0.0, 1.0]).unwrap(), vec![2, 3]);
        assert_eq!(o4.growth_vector(&[0.0, 1.0, 1.0, 0.5]).unwrap(), vec![2, 3, 3, 4]);
        let mc = build_group(GroupKind::Cartan).unwrap();
        let oc = RankOracle::new(&mc, 8);
        assert_eq!(oc.growth_vector(&[1.0, 0.0, 1.0, 0.0, 0.0]).unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(oc.growth_vector(&[1.0, 0.0, 0.0, 1.0, 0.0]).unwrap(), vec![2, 3, 4, 4, 5]);
        assert_eq!(oc.growth_vector(&[1.0, 0.0, 0.0, 0.0, 1.0]).unwrap(), vec![2, 3, 4]);
    }

    #[test]
    fn doubles_reduce_exactly() {
        let p = RANK_PRIMES[1];
        assert_eq!(f64_mod(0.5, p).unwrap(), inv_mod(2, p));
        assert_eq!(f64_mod(-3.0, p).unwrap(), Some(p - 3));
        assert_eq!(f64_mod(0.375, p).unwrap(), Some(mul_mod(3, inv_mod(8, p).unwrap(), p)));
        assert!(f64_mod(f64::NAN, p).is_err());
        assert_eq!(rational_mod(&crate::symfields::poly::qr(-1, 4), p), f64_mod(-0.25, p).unwrap());
    }

    #[test]
    fn small_pole_coordinate_in_high_dimension() {
        // the new flag direction at each order scales like a power of h₁
        let m = build_group(GroupKind::Goursat(8)).unwrap();
        let o = RankOracle::new(&m, 13);
        let h = [0.3883, 1.7698, 1.7030, -0.7317, 0.7945, -0.4956, 0.6249, 1.9662];
        assert_eq!(o.growth_vector(&h).unwrap(), vec![2, 3, 4, 5, 6, 7, 8]);
        let h = [1e-3, 1.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5];
        assert_eq!(o.growth_vector(&h).unwrap(), vec![2, 3, 4, 5, 6, 7, 8]);
    }

    #[test]
    fn abnormal_has_no_loss_times() {
        let m4 = build_group(GroupKind::Goursat(4)).unwrap();
        assert_eq!(equiregularity_loss_times(&m4, &[0.0, 1.0, 0.0, 1.0], 1.0, 1e-3), Err(RegularityError::NotAmple));
        let m3 = build_group(GroupKind::Goursat(3)).unwrap();
        assert!(equiregularity_loss_times(&m3, &[0.0, 1.0, 1.0], 5.0, 1e-3).unwrap().is_empty());
    }

    #[test]
    fn engel_c6_loss_times() {
        // θ(t) = t, h_1 = −sin θ vanishes at multiples of π
        let m4 = build_group(GroupKind::Goursat(4)).unwrap();
        let h = crate::groups::h_from_chart(GroupKind::Goursat(4), 0.3, 1.0, 0.0, 0.0).unwrap();
        let lt = equiregularity_loss_times(&m4, &h, 10.0, 1e-3).unwrap();
        let expect: Vec<f64> = (1..=3).map(|k| k as f64 * std::f64::consts::PI - 0.3).collect();
        assert_eq!(lt.len(), expect.len());
        for (a, b) in lt.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
        }
    }
}
