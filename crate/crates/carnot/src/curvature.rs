//! Closed-form curvature data: the `A_1`, `A_2` coefficients, `Ω`, the first
//! diagonal curvature `R_{aa,11}`, the leading and curvature matrices, and the
//! energy bounds for the Engel and Cartan groups.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::groups::{GroupKind, GroupModel};
use crate::regularity::{closed_form_status, RegularityStatus};
use crate::scalar::Scalar;
use crate::symfields::poly::{q, qr, Q};

/// Poles closer than this to zero are refused by the checked evaluators.
pub const POLE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("singular covector: |h{index}| = {value:e} is below the pole threshold")]
    SingularCovector { index: usize, value: f64 },
    #[error("geodesic is not ample and equiregular at t = 0: {0}")]
    NotAmpleEquiregular(String),
    #[error("unsupported group for this formula: {0}")]
    UnsupportedGroup(String),
    #[error("covector has {got} components, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

/// `(A_1(n), A_2(n))` in closed form.
pub fn coeff_a(n: usize) -> (Q, Q) {
    let n = n as i64;
    let a1 = qr((n + 3) * (n - 2) * (n - 3) * (n - 4), 8);
    let a2 = qr((n - 2) * (n - 3) * (n - 4), 3);
    (a1, a2)
}

/// `(A_1(n), A_2(n))` from their defining double sums (empty for `n < 5`).
pub fn coeff_a_sums(n: usize) -> (Q, Q) {
    let mut a1 = 0i64;
    let mut a2 = 0i64;
    if n >= 5 {
        let top = n as i64 - 5;
        for k in 0..=top {
            let inner: i64 = (0..=(top - k)).map(|j| k + j + 2).sum();
            a1 += (3 + k) * inner;
            a2 += inner;
        }
    }
    (q(a1), q(a2))
}

/// `Ω(n_a, n_b)`.
pub fn omega(na: usize, nb: usize) -> Q {
    let (a, b) = (na as i64, nb as i64);
    match (a - b).abs() {
        0 => qr(a, 4 * a * a - 1),
        1 => qr(1, 4 * (a + b)),
        _ => Q::zero(),
    }
}

fn check_pole<T: Scalar>(h: &[T], index: usize) -> Result<(), CurvatureError> {
    let m = h[index].magnitude();
    if m < POLE_THRESHOLD {
        return Err(CurvatureError::SingularCovector { index: index + 1, value: m });
    }
    Ok(())
}

fn c<T: Scalar>(num: i64, den: i64) -> T {
    T::from_q(&qr(num, den))
}

/// `R_{aa,11}` for the Goursat group `J^n`; `h_4 ≡ 0` when `n = 3`.
pub fn r11_goursat_unchecked<T: Scalar>(n: usize, h: &[T]) -> T {
    let ni = n as i64;
    let h4 = if n >= 4 { h[3].clone() } else { T::zero() };
    let (h1, h2, h3) = (h[0].clone(), h[1].clone(), h[2].clone());
    let first = c::<T>(-(ni - 1) * (12 + ni * (4 * ni - 17)), 6) * (h3.clone() * h3.clone() + h2.clone() * h4);
    let k = (ni - 1) * (ni - 2) * (ni - 3);
    if k == 0 {
        return first;
    }
    first - c::<T>(k, 1) * h3.clone() * h3 * h2.clone() * h2 / (h1.clone() * h1)
}

pub fn r11_goursat<T: Scalar>(n: usize, h: &[T]) -> Result<T, CurvatureError> {
    if h.len() != n {
        return Err(CurvatureError::Dimension { expected: n, got: h.len() });
    }
    if n >= 4 {
        check_pole(h, 0)?;
    }
    Ok(r11_goursat_unchecked(n, h))
}

/// `E = h_3²/2 + h_1 h_5 − h_2 h_4`.
pub fn cartan_energy<T: Scalar>(h: &[T]) -> T {
    h[2].clone() * h[2].clone() / T::from_i64(2) + h[0].clone() * h[4].clone() - h[1].clone() * h[3].clone()
}

/// `E = h_3²/2 − h_2 h_4`, the pendulum energy `c²/2 − α cos θ`.
pub fn engel_energy<T: Scalar>(h: &[T]) -> T {
    h[2].clone() * h[2].clone() / T::from_i64(2) - h[1].clone() * h[3].clone()
}

pub fn energy<T: Scalar>(kind: GroupKind, h: &[T]) -> Option<T> {
    match kind {
        GroupKind::Goursat(4) => Some(engel_energy(h)),
        GroupKind::Cartan => Some(cartan_energy(h)),
        _ => None,
    }
}

pub fn r11_cartan_unchecked<T: Scalar>(h: &[T]) -> T {
    let cross = h[0].clone() * h[3].clone() + h[1].clone() * h[4].clone();
    T::from_i64(6) * cartan_energy(h) - T::from_i64(8) * cross.clone() * cross / (h[2].clone() * h[2].clone())
}

pub fn r11_cartan<T: Scalar>(h: &[T]) -> Result<T, CurvatureError> {
    if h.len() != 5 {
        return Err(CurvatureError::Dimension { expected: 5, got: h.len() });
    }
    check_pole(h, 2)?;
    Ok(r11_cartan_unchecked(h))
}

pub fn r11<T: Scalar>(kind: GroupKind, h: &[T]) -> Result<T, CurvatureError> {
    match kind {
        GroupKind::Goursat(n) => r11_goursat(n, h),
        GroupKind::Cartan => r11_cartan(h),
    }
}

pub fn r11_unchecked<T: Scalar>(kind: GroupKind, h: &[T]) -> T {
    match kind {
        GroupKind::Goursat(n) => r11_goursat_unchecked(n, h),
        GroupKind::Cartan => r11_cartan_unchecked(h),
    }
}

/// Energy bound and the square it drops: Engel `4E` and `6 h_3²/h_1²`
/// (`6c² csc²θ` on the unit level), Cartan `6E` and `8(h_1h_4+h_2h_5)²/h_3²`.
pub fn energy_bound<T: Scalar>(kind: GroupKind, h: &[T]) -> Option<(T, T)> {
    match kind {
        GroupKind::Goursat(4) => {
            let sq = T::from_i64(6) * h[2].clone() * h[2].clone() / (h[0].clone() * h[0].clone());
            Some((T::from_i64(4) * engel_energy(h), sq))
        }
        GroupKind::Cartan => {
            let cross = h[0].clone() * h[3].clone() + h[1].clone() * h[4].clone();
            let sq = T::from_i64(8) * cross.clone() * cross / (h[2].clone() * h[2].clone());
            Some((T::from_i64(6) * cartan_energy(h), sq))
        }
        _ => None,
    }
}

/// Coefficient `3Ω(n_a, n_a)` relating `ℛ_{11}` and `R_{aa,11}`.
pub fn r_coefficient(kind: GroupKind) -> Q {
    let (na, _) = young_diagram(kind);
    omega(na, na) * q(3)
}

pub fn young_diagram(kind: GroupKind) -> (usize, usize) {
    match kind {
        GroupKind::Goursat(n) => (n - 1, 1),
        GroupKind::Cartan => (4, 1),
    }
}

/// Exact value with a float companion, serialized as `{"exact": "-4", "value": -4.0}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Exact {
    pub exact: String,
    pub value: f64,
}

impl From<&Q> for Exact {
    fn from(x: &Q) -> Self {
        Exact { exact: x.to_string(), value: x.to_f64() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    pub group: String,
    pub covector: Vec<Exact>,
    pub diagram: [usize; 2],
    #[serde(rename = "I")]
    pub i_matrix: [[Exact; 2]; 2],
    #[serde(rename = "R")]
    pub r_matrix: [[Exact; 2]; 2],
    pub r11: Exact,
    pub omega: Exact,
    #[serde(rename = "trace_I")]
    pub trace_i: usize,
    pub bound: Option<Exact>,
    pub unit_speed: bool,
    pub basis: &'static str,
    #[serde(skip)]
    pub r11_exact: Q,
    #[serde(skip)]
    pub r_exact: [[Q; 2]; 2],
}

fn diag(a: Q, b: Q) -> [[Q; 2]; 2] {
    [[a, Q::zero()], [Q::zero(), b]]
}

fn exact_matrix(m: &[[Q; 2]; 2]) -> [[Exact; 2]; 2] {
    [[(&m[0][0]).into(), (&m[0][1]).into()], [(&m[1][0]).into(), (&m[1][1]).into()]]
}

/// Leading matrix `ℐ`, curvature matrix `ℛ` and related data at a covector
/// over the origin given by its frame coordinates.
pub fn curvature_operator(model: &GroupModel, h: &[Q]) -> Result<CurvatureReport, CurvatureError> {
    let kind = model.kind;
    if h.len() != model.dim {
        return Err(CurvatureError::Dimension { expected: model.dim, got: h.len() });
    }
    match closed_form_status(kind, h) {
        RegularityStatus::Abnormal => {
            return Err(CurvatureError::NotAmpleEquiregular("geodesic is abnormal (not ample)".into()))
        }
        RegularityStatus::Degenerate => {
            return Err(CurvatureError::NotAmpleEquiregular("covector has zero speed".into()))
        }
        _ => {}
    }
    let r11v = r11(kind, h)?;
    let (na, nb) = young_diagram(kind);
    let om = omega(na, na);
    let coeff = &om * q(3);
    let i_m = diag(q((na * na) as i64), q((nb * nb) as i64));
    let r_m = diag(&coeff * &r11v, Q::zero());
    let bound = energy_bound(kind, h).map(|(b, _)| Exact::from(&b));
    let unit = &h[0] * &h[0] + &h[1] * &h[1] == Q::one();
    Ok(CurvatureReport {
        group: kind.to_string(),
        covector: h.iter().map(Exact::from).collect(),
        diagram: [na, nb],
        i_matrix: exact_matrix(&i_m),
        r_matrix: exact_matrix(&r_m),
        r11: (&r11v).into(),
        omega: (&om).into(),
        trace_i: na * na + nb * nb,
        bound,
        unit_speed: unit,
        basis: "canonical-frame projection",
        r11_exact: r11v,
        r_exact: r_m,
    })
}

/// Two-term model of `S♭(t)⁻¹`: `−δ_{ab} n_a²/t + R_{ab,11} Ω(n_a,n_b) t`,
/// with only the `aa` entry curved.
pub fn sflat_model(diagram: (usize, usize), r11: f64, t: f64) -> [[f64; 2]; 2] {
    let (na, nb) = diagram;
    let om = omega(na, na).to_f64();
    [[-((na * na) as f64) / t + r11 * om * t, 0.0], [0.0, -((nb * nb) as f64) / t]]
}

/// Sign of `x` as `−1`, `0` or `1`.
pub fn sign_of(x: &Q) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}
