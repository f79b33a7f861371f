//! Group models: Goursat groups `J^n` and the Cartan group, given by
//! polynomial frame fields and their structure constants.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{invert, matvec, Scalar};
use crate::symfields::field::RatVecField;
use crate::symfields::poly::{q, qr, Mono, Poly, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error("frame realization does not reproduce the structure table: {0}")]
    RealizationMismatch(String),
    #[error("frame matrix is singular at the given base point")]
    SingularFrame,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    Goursat(usize),
    Cartan,
}

impl GroupKind {
    pub fn dim(&self) -> usize {
        match self {
            GroupKind::Goursat(n) => *n,
            GroupKind::Cartan => 5,
        }
    }

    pub fn is_engel(&self) -> bool {
        matches!(self, GroupKind::Goursat(4))
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Goursat(n) => write!(f, "goursat:{}", n),
            GroupKind::Cartan => write!(f, "cartan"),
        }
    }
}

impl FromStr for GroupKind {
    type Err = GroupError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("cartan") {
            return Ok(GroupKind::Cartan);
        }
        if let Some(rest) = s.strip_prefix("goursat:") {
            let n: usize = rest.parse().map_err(|_| GroupError::UnsupportedGroup(s.to_string()))?;
            if n < 3 {
                return Err(GroupError::UnsupportedGroup(s.to_string()));
            }
            return Ok(GroupKind::Goursat(n));
        }
        match s {
            "heisenberg" => Ok(GroupKind::Goursat(3)),
            "engel" => Ok(GroupKind::Goursat(4)),
            _ => Err(GroupError::UnsupportedGroup(s.to_string())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroupModel {
    pub kind: GroupKind,
    pub dim: usize,
    pub rank: usize,
    /// `frame[i][j]`: coefficient of `∂_j` in `X_{i+1}`, a polynomial in the
    /// base coordinates.
    pub frame: Vec<Vec<Poly>>,
    /// `structure[i][j][k] = c_{ij}^k` with `[X_i, X_j] = Σ_k c_{ij}^k X_k`.
    pub structure: Vec<Vec<Vec<Q>>>,
    pub strata: Vec<usize>,
    pub base_names: Vec<String>,
    /// Set when the printed coordinate realization had to be adjusted.
    pub repair_note: Option<String>,
}

impl GroupModel {
    pub fn weights(&self) -> Vec<usize> {
        let mut w = Vec::new();
        for (layer, &d) in self.strata.iter().enumerate() {
            w.extend(std::iter::repeat(layer + 1).take(d));
        }
        w
    }

    pub fn step(&self) -> usize {
        self.strata.len()
    }

    /// Frame field `X_{i+1}` as a vector field on the base.
    pub fn frame_field(&self, i: usize) -> RatVecField {
        RatVecField::from_polys(self.frame[i].clone())
    }

    /// `Σ_k c_{ij}^k X_k` as a base field.
    pub fn structure_field(&self, i: usize, j: usize) -> RatVecField {
        let mut acc = RatVecField::zero(self.dim);
        for (k, c) in self.structure[i][j].iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add(&self.frame_field(k).scale_q(c));
            }
        }
        acc
    }

    /// Index of the variable that carries the pole of the curvature formula
    /// (`h_1` for Goursat, `h_3` for Cartan), zero-based.
    pub fn pole_index(&self) -> usize {
        match self.kind {
            GroupKind::Goursat(_) => 0,
            GroupKind::Cartan => 2,
        }
    }

    /// Row lengths `(n_a, n_b)` of the Young diagram of ample equiregular
    /// geodesics.
    pub fn young_diagram(&self) -> (usize, usize) {
        match self.kind {
            GroupKind::Goursat(n) => (n - 1, 1),
            GroupKind::Cartan => (4, 1),
        }
    }

    /// Check every bracket of the realization against the structure table.
    pub fn validate(&self) -> Result<(), GroupError> {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let br = self.frame_field(i).bracket(&self.frame_field(j));
                if br != self.structure_field(i, j) {
                    return Err(GroupError::RealizationMismatch(format!(
                        "[X{},X{}] = {}",
                        i + 1,
                        j + 1,
                        br.fmt_with(&self.base_names)
                    )));
                }
            }
        }
        Ok(())
    }
}

fn structure_table(dim: usize, rels: &[(usize, usize, usize)]) -> Vec<Vec<Vec<Q>>> {
    let mut c = vec![vec![vec![Q::zero(); dim]; dim]; dim];
    for &(i, j, k) in rels {
        c[i - 1][j - 1][k - 1] = Q::one();
        c[j - 1][i - 1][k - 1] = -Q::one();
    }
    c
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

fn goursat(n: usize) -> GroupModel {
    let dim = n;
    let x = Poly::var(dim, 0);
    let mut frame = Vec::with_capacity(n);
    let mut x1 = vec![Poly::zero(dim); dim];
    x1[0] = Poly::one(dim);
    frame.push(x1);
    for i in 0..=(n - 2) {
        let mut f = vec![Poly::zero(dim); dim];
        for j in i..=(n - 2) {
            f[1 + j] = x.pow((j - i) as u32).scale(&qr(1, factorial(j - i)));
        }
        frame.push(f);
    }
    let rels: Vec<(usize, usize, usize)> = (2..n).map(|i| (1, i, i + 1)).collect();
    let mut strata = vec![2];
    strata.extend(std::iter::repeat(1).take(n - 2));
    let mut base_names = vec!["x".to_string()];
    base_names.extend((0..=(n - 2)).map(|j| format!("y{}", j)));
    GroupModel {
        kind: GroupKind::Goursat(n),
        dim,
        rank: 2,
        frame,
        structure: structure_table(dim, &rels),
        strata,
        base_names,
        repair_note: None,
    }
}

/// Cartan realization with the given signs on the `∂_z` terms of `X_1`, `X_2`.
fn cartan_with_signs(s1: i64, s2: i64) -> GroupModel {
    let d = 5;
    let v = |i| Poly::var(d, i);
    let (x, y) = (v(0), v(1));
    let r2 = (&(&x * &x) + &(&y * &y)).scale(&qr(1, 2));
    let zero = || Poly::zero(d);
    let one = || Poly::one(d);
    let x1 = vec![one(), zero(), y.scale(&qr(s1, 2)), zero(), -&r2];
    let x2 = vec![zero(), one(), x.scale(&qr(s2, 2)), r2.clone(), zero()];
    let x3 = vec![zero(), zero(), one(), x.clone(), y.clone()];
    let x4 = vec![zero(), zero(), zero(), one(), zero()];
    let x5 = vec![zero(), zero(), zero(), zero(), one()];
    GroupModel {
        kind: GroupKind::Cartan,
        dim: d,
        rank: 2,
        frame: vec![x1, x2, x3, x4, x5],
        structure: structure_table(d, &[(1, 2, 3), (1, 3, 4), (2, 3, 5)]),
        strata: vec![2, 1, 2],
        base_names: ["x", "y", "z", "v", "w"].iter().map(|s| s.to_string()).collect(),
        repair_note: None,
    }
}

/// Build and validate a group model.
pub fn build_group(kind: GroupKind) -> Result<GroupModel, GroupError> {
    match kind {
        GroupKind::Goursat(n) => {
            if n < 3 {
                return Err(GroupError::UnsupportedGroup(format!("goursat:{}", n)));
            }
            let m = goursat(n);
            m.validate()?;
            Ok(m)
        }
        GroupKind::Cartan => {
            // Printed realization first, then sign variants of the z-terms.
            let candidates = [(-1, -1), (-1, 1), (1, -1), (1, 1)];
            let mut last_err = None;
            for (idx, &(s1, s2)) in candidates.iter().enumerate() {
                let mut m = cartan_with_signs(s1, s2);
                match m.validate() {
                    Ok(()) => {
                        if idx > 0 {
                            m.repair_note = Some(format!(
                                "z-coefficients of X1, X2 set to {}y/2 and {}x/2",
                                if s1 < 0 { "-" } else { "+" },
                                if s2 < 0 { "-" } else { "+" }
                            ));
                        }
                        return Ok(m);
                    }
                    Err(e) => last_err = Some(e),
                }
            }
            Err(last_err.unwrap())
        }
    }
}

/// Linear maps between momenta `p` and frame coordinates `h = A p`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberMap<T> {
    pub a: Vec<Vec<T>>,
    pub a_inv: Vec<Vec<T>>,
}

impl<T: Scalar> FiberMap<T> {
    pub fn to_h(&self, p: &[T]) -> Vec<T> {
        matvec(&self.a, p)
    }

    pub fn to_p(&self, h: &[T]) -> Vec<T> {
        matvec(&self.a_inv, h)
    }
}

/// Frame matrix `A(base)` (rows are frame fields) and its inverse.
pub fn fiber_transform<T: Scalar>(model: &GroupModel, base: &[T]) -> Result<FiberMap<T>, GroupError> {
    if base.len() != model.dim {
        return Err(GroupError::Dimension { expected: model.dim, got: base.len() });
    }
    let a: Vec<Vec<T>> = model.frame.iter().map(|row| row.iter().map(|p| p.eval(base)).collect()).collect();
    let a_inv = invert(&a).ok_or(GroupError::SingularFrame)?;
    Ok(FiberMap { a, a_inv })
}

/// A point of the cotangent bundle in canonical coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Covector<T> {
    pub base: Vec<T>,
    pub p: Vec<T>,
}

impl<T: Scalar> Covector<T> {
    pub fn from_h(model: &GroupModel, base: Vec<T>, h: &[T]) -> Result<Self, GroupError> {
        if h.len() != model.dim {
            return Err(GroupError::Dimension { expected: model.dim, got: h.len() });
        }
        let fm = fiber_transform(model, &base)?;
        let p = fm.to_p(h);
        Ok(Covector { base, p })
    }

    /// Covector over the identity (origin), where `p = h`.
    pub fn at_origin(h: Vec<T>) -> Self {
        Covector { base: vec![T::zero(); h.len()], p: h }
    }

    pub fn h(&self, model: &GroupModel) -> Result<Vec<T>, GroupError> {
        Ok(fiber_transform(model, &self.base)?.to_h(&self.p))
    }

    pub fn state(&self) -> Vec<T> {
        self.base.iter().chain(self.p.iter()).cloned().collect()
    }

    pub fn from_state(s: &[T]) -> Self {
        let n = s.len() / 2;
        Covector { base: s[..n].to_vec(), p: s[n..].to_vec() }
    }
}

/// `H = (h_1² + h_2²)/2`.
pub fn hamiltonian<T: Scalar>(h: &[T]) -> T {
    let two = T::from_i64(2);
    (h[0].clone() * h[0].clone() + h[1].clone() * h[1].clone()) / two
}

pub fn is_unit_speed(h: &[Q]) -> bool {
    &h[0] * &h[0] + &h[1] * &h[1] == Q::one()
}

/// Chart coordinates read off frame coordinates on the unit level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub rho: f64,
    pub theta: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: Option<f64>,
}

/// Engel: `h_1 = ρ cos(θ+π/2)`, `h_2 = ρ sin(θ+π/2)`, `c = h_3`, `α = h_4`.
/// Cartan: `h_1 = ρ cos θ`, `h_2 = ρ sin θ`, `c = h_3`,
/// `(h_4, h_5) = α (sin β, −cos β)` with `α ≥ 0`.
pub fn chart_of(kind: GroupKind, h: &[f64]) -> Option<Chart> {
    let rho = h[0].hypot(h[1]);
    match kind {
        GroupKind::Goursat(4) => {
            let theta = wrap_angle(h[1].atan2(h[0]) - std::f64::consts::FRAC_PI_2);
            Some(Chart { rho, theta, c: h[2], alpha: h[3], beta: None })
        }
        GroupKind::Cartan => {
            let alpha = h[3].hypot(h[4]);
            let beta = if alpha == 0.0 { 0.0 } else { h[3].atan2(-h[4]) };
            Some(Chart { rho, theta: h[1].atan2(h[0]), c: h[2], alpha, beta: Some(beta) })
        }
        _ => None,
    }
}

/// Frame coordinates on the unit level from chart coordinates.
pub fn h_from_chart(kind: GroupKind, theta: f64, c: f64, alpha: f64, beta: f64) -> Option<Vec<f64>> {
    match kind {
        GroupKind::Goursat(4) => {
            let t = theta + std::f64::consts::FRAC_PI_2;
            Some(vec![t.cos(), t.sin(), c, alpha])
        }
        GroupKind::Cartan => Some(vec![theta.cos(), theta.sin(), c, alpha * beta.sin(), -alpha * beta.cos()]),
        _ => None,
    }
}

/// Angle in `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Exact polynomial frame matrix in a phase-space ring of `2·dim` variables,
/// base coordinates first.
pub fn frame_matrix_sym(model: &GroupModel) -> Vec<Vec<Poly>> {
    let nv = 2 * model.dim;
    model.frame.iter().map(|row| row.iter().map(|p| p.embed(nv)).collect()).collect()
}

/// Inverse of a unitriangular polynomial matrix by back substitution.
pub fn unitriangular_inverse(a: &[Vec<Poly>]) -> Option<Vec<Vec<Poly>>> {
    let n = a.len();
    let nv = a[0][0].nvars();
    for i in 0..n {
        if a[i][i] != Poly::one(nv) {
            return None;
        }
        for j in 0..i {
            if !a[i][j].is_zero() {
                return None;
            }
        }
    }
    // Solve A X = I column by column from the bottom row up.
    let mut x = vec![vec![Poly::zero(nv); n]; n];
    for col in 0..n {
        for i in (0..n).rev() {
            let mut s = if i == col { Poly::one(nv) } else { Poly::zero(nv) };
            for k in (i + 1)..n {
                if !a[i][k].is_zero() && !x[k][col].is_zero() {
                    s = &s - &(&a[i][k] * &x[k][col]);
                }
            }
            x[i][col] = s;
        }
    }
    Some(x)
}

/// Monomial helper used by tests and samplers.
pub fn mono(nvars: usize, exps: &[(usize, u16)]) -> Mono {
    let mut m = Mono::one(nvars);
    for &(i, e) in exps {
        m.0[i] = e;
    }
    m
}

pub fn q_vec(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&k| q(k)).collect()
}
