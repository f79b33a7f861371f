//! Vector fields with rational-function coefficients, Lie brackets and the
//! canonical symplectic pairing.

use std::fmt;

use rayon::prelude::*;

use super::poly::{Poly, Q};
use super::ratfunc::RatFunc;
use crate::scalar::Scalar;
use crate::SymError;

/// Vector field on a coordinate space; component `i` multiplies `∂_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatVecField {
    comps: Vec<RatFunc>,
}

impl RatVecField {
    pub fn zero(dim: usize) -> Self {
        RatVecField { comps: vec![RatFunc::zero(dim); dim] }
    }

    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut f = Self::zero(dim);
        f.comps[i] = RatFunc::one(dim);
        f
    }

    pub fn from_comps(comps: Vec<RatFunc>) -> Self {
        let d = comps.len();
        assert!(comps.iter().all(|c| c.nvars() == d), "component ring must match field dimension");
        RatVecField { comps }
    }

    pub fn from_polys(comps: Vec<Poly>) -> Self {
        Self::from_comps(comps.into_iter().map(RatFunc::from_poly).collect())
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[RatFunc] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &RatFunc {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        RatVecField { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        RatVecField { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> Self {
        RatVecField { comps: self.comps.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, f: &RatFunc) -> Self {
        RatVecField { comps: self.comps.iter().map(|a| a * f).collect() }
    }

    pub fn scale_q(&self, c: &Q) -> Self {
        RatVecField { comps: self.comps.iter().map(|a| a.scale(c)).collect() }
    }

    /// Directional derivative `V(f)`.
    pub fn apply(&self, f: &RatFunc) -> RatFunc {
        let mut acc = RatFunc::zero(self.dim());
        for (j, vj) in self.comps.iter().enumerate() {
            if vj.is_zero() || !f.contains_var(j) {
                continue;
            }
            acc = &acc + &(vj * &f.derivative(j));
        }
        acc
    }

    /// `[V, W] = DW·V − DV·W`.
    pub fn bracket(&self, w: &Self) -> Self {
        assert_eq!(self.dim(), w.dim(), "bracket of fields of different dimension");
        let comps = (0..self.dim())
            .into_par_iter()
            .map(|i| &self.apply(&w.comps[i]) - &w.apply(&self.comps[i]))
            .collect();
        RatVecField { comps }
    }

    pub fn eval<T: Scalar>(&self, pt: &[T]) -> Option<Vec<T>> {
        self.comps.iter().map(|c| c.eval(pt)).collect()
    }

    pub fn truncate(&self, vars: &[usize], max: u32) -> Self {
        RatVecField { comps: self.comps.iter().map(|c| c.truncate(vars, max)).collect() }
    }

    pub fn map<F: Fn(&RatFunc) -> RatFunc + Sync + Send>(&self, f: F) -> Self {
        RatVecField { comps: self.comps.par_iter().map(f).collect() }
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (i, c) in self.comps.iter().enumerate() {
            if !c.is_zero() {
                parts.push(format!("({})*d/d{}", c.fmt_with(names), names[i]));
            }
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

impl fmt::Display for RatVecField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_with(&Poly::default_names(self.dim())))
    }
}

/// `σ(v, w) = Σ_i v_{p_i} w_{x_i} − w_{p_i} v_{x_i}` for tangent vectors laid
/// out as `(x_1..x_n, p_1..p_n)`.
pub fn sigma_pair<T: Scalar>(v: &[T], w: &[T]) -> Result<T, SymError> {
    if v.len() != w.len() || v.len() % 2 != 0 {
        return Err(SymError::DimensionMismatch { left: v.len(), right: w.len() });
    }
    let n = v.len() / 2;
    let mut acc = T::zero();
    for i in 0..n {
        acc = acc + v[n + i].clone() * w[i].clone() - w[n + i].clone() * v[i].clone();
    }
    Ok(acc)
}

/// The pairing of two fields as a rational function.
pub fn sigma_fields(u: &RatVecField, w: &RatVecField) -> RatFunc {
    let d = u.dim();
    assert_eq!(d, w.dim());
    let n = d / 2;
    let mut acc = RatFunc::zero(d);
    for i in 0..n {
        if !(u.comps[n + i].is_zero() || w.comps[i].is_zero()) {
            acc = &acc + &(&u.comps[n + i] * &w.comps[i]);
        }
        if !(w.comps[n + i].is_zero() || u.comps[i].is_zero()) {
            acc = &acc - &(&w.comps[n + i] * &u.comps[i]);
        }
    }
    acc
}

/// Standard skew matrix of `σ` in the `(x, p)` layout: `σ(v,w) = vᵀ J w`.
pub fn symplectic_matrix<T: Scalar>(n: usize) -> Vec<Vec<T>> {
    let mut j = vec![vec![T::zero(); 2 * n]; 2 * n];
    for i in 0..n {
        j[i][n + i] = -T::one();
        j[n + i][i] = T::one();
    }
    j
}

pub fn is_zero_vec<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfields::poly::q;
    use proptest::prelude::*;

    fn var(d: usize, i: usize) -> RatFunc {
        RatFunc::var(d, i)
    }

    #[test]
    fn darboux_orientation() {
        let mut dp = vec![q(0); 4];
        dp[2] = q(1);
        let mut dx = vec![q(0); 4];
        dx[0] = q(1);
        assert_eq!(sigma_pair(&dp, &dx).unwrap(), q(1));
        assert_eq!(sigma_pair(&dp, &dp).unwrap(), q(0));
        assert!(sigma_pair(&dp, &dx[..3]).is_err());
    }

    #[test]
    fn matrix_form_agrees() {
        let v = vec![1.0, 2.0, 3.0, 4.0];
        let w = vec![-1.0, 0.5, 2.0, 7.0];
        let j = symplectic_matrix::<f64>(2);
        let jw = crate::scalar::matvec(&j, &w);
        let lhs: f64 = v.iter().zip(&jw).map(|(a, b)| a * b).sum();
        assert!((lhs - sigma_pair(&v, &w).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn coordinate_bracket() {
        // [∂_0, x_0 ∂_1] = ∂_1
        let d0 = RatVecField::coordinate(2, 0);
        let mut w = RatVecField::zero(2);
        w.comps[1] = var(2, 0);
        assert_eq!(d0.bracket(&w), RatVecField::coordinate(2, 1));
    }

    fn field3() -> impl Strategy<Value = RatVecField> {
        prop::collection::vec((0usize..3, 0usize..3, -2i64..3), 3).prop_map(|v| {
            let comps = v
                .into_iter()
                .map(|(a, b, c)| &(&var(3, a) * &var(3, b)).scale(&q(c)) + &RatFunc::constant(3, q(1)))
                .collect();
            RatVecField::from_comps(comps)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn jacobi_identity(u in field3(), v in field3(), w in field3()) {
            let j = u.bracket(&v.bracket(&w)).add(&v.bracket(&w.bracket(&u))).add(&w.bracket(&u.bracket(&v)));
            prop_assert!(j.is_zero());
        }

        #[test]
        fn antisymmetry_and_leibniz(u in field3(), v in field3(), k in 0usize..3) {
            prop_assert_eq!(u.bracket(&v), v.bracket(&u).neg());
            let f = var(3, k);
            let lhs = u.bracket(&v.scale(&f));
            let rhs = v.scale(&u.apply(&f)).add(&u.bracket(&v).scale(&f));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
