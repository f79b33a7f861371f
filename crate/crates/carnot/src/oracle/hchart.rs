//! Coefficients of the vertical derivatives of `E_top` for Goursat groups,
//! written as rational functions of `h_1..h_n` through the vertical flow
//! derivation `D = Σ ḣ_i ∂_{h_i}`.

use super::frame::FrameJets;
use super::{Check, OracleError};
use crate::groups::{GroupKind, GroupModel};
use crate::symfields::poly::{Poly, Q};
use crate::symfields::ratfunc::RatFunc;

/// The vertical equations of a Goursat group as a derivation on functions of
/// `h_1..h_n`.
#[derive(Clone, Debug)]
pub struct VerticalDerivation {
    n: usize,
    hdot: Vec<Poly>,
}

impl VerticalDerivation {
    pub fn goursat(n: usize) -> Self {
        let v = |i| Poly::var(n, i);
        let mut hdot = vec![Poly::zero(n); n];
        hdot[0] = -&(&v(1) * &v(2));
        hdot[1] = &v(0) * &v(2);
        for i in 2..n - 1 {
            hdot[i] = &v(0) * &v(i + 1);
        }
        VerticalDerivation { n, hdot }
    }

    pub fn apply(&self, f: &RatFunc) -> RatFunc {
        let mut acc = RatFunc::zero(self.n);
        for (i, hd) in self.hdot.iter().enumerate() {
            if hd.is_zero() || !f.contains_var(i) {
                continue;
            }
            acc = &acc + &f.derivative(i).mul_poly(hd);
        }
        acc
    }

    fn h1_pow(&self, e: i32) -> RatFunc {
        RatFunc::var(self.n, 0).pow(e)
    }

    /// `Σ_{k=0}^{m} h_1^k D(g_k)` with `g_k` supplied by `inner`.
    fn sum_h1<F: Fn(usize) -> RatFunc>(&self, m: usize, inner: F) -> RatFunc {
        let mut acc = RatFunc::zero(self.n);
        for k in 0..=m {
            acc = &acc + &(&self.h1_pow(k as i32) * &self.apply(&inner(k)));
        }
        acc
    }

    /// `(a_{ii}, a_{i,i−1}, a_{i,i−2})` as rational functions; entries with a
    /// negative second index are omitted.
    pub fn aij(&self, i: usize) -> Vec<RatFunc> {
        let na = (self.n - 1) as i32;
        let sgn = |e: usize| if e % 2 == 0 { Q::from_integer(1.into()) } else { Q::from_integer((-1).into()) };
        let base = 2 - na;
        let mut out = vec![self.h1_pow(base + i as i32).scale(&sgn(i))];
        if i >= 1 {
            let s = self.sum_h1(i - 1, |k| self.h1_pow(base + (i - 1) as i32 - k as i32));
            out.push(s.scale(&sgn(i - 1)));
        }
        if i >= 2 {
            let s = self.sum_h1(i - 2, |k| {
                self.sum_h1(i - 2 - k, |l| self.h1_pow(base + (i - 2) as i32 - k as i32 - l as i32))
            });
            out.push(s.scale(&sgn(i - 2)));
        }
        out
    }
}

fn check_args(model: &GroupModel, h: &[Q], i: usize) -> Result<usize, OracleError> {
    let n = match model.kind {
        GroupKind::Goursat(n) => n,
        k => return Err(OracleError::UnsupportedGroup(k.to_string())),
    };
    if n < 3 || i + 3 > n {
        return Err(OracleError::IndexOutOfRange { index: i, max: n.saturating_sub(3) });
    }
    if num_traits::Zero::is_zero(&h[0]) {
        return Err(OracleError::SingularCovector("h1 = 0".into()));
    }
    Ok(n)
}

/// Closed-form `a_{ii}, a_{i,i−1}, a_{i,i−2}` at `h`.
pub fn aij_coefficients(model: &GroupModel, h: &[Q], i: usize) -> Result<Vec<Q>, OracleError> {
    let n = check_args(model, h, i)?;
    let d = VerticalDerivation::goursat(n);
    Ok(d.aij(i).iter().map(|f| f.eval(h).expect("h1 is nonzero")).collect())
}

/// The same coefficients read off `ad_{H⃗}^i E_top` at `h`, with a check that
/// every component below `∂_{h_{n−i}}` vanishes.
pub fn aij_from_brackets(jets: &FrameJets, h: &[Q], i: usize) -> Result<(Vec<Q>, bool), OracleError> {
    let n = check_args(&jets.ps.model, h, i)?;
    let v = jets.e_at(i, h)?;
    let p = &v[n..];
    let coeffs = (0..=i.min(2)).map(|j| p[n - 1 - i + j].clone()).collect();
    let horizontal_zero = v[..n].iter().all(num_traits::Zero::is_zero);
    let lower_zero = p[..n - 1 - i].iter().all(num_traits::Zero::is_zero);
    Ok((coeffs, horizontal_zero && lower_zero))
}

/// Closed form against brackets for `i = 0..=n−3`.
pub fn aij_checks(model: &GroupModel, h: &[Q]) -> Result<Vec<Check>, OracleError> {
    let n = check_args(model, h, 0)?;
    let jets = FrameJets::new(model, (n - 3) as u32 + 1);
    let mut out = Vec::new();
    for i in 0..=n - 3 {
        let closed = aij_coefficients(model, h, i)?;
        let (brk, support) = aij_from_brackets(&jets, h, i)?;
        for (j, (c, b)) in closed.iter().zip(&brk).enumerate() {
            out.push(Check::exact(format!("a_{},{}", i, i - j), c, b));
        }
        out.push(Check::exact(format!("support of ad^{} E_top", i), true, support));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_group;
    use crate::symfields::poly::{q, qr};

    #[test]
    fn diagonal_base_cases() {
        let m = build_group(GroupKind::Goursat(6)).unwrap();
        let h = [qr(3, 5), qr(4, 5), q(2), q(-1), qr(1, 3), q(5)];
        let h1 = &h[0];
        let a0 = aij_coefficients(&m, &h, 0).unwrap();
        assert_eq!(a0, vec![h1.pow(-3)]);
        let a1 = aij_coefficients(&m, &h, 1).unwrap();
        assert_eq!(a1[0], -h1.pow(-2));
    }

    #[test]
    fn matches_brackets_n6() {
        let m = build_group(GroupKind::Goursat(6)).unwrap();
        let h = [qr(5, 13), qr(12, 13), qr(-2, 7), q(3), qr(1, 2), qr(-4, 3)];
        let checks = aij_checks(&m, &h).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{:?}", checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }

    #[test]
    fn argument_errors() {
        let m = build_group(GroupKind::Goursat(5)).unwrap();
        let h = [q(0), q(1), q(1), q(0), q(0)];
        assert!(matches!(aij_coefficients(&m, &h, 1), Err(OracleError::SingularCovector(_))));
        let h = [q(1), q(0), q(1), q(0), q(0)];
        assert!(matches!(aij_coefficients(&m, &h, 3), Err(OracleError::IndexOutOfRange { .. })));
        let c = build_group(GroupKind::Cartan).unwrap();
        assert!(aij_coefficients(&c, &vec![q(1); 5], 0).is_err());
    }
}
