//! Rational functions in canonical form: monic denominator, coprime parts.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::gcd::gcd;
use super::poly::{Mono, Poly, Q};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn zero(nvars: usize) -> Self {
        RatFunc { num: Poly::zero(nvars), den: Poly::one(nvars) }
    }

    pub fn one(nvars: usize) -> Self {
        RatFunc { num: Poly::one(nvars), den: Poly::one(nvars) }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        RatFunc { num: Poly::constant(nvars, c), den: Poly::one(nvars) }
    }

    pub fn from_poly(p: Poly) -> Self {
        let n = p.nvars();
        RatFunc { num: p, den: Poly::one(n) }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::from_poly(Poly::var(nvars, i))
    }

    /// Reduce `num / den` to canonical form. Panics on a zero denominator.
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let n = num.nvars();
        if num.is_zero() {
            return Self::zero(n);
        }
        if den.is_constant() {
            let c = den.constant_term();
            return RatFunc { num: num.scale(&c.recip()), den: Poly::one(n) };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        Self::normalized(num, den)
    }

    /// Parts already coprime; only fix the leading coefficient.
    fn normalized(num: Poly, den: Poly) -> Self {
        let lc = den.leading_coeff();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lc.recip();
            RatFunc { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn constant_value(&self) -> Option<Q> {
        if self.is_constant() {
            Some(self.num.constant_term())
        } else {
            None
        }
    }

    pub fn contains_var(&self, i: usize) -> bool {
        self.num.contains_var(i) || self.den.contains_var(i)
    }

    pub fn scale(&self, c: &Q) -> RatFunc {
        if c.is_zero() {
            return Self::zero(self.nvars());
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul_poly(&self, p: &Poly) -> RatFunc {
        self * &RatFunc::from_poly(p.clone())
    }

    pub fn recip(&self) -> RatFunc {
        assert!(!self.is_zero(), "reciprocal of zero");
        Self::normalized(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, e: i32) -> RatFunc {
        let base = if e < 0 { self.recip() } else { self.clone() };
        let mut r = Self::one(self.nvars());
        for _ in 0..e.unsigned_abs() {
            r = &r * &base;
        }
        r
    }

    pub fn derivative(&self, i: usize) -> RatFunc {
        let dn = self.num.derivative(i);
        if !self.den.contains_var(i) {
            return RatFunc::new(dn, self.den.clone());
        }
        let dd = self.den.derivative(i);
        if self.den.is_monomial() {
            // (n' m - n m') / m^2 with m' = e m / x_i
            let e = self.den.leading().unwrap().0 .0[i] as i64;
            let xi = Mono::var(self.nvars(), i, 1);
            let num = &dn.mul_term(&xi, &Q::one()) - &self.num.scale(&super::poly::q(e));
            return RatFunc::new(num, self.den.mul_term(&xi, &Q::one()));
        }
        let num = &(&dn * &self.den) - &(&self.num * &dd);
        RatFunc::new(num, &self.den * &self.den)
    }

    pub fn eval<T: Scalar>(&self, pt: &[T]) -> Option<T> {
        let d = self.den.eval(pt);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(pt) / d)
    }

    /// Drop numerator terms of degree above `max` in `vars`. The
    /// denominator must not involve `vars`.
    pub fn truncate(&self, vars: &[usize], max: u32) -> RatFunc {
        debug_assert!(vars.iter().all(|&v| !self.den.contains_var(v)));
        RatFunc::new(self.num.truncate(vars, max), self.den.clone())
    }

    pub fn embed(&self, nvars: usize) -> RatFunc {
        RatFunc { num: self.num.embed(nvars), den: self.den.embed(nvars) }
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        let n = self.num.fmt_with(names);
        if self.den.is_constant() {
            n
        } else {
            format!("({})/({})", n, self.den.fmt_with(names))
        }
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_with(&Poly::default_names(self.nvars())))
    }
}

impl<'a> Add<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &'a RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFunc::new(&self.num + &rhs.num, self.den.clone());
        }
        if self.den.is_monomial() && rhs.den.is_monomial() {
            let m1 = self.den.leading().unwrap().0.clone();
            let m2 = rhs.den.leading().unwrap().0.clone();
            let l = m1.lcm(&m2);
            let one = Q::one();
            let num = &self.num.mul_term(&m1.quotient_of(&l), &one) + &rhs.num.mul_term(&m2.quotient_of(&l), &one);
            return RatFunc::new(num, Poly::monomial(self.nvars(), l, one));
        }
        let g = gcd(&self.den, &rhs.den);
        let d1 = self.den.div_exact(&g).unwrap();
        let d2 = rhs.den.div_exact(&g).unwrap();
        let num = &(&self.num * &d2) + &(&rhs.num * &d1);
        RatFunc::new(num, &self.den * &d2)
    }
}

impl<'a> Sub<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &'a RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &'a RatFunc) -> RatFunc {
        let n = self.nvars();
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero(n);
        }
        if self.den.is_constant() && rhs.den.is_constant() {
            return RatFunc::from_poly(&self.num * &rhs.num);
        }
        let g1 = gcd(&self.num, &rhs.den);
        let g2 = gcd(&rhs.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = rhs.den.div_exact(&g1).unwrap();
        let n2 = rhs.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        RatFunc::normalized(&n1 * &n2, &d1 * &d2)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl $tr<RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $f(self, rhs: RatFunc) -> RatFunc {
                (&self).$f(&rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
