//! Multivariate polynomial gcd over the rationals.
//!
//! Recursive primitive remainder sequences, with shortcuts for monomials,
//! exact divisibility and variables occurring in only one argument.

use super::poly::{Mono, Poly};

/// Monic gcd. `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    let n = a.nvars();
    if a.is_constant() || b.is_constant() {
        return Poly::one(n);
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = ma.gcd(&mb);
    let a1 = if ma.is_one() { a.clone() } else { a.div_mono(&ma) };
    let b1 = if mb.is_one() { b.clone() } else { b.div_mono(&mb) };
    let g = gcd_free(&a1, &b1);
    g.mul_term(&mg, &num_traits::One::one()).monic()
}

/// gcd of two polynomials without monomial content.
fn gcd_free(a: &Poly, b: &Poly) -> Poly {
    let n = a.nvars();
    if a.is_constant() || b.is_constant() || a.is_monomial() || b.is_monomial() {
        return Poly::one(n);
    }
    if a == b {
        return a.monic();
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if large.div_exact(small).is_some() {
        return small.monic();
    }
    let va = a.vars_present();
    let vb = b.vars_present();
    for v in 0..n {
        if va[v] && !vb[v] {
            return gcd(&content_in(a, v), b);
        }
        if vb[v] && !va[v] {
            return gcd(a, &content_in(b, v));
        }
    }
    // Same variable set; recurse on the variable of smallest degree.
    let v = (0..n)
        .filter(|&v| va[v])
        .min_by_key(|&v| {
            let d = a.degree_in(v).min(b.degree_in(v));
            let lead_const = a.lead_in(v).1.is_constant() && b.lead_in(v).1.is_constant();
            (d, !lead_const)
        })
        .expect("non-constant polynomial has a variable");
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let c = gcd(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let g = prs(pa, pb, v);
    (&c * &g).monic()
}

/// gcd of the coefficients of `p` viewed as a polynomial in `v`.
pub fn content_in(p: &Poly, v: usize) -> Poly {
    let coeffs = p.coefficients_in(v);
    let mut it = coeffs.into_values();
    let mut g = match it.next() {
        Some(c) => c.monic(),
        None => return Poly::zero(p.nvars()),
    };
    for c in it {
        if g.is_constant() {
            break;
        }
        g = gcd(&g, &c);
    }
    g
}

fn primitive_part(p: &Poly, v: usize) -> Poly {
    let c = content_in(p, v);
    if c.is_constant() {
        return p.monic();
    }
    p.div_exact(&c).expect("content divides").monic()
}

/// Primitive PRS gcd of two polynomials primitive in `v`.
fn prs(a: Poly, b: Poly, v: usize) -> Poly {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    loop {
        if b.degree_in(v) == 0 {
            return Poly::one(a.nvars());
        }
        let r = prem(&a, &b, v);
        if r.is_zero() {
            return b.monic();
        }
        if r.degree_in(v) == 0 {
            return Poly::one(a.nvars());
        }
        a = b;
        b = primitive_part(&r, v);
    }
}

/// Sparse pseudo-remainder of `a` by `b` in the variable `v`.
pub fn prem(a: &Poly, b: &Poly, v: usize) -> Poly {
    let n = a.nvars();
    let (db, lb) = b.lead_in(v);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let (dr, lr) = r.lead_in(v);
        let shift = Mono::var(n, v, (dr - db) as u16);
        let t = &lr.mul_term(&shift, &num_traits::One::one()) * b;
        r = &(&lb * &r) - &t;
    }
    r
}
