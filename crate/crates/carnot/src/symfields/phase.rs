//! Fields on the cotangent bundle of a group model in canonical coordinates
//! `(x_1..x_n, p_1..p_n)`.

use num_traits::Zero;

use super::field::RatVecField;
use super::poly::{qr, Poly, Q};
use super::ratfunc::RatFunc;
use crate::groups::{frame_matrix_sym, unitriangular_inverse, GroupModel};

#[derive(Clone, Debug)]
pub struct PhaseSpace {
    pub model: GroupModel,
    n: usize,
    a: Vec<Vec<Poly>>,
    a_inv: Vec<Vec<Poly>>,
    h: Vec<Poly>,
}

impl PhaseSpace {
    pub fn new(model: &GroupModel) -> Self {
        let n = model.dim;
        let a = frame_matrix_sym(model);
        let a_inv = unitriangular_inverse(&a).expect("frame matrices are unitriangular");
        let h = (0..n)
            .map(|i| {
                let mut s = Poly::zero(2 * n);
                for j in 0..n {
                    if !a[i][j].is_zero() {
                        s = &s + &(&a[i][j] * &Poly::var(2 * n, n + j));
                    }
                }
                s
            })
            .collect();
        PhaseSpace { model: model.clone(), n, a, a_inv, h }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nvars(&self) -> usize {
        2 * self.n
    }

    pub fn base_vars(&self) -> Vec<usize> {
        (0..self.n).collect()
    }

    pub fn names(&self) -> Vec<String> {
        let mut v = self.model.base_names.clone();
        v.extend(self.model.base_names.iter().map(|s| format!("p{}", s)));
        v
    }

    pub fn frame_matrix(&self) -> &[Vec<Poly>] {
        &self.a
    }

    pub fn frame_inverse(&self) -> &[Vec<Poly>] {
        &self.a_inv
    }

    /// `h_{i+1}` as a polynomial.
    pub fn h(&self, i: usize) -> &Poly {
        &self.h[i]
    }

    pub fn h_rf(&self, i: usize) -> RatFunc {
        RatFunc::from_poly(self.h[i].clone())
    }

    pub fn hamiltonian(&self) -> Poly {
        (&(&self.h[0] * &self.h[0]) + &(&self.h[1] * &self.h[1])).scale(&qr(1, 2))
    }

    /// Hamiltonian field of `f`: `(∂f/∂p, −∂f/∂x)`, so `df = σ(·, f⃗)`.
    pub fn hamiltonian_field_of(&self, f: &Poly) -> RatVecField {
        let n = self.n;
        let mut c = Vec::with_capacity(2 * n);
        for i in 0..n {
            c.push(f.derivative(n + i));
        }
        for i in 0..n {
            c.push(-&f.derivative(i));
        }
        RatVecField::from_polys(c)
    }

    pub fn h_vec(&self) -> RatVecField {
        self.hamiltonian_field_of(&self.hamiltonian())
    }

    /// Vertical field `∂_{h_{i+1}}`: p-part is column `i` of `A⁻¹`.
    pub fn dh(&self, i: usize) -> RatVecField {
        let n = self.n;
        let mut c = vec![Poly::zero(2 * n); 2 * n];
        for j in 0..n {
            c[n + j] = self.a_inv[j][i].clone();
        }
        RatVecField::from_polys(c)
    }

    /// Frame field `X_{i+1}` lifted so that every `h_j` is constant along it.
    pub fn lifted_x(&self, i: usize) -> RatVecField {
        let n = self.n;
        let nv = 2 * n;
        let xi: Vec<Poly> = self.a[i].clone();
        let mut c = vec![Poly::zero(nv); nv];
        c[..n].clone_from_slice(&xi);
        // dA along X_i, applied to p
        let mut dap = vec![Poly::zero(nv); n];
        for (r, row) in self.a.iter().enumerate() {
            for (j, arj) in row.iter().enumerate() {
                if arj.is_constant() {
                    continue;
                }
                let mut d = Poly::zero(nv);
                for (k, xik) in xi.iter().enumerate() {
                    if !xik.is_zero() && arj.contains_var(k) {
                        d = &d + &(xik * &arj.derivative(k));
                    }
                }
                if !d.is_zero() {
                    dap[r] = &dap[r] + &(&d * &Poly::var(nv, n + j));
                }
            }
        }
        for r in 0..n {
            let mut s = Poly::zero(nv);
            for (k, dk) in dap.iter().enumerate() {
                if !dk.is_zero() && !self.a_inv[r][k].is_zero() {
                    s = &s + &(&self.a_inv[r][k] * dk);
                }
            }
            c[n + r] = -&s;
        }
        RatVecField::from_polys(c)
    }

    /// Euler field `Σ p_i ∂_{p_i}`.
    pub fn euler(&self) -> RatVecField {
        let n = self.n;
        let mut c = vec![Poly::zero(2 * n); 2 * n];
        for i in 0..n {
            c[n + i] = Poly::var(2 * n, n + i);
        }
        RatVecField::from_polys(c)
    }

    /// `∂_θ = h_1 ∂_{h_2} − h_2 ∂_{h_1}`.
    pub fn d_theta(&self) -> RatVecField {
        self.dh(1).scale(&self.h_rf(0)).sub(&self.dh(0).scale(&self.h_rf(1)))
    }

    /// `X_θ = h_2 X_1 − h_1 X_2`.
    pub fn x_theta(&self) -> RatVecField {
        self.lifted_x(0).scale(&self.h_rf(1)).sub(&self.lifted_x(1).scale(&self.h_rf(0)))
    }

    /// `X_θ̄ = h_1 X_1 + h_2 X_2`.
    pub fn x_theta_bar(&self) -> RatVecField {
        self.lifted_x(0).scale(&self.h_rf(0)).add(&self.lifted_x(1).scale(&self.h_rf(1)))
    }

    /// Truncated inverse of `f` around the zero section of the base: `f`
    /// restricted to `x = 0` must be a monomial in the momenta.
    pub fn jet_inverse(&self, f: &Poly, order: u32) -> Option<RatFunc> {
        let bv = self.base_vars();
        let f0 = f.at_zero(&bv);
        if !f0.is_monomial() || f0.is_zero() {
            return None;
        }
        let q = f - &f0;
        let inv0 = RatFunc::from_poly(f0).recip();
        let mut term = inv0.clone();
        let mut acc = inv0.clone();
        let neg_q = RatFunc::from_poly(-&q);
        for _ in 0..order {
            term = (&(&term * &neg_q) * &inv0).truncate(&bv, order);
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
        }
        Some(acc)
    }

    /// Truncate a field to base-degree `order`.
    pub fn jet(&self, v: &RatVecField, order: u32) -> RatVecField {
        v.truncate(&self.base_vars(), order)
    }

    /// `[H⃗, v]` with both inputs reduced to base-degree `order` and the
    /// result reduced to `order − 1`.
    pub fn ad_h_jet(&self, hv: &RatVecField, v: &RatVecField, order: u32) -> RatVecField {
        let bv = self.base_vars();
        hv.bracket(v).truncate(&bv, order.saturating_sub(1))
    }

    /// Point `(0, h)` over the origin; there `p = h`.
    pub fn origin_point(&self, h: &[Q]) -> Vec<Q> {
        let mut pt = vec![Q::zero(); self.n];
        pt.extend(h.iter().cloned());
        pt
    }

    pub fn unit_level_residual(&self) -> Poly {
        &self.hamiltonian().scale(&Q::from_integer(2.into())) - &Poly::one(2 * self.n)
    }
}
