//! Canonical frame at `t = 0` from iterated brackets with the Hamiltonian
//! field.
//!
//! Every object is kept as a jet in the base coordinates around the origin:
//! a bracket with `H⃗` lowers the base degree by at most one, so a field known
//! to degree `d` determines its bracket to degree `d − 1`. Evaluating over the
//! origin only needs degree zero, which fixes the starting degree from the
//! number of brackets taken.

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{Check, OracleError};
use crate::curvature::young_diagram;
use crate::groups::{GroupKind, GroupModel};
use crate::symfields::field::{sigma_pair, RatVecField};
use crate::symfields::phase::PhaseSpace;
use crate::symfields::poly::Q;
use crate::symfields::ratfunc::RatFunc;

/// `h_1^{2−n_a} ∂_{h_n}` (Goursat) or `(h_2/h_3) ∂_{h_4} − (h_1/h_3) ∂_{h_5}`
/// (Cartan) as an exact field.
pub fn canonical_e_top(ps: &PhaseSpace) -> RatVecField {
    match ps.model.kind {
        GroupKind::Goursat(n) => {
            let na = (n - 1) as i32;
            ps.dh(n - 1).scale(&ps.h_rf(0).pow(2 - na))
        }
        GroupKind::Cartan => {
            let inv = ps.h_rf(2).recip();
            ps.dh(3).scale(&(&ps.h_rf(1) * &inv)).sub(&ps.dh(4).scale(&(&ps.h_rf(0) * &inv)))
        }
    }
}

/// The same field reduced to base degree `order`, with every denominator a
/// monomial in the momenta.
pub fn e_top_jet(ps: &PhaseSpace, order: u32) -> RatVecField {
    match ps.model.kind {
        GroupKind::Goursat(_) => ps.jet(&canonical_e_top(ps), order),
        GroupKind::Cartan => {
            let inv = ps.jet_inverse(ps.h(2), order).expect("h3 restricted to the fiber over the origin is p_z");
            let v = ps.dh(3).scale(&ps.h_rf(1)).sub(&ps.dh(4).scale(&ps.h_rf(0)));
            ps.jet(&v.scale(&inv), order)
        }
    }
}

/// A field together with the base degree up to which it is exact.
#[derive(Clone, Debug)]
pub struct Jet {
    pub field: RatVecField,
    pub order: u32,
}

/// A function together with its exactness degree.
#[derive(Clone, Debug)]
pub struct FnJet {
    pub f: RatFunc,
    pub order: u32,
}

/// Derivatives `E^{(k)} = ad_{H⃗}^k E_top`, `k = 0..=depth`.
#[derive(Clone, Debug)]
pub struct FrameJets {
    pub ps: PhaseSpace,
    pub hv: RatVecField,
    pub depth: u32,
    pub na: usize,
    pub e: Vec<Jet>,
}

impl FrameJets {
    pub fn new(model: &GroupModel, depth: u32) -> Self {
        let ps = PhaseSpace::new(model);
        let hv = ps.h_vec();
        let (na, _) = young_diagram(model.kind);
        let mut e = vec![Jet { field: e_top_jet(&ps, depth), order: depth }];
        for _ in 0..depth {
            let last = e.last().unwrap();
            let next = ad_h(&ps, &hv, last);
            e.push(next);
        }
        FrameJets { ps, hv, depth, na, e }
    }

    pub fn eval(&self, v: &Jet, h: &[Q]) -> Result<Vec<Q>, OracleError> {
        eval_field(&self.ps, &v.field, h)
    }

    pub fn e_at(&self, k: usize, h: &[Q]) -> Result<Vec<Q>, OracleError> {
        self.eval(&self.e[k], h)
    }
}

/// `[H⃗, v]` on jets.
pub fn ad_h(ps: &PhaseSpace, hv: &RatVecField, v: &Jet) -> Jet {
    assert!(v.order > 0, "jet exhausted");
    let bv = ps.base_vars();
    let h_trunc = hv.truncate(&bv, v.order);
    Jet { field: h_trunc.bracket(&v.field).truncate(&bv, v.order - 1), order: v.order - 1 }
}

/// `H⃗(f)` on function jets.
pub fn ad_h_fn(ps: &PhaseSpace, hv: &RatVecField, f: &FnJet) -> FnJet {
    assert!(f.order > 0, "jet exhausted");
    let bv = ps.base_vars();
    FnJet { f: hv.truncate(&bv, f.order).apply(&f.f).truncate(&bv, f.order - 1), order: f.order - 1 }
}

fn min_order(a: u32, b: u32) -> u32 {
    a.min(b)
}

pub fn jet_scale(ps: &PhaseSpace, v: &Jet, f: &FnJet) -> Jet {
    let o = min_order(v.order, f.order);
    Jet { field: v.field.scale(&f.f).truncate(&ps.base_vars(), o), order: o }
}

pub fn jet_sub(a: &Jet, b: &Jet) -> Jet {
    Jet { field: a.field.sub(&b.field), order: min_order(a.order, b.order) }
}

pub fn jet_sigma(ps: &PhaseSpace, a: &Jet, b: &Jet) -> FnJet {
    let o = min_order(a.order, b.order);
    FnJet { f: crate::symfields::field::sigma_fields(&a.field, &b.field).truncate(&ps.base_vars(), o), order: o }
}

pub fn eval_field(ps: &PhaseSpace, v: &RatVecField, h: &[Q]) -> Result<Vec<Q>, OracleError> {
    v.eval(&ps.origin_point(h)).ok_or_else(|| OracleError::SingularCovector(pole_message(ps.model.kind)))
}

fn pole_message(kind: GroupKind) -> String {
    match kind {
        GroupKind::Goursat(_) => "h1 = 0".to_string(),
        GroupKind::Cartan => "h3 = 0".to_string(),
    }
}

fn check_pole(kind: GroupKind, h: &[Q]) -> Result<(), OracleError> {
    let idx = match kind {
        GroupKind::Goursat(_) => 0,
        GroupKind::Cartan => 2,
    };
    if h[idx].is_zero() {
        return Err(OracleError::SingularCovector(pole_message(kind)));
    }
    Ok(())
}

/// Exact `R_{aa,11}` data over many covectors: the chain is built once.
#[derive(Clone, Debug)]
pub struct R11Oracle {
    jets: FrameJets,
}

impl R11Oracle {
    pub fn new(model: &GroupModel) -> Self {
        let (na, _) = young_diagram(model.kind);
        R11Oracle { jets: FrameJets::new(model, (na + 1) as u32) }
    }

    pub fn jets(&self) -> &FrameJets {
        &self.jets
    }

    /// `σ(Ḟ_{a1}, F_{a1}) = σ(E^{(n_a+1)}, E^{(n_a)})` at the covector.
    pub fn r11(&self, h: &[Q]) -> Result<Q, OracleError> {
        check_pole(self.jets.ps.model.kind, h)?;
        let na = self.jets.na;
        let f = self.jets.e_at(na, h)?;
        let fd = self.jets.e_at(na + 1, h)?;
        Ok(sigma_pair(&fd, &f).expect("equal dimensions"))
    }

    /// Conditions on `E_top`: vertical derivatives up to order `n_a − 1`
    /// and the normalization `σ(E^{(n_a)}, E^{(n_a−1)}) = 2H`, which is 1 on
    /// the unit level.
    pub fn lemma_conditions(&self, h: &[Q]) -> Result<Vec<Check>, OracleError> {
        check_pole(self.jets.ps.model.kind, h)?;
        let n = self.jets.ps.n();
        let na = self.jets.na;
        let mut out = Vec::new();
        for k in 0..na {
            let v = self.jets.e_at(k, h)?;
            let horiz = v[..n].iter().all(|x| x.is_zero());
            out.push(Check {
                name: format!("vertical E^({})", k),
                mode: "exact",
                expected: "0".into(),
                actual: if horiz { "0".into() } else { format!("{:?}", &v[..n]) },
                pass: horiz,
            });
        }
        let s = sigma_pair(&self.jets.e_at(na, h)?, &self.jets.e_at(na - 1, h)?).unwrap();
        let two_h = crate::groups::hamiltonian(h) * Q::from_integer(2.into());
        out.push(Check::exact(format!("sigma(E^({}), E^({}))", na, na - 1), two_h, s));
        Ok(out)
    }
}

pub fn r11_exact(model: &GroupModel, h: &[Q]) -> Result<Q, OracleError> {
    R11Oracle::new(model).r11(h)
}

/// Closed-form `E_top` after checking its defining conditions at `h`.
pub fn canonical_e_top_checked(model: &GroupModel, h: &[Q]) -> Result<RatVecField, OracleError> {
    let oracle = R11Oracle::new(model);
    let checks = oracle.lemma_conditions(h)?;
    if let Some(c) = checks.iter().find(|c| !c.pass) {
        return Err(OracleError::LemmaConditionFailed(format!("{}: got {}", c.name, c.actual)));
    }
    Ok(canonical_e_top(&oracle.jets.ps))
}

/// The `a`-row of the canonical frame as jets, from the structural equations
/// `Ė_{ai} = E_{a(i−1)}`, `Ė_{a1} = −F_{a1}`,
/// `Ḟ_{ai} = R_{ii} E_{ai} − F_{a(i+1)}`.
#[derive(Clone, Debug)]
pub struct CanonicalFrame {
    pub jets: FrameJets,
    /// `E_{a1} … E_{an_a}`.
    pub e_a: Vec<Jet>,
    /// `F_{a1} …` as far as the depth allows.
    pub f_a: Vec<Jet>,
    pub f_dot: Vec<Jet>,
    /// `R_{aa,ii}` as function jets.
    pub r: Vec<FnJet>,
}

impl CanonicalFrame {
    /// `rows` entries of the `F` column; the full frame needs `rows = n_a`.
    pub fn new(model: &GroupModel, rows: usize) -> Self {
        let (na, _) = young_diagram(model.kind);
        let rows = rows.clamp(1, na);
        let depth = (na + rows) as u32;
        let jets = FrameJets::new(model, depth);
        let e_a: Vec<Jet> = (1..=na).map(|i| jets.e[na - i].clone()).collect();
        let neg = |j: &Jet| Jet { field: j.field.neg(), order: j.order };
        let mut f_a = vec![neg(&jets.e[na])];
        let mut f_dot = Vec::new();
        let mut r = Vec::new();
        for i in 0..rows {
            let fd = if i == 0 { neg(&jets.e[na + 1]) } else { ad_h(&jets.ps, &jets.hv, &f_a[i]) };
            let rii = jet_sigma(&jets.ps, &fd, &f_a[i]);
            if i + 1 < rows {
                let next = jet_sub(&jet_scale(&jets.ps, &e_a[i], &rii), &fd);
                f_a.push(next);
            }
            f_dot.push(fd);
            r.push(rii);
        }
        CanonicalFrame { jets, e_a, f_a, f_dot, r }
    }

    pub fn rows(&self) -> usize {
        self.f_a.len()
    }

    pub fn is_complete(&self) -> bool {
        self.rows() == self.jets.na
    }

    /// `R_{aa,ii}(0)` for the computed rows.
    pub fn diagonal(&self, h: &[Q]) -> Result<Vec<Q>, OracleError> {
        check_pole(self.jets.ps.model.kind, h)?;
        let pt = self.jets.ps.origin_point(h);
        self.r
            .iter()
            .map(|f| f.f.eval(&pt).ok_or_else(|| OracleError::SingularCovector(pole_message(self.jets.ps.model.kind))))
            .collect()
    }

    /// Darboux pairings of the computed frame at `h`, with `E_{b1} = 𝔢` and
    /// `F_{b1} = H⃗`.
    pub fn darboux_check(&self, h: &[Q]) -> Result<Vec<Check>, OracleError> {
        check_pole(self.jets.ps.model.kind, h)?;
        let ps = &self.jets.ps;
        let mut es: Vec<(String, Vec<Q>)> = Vec::new();
        for (i, e) in self.e_a.iter().enumerate() {
            es.push((format!("E_a{}", i + 1), self.jets.eval(e, h)?));
        }
        es.push(("E_b1".into(), eval_field(ps, &ps.euler(), h)?));
        let mut fs: Vec<(String, Vec<Q>)> = Vec::new();
        for (i, f) in self.f_a.iter().enumerate() {
            fs.push((format!("F_a{}", i + 1), self.jets.eval(f, h)?));
        }
        fs.push(("F_b1".into(), eval_field(ps, &self.jets.hv, h)?));
        let mut out = Vec::new();
        let sig = |a: &[Q], b: &[Q]| sigma_pair(a, b).unwrap();
        for i in 0..es.len() {
            for j in (i + 1)..es.len() {
                out.push(Check::exact(format!("sigma({}, {})", es[i].0, es[j].0), Q::zero(), sig(&es[i].1, &es[j].1)));
            }
        }
        for i in 0..fs.len() {
            for j in (i + 1)..fs.len() {
                out.push(Check::exact(format!("sigma({}, {})", fs[i].0, fs[j].0), Q::zero(), sig(&fs[i].1, &fs[j].1)));
            }
        }
        for (en, ev) in &es {
            for (fname, fv) in &fs {
                let same = en[1..] == fname[1..];
                let expect = if same { Q::one() } else { Q::zero() };
                out.push(Check::exact(format!("sigma({}, {})", en, fname), expect, sig(ev, fv)));
            }
        }
        Ok(out)
    }

    /// Structural residuals at `h`: the recursion against the unrolled sum
    /// for each computed `F_{ai}`, and closure of the row when complete.
    pub fn structural_residuals(&self, h: &[Q]) -> Result<Vec<Check>, OracleError> {
        check_pole(self.jets.ps.model.kind, h)?;
        let ps = &self.jets.ps;
        let hv = &self.jets.hv;
        let mut out = Vec::new();
        let n2 = ps.nvars();
        let zero = vec![Q::zero(); n2];
        for i in 1..self.rows() {
            // F_{a(i+1)} = Σ_{j=1}^{i} (−1)^{j−1} ad^{j−1}(R_{i+1−j} E_{a(i+1−j)}) + (−1)^i ad^i F_{a1}
            let terms: Vec<Jet> = (1..=i)
                .into_par_iter()
                .map(|j| {
                    let idx = i - j;
                    let mut t = jet_scale(ps, &self.e_a[idx], &self.r[idx]);
                    for _ in 0..(j - 1) {
                        t = ad_h(ps, hv, &t);
                    }
                    if (j - 1) % 2 == 1 {
                        t.field = t.field.neg();
                    }
                    t
                })
                .collect();
            let mut last = self.f_a[0].clone();
            for _ in 0..i {
                last = ad_h(ps, hv, &last);
            }
            if i % 2 == 1 {
                last.field = last.field.neg();
            }
            let mut total = eval_field(ps, &last.field, h)?;
            for t in &terms {
                let v = eval_field(ps, &t.field, h)?;
                for (a, b) in total.iter_mut().zip(v) {
                    *a = a.clone() + b;
                }
            }
            let direct = self.jets.eval(&self.f_a[i], h)?;
            let res: Vec<Q> = total.iter().zip(&direct).map(|(a, b)| a - b).collect();
            out.push(Check::exact(format!("F_a{} unrolled vs recursive", i + 1), format!("{:?}", zero), format!("{:?}", res)));
        }
        if self.is_complete() {
            let k = self.rows() - 1;
            let pt = ps.origin_point(h);
            let r = self.r[k].f.eval(&pt).ok_or_else(|| OracleError::SingularCovector(pole_message(ps.model.kind)))?;
            let e = self.jets.eval(&self.e_a[k], h)?;
            let fd = self.jets.eval(&self.f_dot[k], h)?;
            let res: Vec<Q> = e.iter().zip(&fd).map(|(a, b)| &r * a - b).collect();
            out.push(Check::exact(format!("closure R_{0}{0} E_a{0} - dF_a{0}", k + 1), format!("{:?}", zero), format!("{:?}", res)));
        }
        Ok(out)
    }
}

/// Diagonal invariants `R_{aa,ii}(0)`, `i = 1..=i_max`.
pub fn higher_diagonal_invariants(model: &GroupModel, h: &[Q], i_max: usize) -> Result<Vec<Q>, OracleError> {
    let (na, _) = young_diagram(model.kind);
    if i_max == 0 || i_max > na {
        return Err(OracleError::IndexOutOfRange { index: i_max, max: na });
    }
    CanonicalFrame::new(model, i_max).diagonal(h)
}

/// Darboux pairings of the full canonical frame.
pub fn frame_darboux_check(model: &GroupModel, h: &[Q]) -> Result<Vec<Check>, OracleError> {
    let (na, _) = young_diagram(model.kind);
    CanonicalFrame::new(model, na).darboux_check(h)
}
