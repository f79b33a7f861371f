//! Normal geodesic flow: the Hamiltonian system in canonical coordinates, its
//! linearization, fixed-step RK4 integration and conserved quantities.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::curvature::energy;
use crate::groups::{fiber_transform, Covector, GroupError, GroupKind, GroupModel};
use crate::scalar::Scalar;
use crate::symfields::phase::PhaseSpace;
use crate::symfields::poly::Poly;

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_DRIFT_BOUND: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("conserved quantity {name} drifted by {drift:e} (bound {bound:e}); reduce the step")]
    StepTooLarge { name: String, drift: f64, bound: f64 },
    #[error("invalid integration parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Polynomial compiled for fast `f64` evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn new(p: &Poly) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let vars = m.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e as i32)).collect();
                (c.to_f64(), vars)
            })
            .collect();
        CompiledPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (c, vars) in &self.terms {
            let mut t = *c;
            for &(i, e) in vars {
                t *= if e == 1 { x[i] } else { x[i].powi(e) };
            }
            s += t;
        }
        s
    }
}

/// The Hamiltonian vector field of a model and its Jacobian, as polynomials.
#[derive(Clone, Debug)]
pub struct FlowSystem {
    pub kind: GroupKind,
    pub n: usize,
    rhs_exact: Vec<Poly>,
    rhs: Vec<CompiledPoly>,
    jac: Vec<Vec<CompiledPoly>>,
    frame: Vec<Vec<CompiledPoly>>,
}

impl FlowSystem {
    pub fn new(model: &GroupModel) -> Self {
        let ps = PhaseSpace::new(model);
        let hv = ps.h_vec();
        let rhs_exact: Vec<Poly> = hv.comps().iter().map(|c| c.num().clone()).collect();
        let d = rhs_exact.len();
        let rhs = rhs_exact.iter().map(CompiledPoly::new).collect();
        let jac = rhs_exact.iter().map(|f| (0..d).map(|j| CompiledPoly::new(&f.derivative(j))).collect()).collect();
        let frame = model.frame.iter().map(|row| row.iter().map(CompiledPoly::new).collect()).collect();
        FlowSystem { kind: model.kind, n: model.dim, rhs_exact, rhs, jac, frame }
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Exact right-hand side polynomials `(ẋ, ṗ)`.
    pub fn rhs_polys(&self) -> &[Poly] {
        &self.rhs_exact
    }

    pub fn rhs(&self, s: &[f64]) -> Vec<f64> {
        self.rhs.iter().map(|f| f.eval(s)).collect()
    }

    pub fn jacobian(&self, s: &[f64]) -> Vec<Vec<f64>> {
        self.jac.iter().map(|row| row.iter().map(|f| if f.is_zero() { 0.0 } else { f.eval(s) }).collect()).collect()
    }

    /// `h = A(x) p` for a state `(x, p)`.
    pub fn h_of_state(&self, s: &[f64]) -> Vec<f64> {
        let n = self.n;
        self.frame
            .iter()
            .map(|row| row.iter().enumerate().map(|(j, a)| if a.is_zero() { 0.0 } else { a.eval(&s[..n]) * s[n + j] }).sum())
            .collect()
    }

    fn rhs_with_variational(&self, s: &[f64], m: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let f = self.rhs(s);
        let jm = self.jacobian(s);
        let mut dm = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = jm[i][k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    dm[i * d + j] += a * m[k * d + j];
                }
            }
        }
        (f, dm)
    }

    /// One classical RK4 step of the state (and of `M` when given, row-major).
    pub fn rk4_step(&self, s: &mut Vec<f64>, m: Option<&mut Vec<f64>>, dt: f64) {
        let axpy = |a: &[f64], b: &[f64], k: f64| a.iter().zip(b).map(|(x, y)| x + k * y).collect::<Vec<f64>>();
        match m {
            None => {
                let k1 = self.rhs(s);
                let k2 = self.rhs(&axpy(s, &k1, dt / 2.0));
                let k3 = self.rhs(&axpy(s, &k2, dt / 2.0));
                let k4 = self.rhs(&axpy(s, &k3, dt));
                for i in 0..s.len() {
                    s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            Some(m) => {
                let (k1, l1) = self.rhs_with_variational(s, m);
                let (k2, l2) = self.rhs_with_variational(&axpy(s, &k1, dt / 2.0), &axpy(m, &l1, dt / 2.0));
                let (k3, l3) = self.rhs_with_variational(&axpy(s, &k2, dt / 2.0), &axpy(m, &l2, dt / 2.0));
                let (k4, l4) = self.rhs_with_variational(&axpy(s, &k3, dt), &axpy(m, &l3, dt));
                for i in 0..s.len() {
                    s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                for i in 0..m.len() {
                    m[i] += dt / 6.0 * (l1[i] + 2.0 * l2[i] + 2.0 * l3[i] + l4[i]);
                }
            }
        }
    }
}

/// Right-hand side of the flow at a covector, exact or in floats.
pub fn flow_rhs<T: Scalar>(model: &GroupModel, cv: &Covector<T>) -> Vec<T> {
    let sys = FlowSystem::new(model);
    let s = cv.state();
    sys.rhs_exact.iter().map(|f| f.eval(&s)).collect()
}

/// Vertical equations written directly in frame coordinates.
pub fn h_dot<T: Scalar>(kind: GroupKind, h: &[T]) -> Vec<T> {
    let n = h.len();
    let mut d = vec![T::zero(); n];
    d[0] = -(h[1].clone() * h[2].clone());
    d[1] = h[0].clone() * h[2].clone();
    match kind {
        GroupKind::Goursat(_) => {
            for i in 2..n - 1 {
                d[i] = h[0].clone() * h[i + 1].clone();
            }
        }
        GroupKind::Cartan => {
            d[2] = h[0].clone() * h[3].clone() + h[1].clone() * h[4].clone();
        }
    }
    d
}

/// Time derivative of `h` induced by a canonical tangent vector at `(x, p)`:
/// `ḣ = (∂_ẋ A) p + A ṗ`.
pub fn h_rate<T: Scalar>(model: &GroupModel, cv: &Covector<T>, v: &[T]) -> Result<Vec<T>, GroupError> {
    let n = model.dim;
    let fm = fiber_transform(model, &cv.base)?;
    let mut out = vec![T::zero(); n];
    for i in 0..n {
        let mut s = T::zero();
        for j in 0..n {
            let aij = &model.frame[i][j];
            let mut da = T::zero();
            for k in 0..n {
                if aij.contains_var(k) {
                    da = da + aij.derivative(k).eval(&cv.base) * v[k].clone();
                }
            }
            s = s + da * cv.p[j].clone() + fm.a[i][j].clone() * v[n + j].clone();
        }
        out[i] = s;
    }
    Ok(out)
}

/// Named first integrals: `H`, the invariant fiber components and, for Engel
/// and Cartan, the pendulum energy `E`.
pub fn conserved_quantities<T: Scalar>(kind: GroupKind, h: &[T]) -> BTreeMap<String, T> {
    let mut out = BTreeMap::new();
    out.insert("H".to_string(), crate::groups::hamiltonian(h));
    match kind {
        GroupKind::Goursat(n) => {
            out.insert(format!("h{}", n), h[n - 1].clone());
        }
        GroupKind::Cartan => {
            out.insert("h4".to_string(), h[3].clone());
            out.insert("h5".to_string(), h[4].clone());
        }
    }
    if let Some(e) = energy(kind, h) {
        out.insert("E".to_string(), e);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub kind: GroupKind,
    pub times: Vec<f64>,
    /// States `(x, p)` in canonical coordinates.
    pub states: Vec<Vec<f64>>,
    /// Frame coordinates along the trajectory.
    pub h: Vec<Vec<f64>>,
    /// Row-major variational matrices, when requested.
    #[serde(skip)]
    pub variational: Option<Vec<Vec<f64>>>,
    pub drift: BTreeMap<String, f64>,
}

#[derive(Clone, Debug)]
pub struct FlowOptions {
    pub step: f64,
    pub with_variational: bool,
    pub drift_bound: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { step: DEFAULT_STEP, with_variational: false, drift_bound: DEFAULT_DRIFT_BOUND }
    }
}

/// Integrate from `λ0` over `[0, T]` with fixed-step RK4.
pub fn integrate_flow(model: &GroupModel, lambda0: &Covector<f64>, t_end: f64, opts: &FlowOptions) -> Result<Trajectory, FlowError> {
    let sys = FlowSystem::new(model);
    integrate_with(&sys, lambda0, t_end, opts)
}

pub fn integrate_with(sys: &FlowSystem, lambda0: &Covector<f64>, t_end: f64, opts: &FlowOptions) -> Result<Trajectory, FlowError> {
    if !(t_end > 0.0) || !(opts.step > 0.0) || !t_end.is_finite() {
        return Err(FlowError::InvalidParameters(format!("T = {}, step = {}", t_end, opts.step)));
    }
    if lambda0.base.len() != sys.n || lambda0.p.len() != sys.n {
        return Err(GroupError::Dimension { expected: sys.n, got: lambda0.p.len() }.into());
    }
    let steps = (t_end / opts.step).round().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let d = sys.dim();
    let mut s = lambda0.state();
    let mut m = if opts.with_variational {
        let mut id = vec![0.0; d * d];
        for i in 0..d {
            id[i * d + i] = 1.0;
        }
        Some(id)
    } else {
        None
    };
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut hs = Vec::with_capacity(steps + 1);
    let mut ms = m.as_ref().map(|_| Vec::with_capacity(steps + 1));
    times.push(0.0);
    hs.push(sys.h_of_state(&s));
    states.push(s.clone());
    if let (Some(ms), Some(m)) = (ms.as_mut(), m.as_ref()) {
        ms.push(m.clone());
    }
    for k in 1..=steps {
        sys.rk4_step(&mut s, m.as_mut(), dt);
        times.push(k as f64 * dt);
        hs.push(sys.h_of_state(&s));
        states.push(s.clone());
        if let (Some(ms), Some(m)) = (ms.as_mut(), m.as_ref()) {
            ms.push(m.clone());
        }
    }
    let q0 = conserved_quantities(sys.kind, &hs[0]);
    let mut drift: BTreeMap<String, f64> = q0.keys().map(|k| (k.clone(), 0.0)).collect();
    for h in &hs {
        for (k, v) in conserved_quantities(sys.kind, h) {
            let e = drift.get_mut(&k).unwrap();
            *e = e.max((v - q0[&k]).abs());
        }
    }
    if let Some((name, &dv)) = drift.iter().find(|(_, &v)| !(v <= opts.drift_bound)) {
        return Err(FlowError::StepTooLarge { name: name.clone(), drift: dv, bound: opts.drift_bound });
    }
    Ok(Trajectory { kind: sys.kind, times, states, h: hs, variational: ms, drift })
}

/// Half-step Richardson estimate of the RK4 state error at `T`.
pub fn richardson_error(model: &GroupModel, lambda0: &Covector<f64>, t_end: f64, step: f64) -> Result<f64, FlowError> {
    let sys = FlowSystem::new(model);
    let opts = FlowOptions { step, with_variational: false, drift_bound: f64::INFINITY };
    let a = integrate_with(&sys, lambda0, t_end, &opts)?;
    let b = integrate_with(&sys, lambda0, t_end, &FlowOptions { step: step / 2.0, ..opts })?;
    let sa = a.states.last().unwrap();
    let sb = b.states.last().unwrap();
    Ok(sa.iter().zip(sb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / 15.0)
}

/// `‖Mᵀ J M − J‖_∞` for a row-major `2n × 2n` matrix.
pub fn symplectic_defect(m: &[f64], n: usize) -> f64 {
    let d = 2 * n;
    let j = crate::symfields::field::symplectic_matrix::<f64>(n);
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                for l in 0..d {
                    if j[k][l] != 0.0 {
                        s += m[k * d + a] * j[k][l] * m[l * d + b];
                    }
                }
            }
            worst = worst.max((s - j[a][b]).abs());
        }
    }
    worst
}

impl Trajectory {
    pub fn n(&self) -> usize {
        self.states[0].len() / 2
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn covector(&self, i: usize) -> Covector<f64> {
        Covector::from_state(&self.states[i])
    }

    pub fn variational_at(&self, i: usize) -> Option<&[f64]> {
        self.variational.as_ref().map(|v| v[i].as_slice())
    }

    pub fn max_symplectic_defect(&self) -> Option<f64> {
        let n = self.n();
        self.variational.as_ref().map(|v| v.iter().map(|m| symplectic_defect(m, n)).fold(0.0, f64::max))
    }

    /// CSV with columns `t, x1..xn, h1..hn, H[, E]`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let has_e = energy::<f64>(self.kind, &self.h[0]).is_some();
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",x{}", i);
        }
        for i in 1..=n {
            let _ = write!(out, ",h{}", i);
        }
        out.push_str(",H");
        if has_e {
            out.push_str(",E");
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            out.push_str(&fmt17(*t));
            for v in &self.states[k][..n] {
                out.push(',');
                out.push_str(&fmt17(*v));
            }
            for v in &self.h[k] {
                out.push(',');
                out.push_str(&fmt17(*v));
            }
            out.push(',');
            out.push_str(&fmt17(crate::groups::hamiltonian(&self.h[k])));
            if let Some(e) = energy::<f64>(self.kind, &self.h[k]) {
                out.push(',');
                out.push_str(&fmt17(e));
            }
            out.push('\n');
        }
        out
    }
}

/// Deterministic 17-significant-digit formatting.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_group;
    use crate::symfields::poly::{q, Q};
    use proptest::prelude::*;

    fn origin(h: Vec<f64>) -> Covector<f64> {
        Covector::at_origin(h)
    }

    #[test]
    fn vertical_equations_examples() {
        let m4 = build_group(GroupKind::Goursat(4)).unwrap();
        let cv = Covector::at_origin(vec![q(0), q(1), q(0), q(5)]);
        let v = flow_rhs(&m4, &cv);
        assert_eq!(h_rate(&m4, &cv, &v).unwrap(), vec![q(0); 4]);
        let m3 = build_group(GroupKind::Goursat(3)).unwrap();
        let cv = Covector::at_origin(vec![q(1), q(0), q(1)]);
        let v = flow_rhs(&m3, &cv);
        assert_eq!(h_rate(&m3, &cv, &v).unwrap(), vec![q(0), q(1), q(0)]);
        let mc = build_group(GroupKind::Cartan).unwrap();
        let cv = Covector::at_origin(vec![q(1), q(0), q(1), q(0), q(0)]);
        let v = flow_rhs(&mc, &cv);
        assert_eq!(h_rate(&mc, &cv, &v).unwrap(), vec![q(0), q(1), q(0), q(0), q(0)]);
    }

    #[test]
    fn straight_line() {
        let m = build_group(GroupKind::Goursat(3)).unwrap();
        let tr = integrate_flow(&m, &origin(vec![1.0, 0.0, 0.0]), 1.0, &FlowOptions::default()).unwrap();
        let last = tr.states.last().unwrap();
        assert!((last[0] - 1.0).abs() < 1e-12 && last[1].abs() < 1e-12 && last[2].abs() < 1e-12);
        assert_eq!(tr.h.last().unwrap(), &vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn cartan_energy_conserved() {
        let m = build_group(GroupKind::Cartan).unwrap();
        let tr = integrate_flow(&m, &origin(vec![1.0, 0.0, 1.0, 0.0, 0.0]), 10.0, &FlowOptions::default()).unwrap();
        assert!(tr.drift["E"] < 1e-9);
        assert!(tr.drift["H"] < 1e-9);
    }

    #[test]
    fn variational_is_symplectic() {
        let m = build_group(GroupKind::Goursat(4)).unwrap();
        let opts = FlowOptions { with_variational: true, ..Default::default() };
        let tr = integrate_flow(&m, &origin(vec![0.6, 0.8, 0.5, -0.7]), 5.0, &opts).unwrap();
        assert!(tr.max_symplectic_defect().unwrap() < 1e-6);
    }

    #[test]
    fn drift_bound_enforced() {
        let m = build_group(GroupKind::Goursat(4)).unwrap();
        let opts = FlowOptions { step: 0.5, ..Default::default() };
        let r = integrate_flow(&m, &origin(vec![0.6, 0.8, 3.0, -2.0]), 10.0, &opts);
        assert!(matches!(r, Err(FlowError::StepTooLarge { .. })));
        assert!(integrate_flow(&m, &origin(vec![1.0, 0.0, 0.0, 0.0]), -1.0, &FlowOptions::default()).is_err());
    }

    #[test]
    fn csv_layout() {
        let m = build_group(GroupKind::Goursat(4)).unwrap();
        let opts = FlowOptions { step: 0.1, drift_bound: f64::INFINITY, ..Default::default() };
        let tr = integrate_flow(&m, &origin(vec![1.0, 0.0, 1.0, 0.0]), 0.2, &opts).unwrap();
        let csv = tr.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,x1,x2,x3,x4,h1,h2,h3,h4,H,E");
        assert_eq!(lines.next().unwrap().split(',').count(), 11);
        assert!(csv.contains("5.0000000000000000e-1"));
        assert_eq!(csv, tr.to_csv());
    }

    #[test]
    fn conserved_examples() {
        let c = conserved_quantities(GroupKind::Cartan, &[q(1), q(0), q(1), q(0), q(0)]);
        assert_eq!(c["E"], crate::symfields::poly::qr(1, 2));
        let h = crate::groups::h_from_chart(GroupKind::Goursat(4), 0.0, 1.0, 0.0, 0.0).unwrap();
        let e = conserved_quantities(GroupKind::Goursat(4), &h)["E"];
        assert!((e - 0.5).abs() < 1e-15);
        let g: BTreeMap<String, Q> = conserved_quantities(GroupKind::Goursat(5), &[q(1), q(0), q(0), q(0), q(3)]);
        assert_eq!(g["h5"], q(3));
        assert!(!g.contains_key("E"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn canonical_flow_matches_vertical_equations(
            n in 3usize..7,
            xs in prop::collection::vec(-2.0f64..2.0, 6),
            hs in prop::collection::vec(-2.0f64..2.0, 6),
        ) {
            let m = build_group(GroupKind::Goursat(n)).unwrap();
            let cv = Covector::from_h(&m, xs[..n].to_vec(), &hs[..n]).unwrap();
            let v = flow_rhs(&m, &cv);
            let got = h_rate(&m, &cv, &v).unwrap();
            let want = h_dot(m.kind, &hs[..n]);
            for (a, b) in got.iter().zip(&want) {
                prop_assert!((a - b).abs() < 1e-11 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn cartan_flow_matches_vertical_equations(
            xs in prop::collection::vec(-2.0f64..2.0, 5),
            hs in prop::collection::vec(-2.0f64..2.0, 5),
        ) {
            let m = build_group(GroupKind::Cartan).unwrap();
            let cv = Covector::from_h(&m, xs, &hs).unwrap();
            let v = flow_rhs(&m, &cv);
            let got = h_rate(&m, &cv, &v).unwrap();
            let want = h_dot(m.kind, &hs);
            for (a, b) in got.iter().zip(&want) {
                prop_assert!((a - b).abs() < 1e-11 * (1.0 + b.abs()));
            }
        }
    }
}
