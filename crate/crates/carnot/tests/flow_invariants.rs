use carnot::curvature::{r11, r11_unchecked};
use carnot::elliptic::{classify_pendulum, StratumKind};
use carnot::groups::h_from_chart;
use carnot::hamiltonian::{integrate_flow, FlowOptions, Trajectory};
use carnot::regularity::{equiregularity_loss_times, growth_vector_closed_form, growth_vector_closed_form_tol, RankOracle};
use carnot::{build_group, Covector, GroupKind};
use proptest::prelude::*;

const ENGEL: GroupKind = GroupKind::Goursat(4);

fn flow(kind: GroupKind, h: &[f64], t: f64) -> Trajectory {
    let opts = FlowOptions { drift_bound: f64::INFINITY, ..Default::default() };
    integrate_flow(&build_group(kind).unwrap(), &Covector::at_origin(h.to_vec()), t, &opts).unwrap()
}

fn nonzero() -> impl Strategy<Value = f64> {
    (0.3f64..2.0, any::<bool>()).prop_map(|(x, s)| if s { x } else { -x })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stratum_is_constant_along_the_flow(th in -3.0f64..3.0, c in -2.5f64..2.5, a in nonzero(), b in -3.0f64..3.0, cartan in any::<bool>()) {
        let kind = if cartan { GroupKind::Cartan } else { ENGEL };
        let a = if cartan { a.abs() } else { a };
        let h0 = h_from_chart(kind, th, c, a, b).unwrap();
        let s0 = classify_pendulum(kind, &h0).unwrap();
        prop_assume!(!s0.boundary_uncertain);
        let tr = flow(kind, &h0, 3.0);
        for k in (0..tr.len()).step_by(500) {
            let s = classify_pendulum(kind, &tr.h[k]).unwrap();
            prop_assert_eq!(s.stratum, s0.stratum);
            prop_assert!((s.energy - s0.energy).abs() < 1e-9);
        }
    }

    #[test]
    fn rank_oracle_agrees_along_the_flow(n in 3usize..7, hs in prop::collection::vec(nonzero(), 6), pattern in 0usize..3, cartan in any::<bool>()) {
        let kind = if cartan { GroupKind::Cartan } else { GroupKind::Goursat(n) };
        let mut h: Vec<f64> = hs.iter().cycle().take(kind.dim()).cloned().collect();
        match (kind, pattern) {
            (GroupKind::Cartan, 1) => h[2] = 0.0,
            (GroupKind::Cartan, 2) => { h[2] = 0.0; h[3] = -h[1]; h[4] = h[0]; }
            (_, 1) => h[0] = 0.0,
            (_, 2) => { h[0] = 0.0; h[2] = 0.0; }
            _ => {}
        }
        let m = build_group(kind).unwrap();
        let oracle = RankOracle::new(&m, 2 * kind.dim() - 3);
        let abnormal0 = growth_vector_closed_form(kind, &h).abnormal;
        let tr = flow(kind, &h, 2.0);
        for k in [0, 400, 900, 1300, 1700, 2000] {
            let ht = &tr.h[k];
            // rounding moves an abnormal covector off its variety by ~1e-16,
            // which the exact rank sees; compare the ranks at t = 0 only then
            let closed = growth_vector_closed_form_tol(kind, ht, 1e-9);
            prop_assert_eq!(closed.abnormal, abnormal0, "t = {}", tr.times[k]);
            if abnormal0 && k > 0 {
                continue;
            }
            let ranked = oracle.growth_vector(ht).unwrap();
            prop_assert_eq!(&ranked, &closed.growth, "t = {}", tr.times[k]);
            if closed.equiregular {
                let mut prev = 0;
                let inc: Vec<usize> = ranked.iter().map(|&k| { let d = k - prev; prev = k; d }).collect();
                prop_assert!(inc.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }
}

#[test]
fn engel_rotation_losses_are_periodic() {
    for (th, c, a) in [(0.3, 0.5, 1.3), (1.0, -0.4, -0.8), (-0.2, 1.1, 2.0)] {
        let h = h_from_chart(ENGEL, th, c, a, 0.0).unwrap();
        let ch = classify_pendulum(ENGEL, &h).unwrap();
        assert_eq!(ch.stratum.kind, StratumKind::C1);
        let period = 2.0 * ch.big_k.unwrap() / f64::abs(a).sqrt();
        let lt = equiregularity_loss_times(&build_group(ENGEL).unwrap(), &h, 25.0, 1e-3).unwrap();
        assert!(lt.len() >= 3);
        for w in lt.windows(2) {
            assert!((w[1] - w[0] - period).abs() < 1e-7, "{} vs {}", w[1] - w[0], period);
        }
    }
}

/// `R_{aa,11}` along a geodesic blows up like `−const/h²` of the pole
/// coordinate as a loss time is approached.
#[test]
fn r11_diverges_at_loss_times() {
    for (kind, h, pole) in [
        (ENGEL, h_from_chart(ENGEL, 0.3, 0.5, 1.3, 0.0).unwrap(), 0),
        (GroupKind::Goursat(5), vec![0.6, 0.8, 0.7, -0.4, 1.1], 0),
        (GroupKind::Cartan, h_from_chart(GroupKind::Cartan, 0.3, 0.5, 1.3, 0.4).unwrap(), 2),
    ] {
        let m = build_group(kind).unwrap();
        let lt = equiregularity_loss_times(&m, &h, 10.0, 1e-3).unwrap();
        let t0 = lt[0];
        let mut scaled = Vec::new();
        for eps in [1e-2, 1e-3, 1e-4] {
            let tr = flow(kind, &h, t0 - eps);
            let ht = tr.h.last().unwrap();
            let r = r11::<f64>(kind, ht).unwrap();
            assert!(r < 0.0, "{} at distance {}: r11 = {}", kind, eps, r);
            scaled.push(r * ht[pole] * ht[pole]);
        }
        // r11 · h² settles to a finite nonzero limit
        assert!((scaled[2] - scaled[1]).abs() < 0.1 * (scaled[1] - scaled[0]).abs() + 1e-6, "{} {:?}", kind, scaled);
        assert!(scaled[2].abs() > 1e-3);
        let at = flow(kind, &h, t0);
        assert!(r11_unchecked::<f64>(kind, at.h.last().unwrap()).abs() > 1e6);
    }
}
