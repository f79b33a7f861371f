//! Seeded random rational covectors on the unit level over the origin.

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::groups::GroupKind;
use crate::symfields::poly::{qr, Q};

/// Smallest admissible `|h_1|` (Goursat) or `|h_3|` (Cartan).
pub const POLE_MARGIN: (i64, i64) = (1, 10);

#[derive(Clone, Debug)]
pub struct CovectorSampler {
    kind: GroupKind,
    rng: ChaCha8Rng,
}

impl CovectorSampler {
    pub fn new(kind: GroupKind, seed: u64) -> Self {
        CovectorSampler { kind, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn small_rational(&mut self) -> Q {
        let d = self.rng.gen_range(1..=7);
        let n = self.rng.gen_range(-9..=9);
        qr(n, d)
    }

    /// `(h_1, h_2)` on the unit circle via the rational parametrization.
    fn unit_pair(&mut self) -> (Q, Q) {
        let s = self.small_rational();
        let one = Q::from_integer(1.into());
        let den = &one + &s * &s;
        ((&one - &s * &s) / &den, (&s + &s) / &den)
    }

    fn margin_ok(x: &Q) -> bool {
        x.abs() >= qr(POLE_MARGIN.0, POLE_MARGIN.1)
    }

    pub fn sample(&mut self) -> Vec<Q> {
        let n = self.kind.dim();
        loop {
            let (h1, h2) = self.unit_pair();
            let mut h = vec![h1, h2];
            for _ in 2..n {
                h.push(self.small_rational());
            }
            let pole = match self.kind {
                GroupKind::Goursat(_) => &h[0],
                GroupKind::Cartan => &h[2],
            };
            if Self::margin_ok(pole) {
                return h;
            }
        }
    }

    pub fn take(&mut self, count: usize) -> Vec<Vec<Q>> {
        (0..count).map(|_| self.sample()).collect()
    }
}

pub fn sample_covectors(kind: GroupKind, seed: u64, count: usize) -> Vec<Vec<Q>> {
    CovectorSampler::new(kind, seed).take(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::is_unit_speed;

    #[test]
    fn unit_speed_and_margin() {
        for kind in [GroupKind::Goursat(3), GroupKind::Goursat(6), GroupKind::Cartan] {
            let a = sample_covectors(kind, 11, 40);
            assert_eq!(a, sample_covectors(kind, 11, 40));
            for h in &a {
                assert_eq!(h.len(), kind.dim());
                assert!(is_unit_speed(h));
                let pole = if kind == GroupKind::Cartan { &h[2] } else { &h[0] };
                assert!(pole.abs() >= qr(1, 10));
            }
        }
    }
}
