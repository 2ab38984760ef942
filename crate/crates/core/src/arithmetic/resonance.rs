use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::frequency::Frequency;
use super::real::{ln_biguint, Real};

/// `||x||_{R/Z} = min_l |x - l|`.
pub fn torus_distance(x: f64) -> f64 {
    let f = x - x.floor();
    f.min(1.0 - f)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineCheck {
    pub holds: bool,
    /// The `k > 0` minimizing `||k alpha|| k^tau` over `0 < k <= K`.
    pub worst_k: BigUint,
    /// `ln(||k alpha|| k^tau) - ln(kappa)` at `worst_k`; positive iff the
    /// condition holds.
    pub log_margin: f64,
}

/// Largest `K` for which the fallback brute-force scan beyond the stored
/// convergents is attempted.
const BRUTE_FORCE_CAP: u64 = 10_000_000;

/// Checks `||k alpha|| > kappa |k|^-tau` for `0 < |k| <= K`.
///
/// For `q_n <= k < q_{n+1}` best approximation gives `||k alpha|| >=
/// ||q_n alpha||`, so the minimum of `||k alpha|| k^tau` is attained at a
/// convergent denominator; only those are examined. Past the last stored
/// denominator the range is scanned directly (up to a fixed cap).
pub fn diophantine_check(freq: &Frequency, kappa: f64, tau: f64, k_max: &BigUint) -> DiophantineCheck {
    let mut candidates: Vec<BigUint> = vec![BigUint::one()];
    for (_, q) in freq.convergents() {
        if q <= k_max && !candidates.contains(q) {
            candidates.push(q.clone());
        }
    }
    let q_last = freq.q(freq.depth() as isize);
    if k_max > &q_last {
        let start = q_last.to_u64().unwrap_or(u64::MAX);
        let stop = k_max.to_u64().unwrap_or(u64::MAX).min(BRUTE_FORCE_CAP);
        for k in start.saturating_add(1)..=stop {
            candidates.push(BigUint::from(k));
        }
    }
    let ln_kappa = kappa.ln();
    let mut worst: Option<(f64, BigUint)> = None;
    for k in candidates {
        let d = freq.value().mul_int(&BigInt::from(k.clone())).torus_distance();
        let score = d.ln_abs() + tau * ln_biguint(&k);
        if worst.as_ref().is_none_or(|(s, _)| score < *s) {
            worst = Some((score, k));
        }
    }
    let (score, worst_k) = worst.expect("k = 1 is always a candidate");
    DiophantineCheck {
        holds: score > ln_kappa,
        worst_k,
        log_margin: score - ln_kappa,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub n: i64,
    /// `||2 theta - n alpha||`.
    pub dist: f64,
    /// `ln ||2 theta - n alpha||`, finite even when `dist` underflows.
    pub ln_dist: f64,
}

/// The eps0-resonances of a phase, ordered by `|n|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceRecord {
    pub theta: f64,
    pub epsilon0: f64,
    pub resonances: Vec<Resonance>,
    pub search_bound: usize,
}

impl ResonanceRecord {
    /// The deepest resonance found (`n_0 = 0` when there is no other).
    pub fn last(&self) -> &Resonance {
        self.resonances.last().expect("n_0 is always present")
    }

    pub fn is_resonant(&self) -> bool {
        self.resonances.len() > 1
    }
}

/// Scans `|k| <= K` by increasing `|k|` and keeps every `k` with
/// `||2 theta - k alpha|| <= exp(-eps0 |k|)` that also attains the running
/// minimum over `|j| <= |k|`. Distances are computed in the frequency's
/// fixed-point precision.
pub fn find_resonances(theta: &Real, freq: &Frequency, epsilon0: f64, k_max: usize) -> ResonanceRecord {
    let alpha = freq.value();
    let bits = alpha.bits().max(theta.bits());
    let two_theta = theta.rescale(bits).mul_i64(2);
    let alpha = alpha.rescale(bits);
    let dist = |k: i64| two_theta.sub(&alpha.mul_i64(k)).torus_distance();

    let d0 = dist(0);
    let mut resonances = vec![Resonance {
        n: 0,
        dist: d0.to_f64(),
        ln_dist: d0.ln_abs(),
    }];
    let mut running = d0;
    for m in 1..=k_max as i64 {
        let dp = dist(m);
        let dm = dist(-m);
        if dp < running {
            running = dp.clone();
        }
        if dm < running {
            running = dm.clone();
        }
        for (k, d) in [(m, &dp), (-m, &dm)] {
            if d.mantissa() == running.mantissa() {
                let ln_d = d.ln_abs();
                if ln_d <= -epsilon0 * m as f64 {
                    resonances.push(Resonance {
                        n: k,
                        dist: d.to_f64(),
                        ln_dist: ln_d,
                    });
                }
            }
        }
    }
    ResonanceRecord {
        theta: theta.to_f64(),
        epsilon0,
        resonances,
        search_bound: k_max,
    }
}

/// `m` with `|m| <= m_bound` minimizing `||x - m alpha||`, and that distance.
pub fn best_multiple(x: f64, alpha: f64, m_bound: i64) -> (i64, f64) {
    let mut best = (0i64, torus_distance(x));
    for m in 1..=m_bound {
        for cand in [m, -m] {
            let d = torus_distance(x - cand as f64 * alpha);
            if d < best.1 {
                best = (cand, d);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::frequency::{build_frequency_with_beta, BetaConstruction};
    use num_traits::Zero;

    #[test]
    fn torus_distance_examples() {
        assert!((torus_distance(0.4) - 0.4).abs() < 1e-15);
        assert!((torus_distance(1.7) - 0.3).abs() < 1e-12);
        assert_eq!(torus_distance(-0.5), 0.5);
    }

    #[test]
    fn golden_is_diophantine() {
        let f = Frequency::golden(30);
        let c = diophantine_check(&f, 0.2, 1.0, &BigUint::from(1000u32));
        assert!(c.holds, "{c:?}");
    }

    #[test]
    fn kappa_two_always_fails() {
        let f = Frequency::silver(10);
        let c = diophantine_check(&f, 2.0, 1.0, &BigUint::one());
        assert!(!c.holds);
        assert_eq!(c.worst_k, BigUint::one());
    }

    #[test]
    fn liouville_frequency_fails_power_law() {
        let f = build_frequency_with_beta(&BetaConstruction::new(1.0, 4).with_seed(vec![2])).unwrap();
        let q3 = f.q(3);
        // Up to (but excluding) q_4 the worst denominator is q_3, where
        // ||q_3 alpha|| ~ 1/q_4 <= exp(-q_3).
        let k_max = f.q(4) - BigUint::one();
        let c = diophantine_check(&f, 0.1, 2.0, &k_max);
        assert!(!c.holds);
        assert_eq!(c.worst_k, q3);
        assert!(c.log_margin < -8000.0);
    }

    #[test]
    fn half_alpha_has_unit_resonance() {
        let f = Frequency::golden(30);
        let theta = f.value().half();
        let rec = find_resonances(&theta, &f, 3.0, 10);
        assert_eq!(rec.resonances[0].n, 0);
        let r1 = &rec.resonances[1];
        assert_eq!(r1.n, 1);
        assert!(r1.dist.is_zero());
    }

    #[test]
    fn best_multiple_recovers_exact_relation() {
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        let (m, d) = best_multiple((3.0 * alpha).fract(), alpha, 10);
        assert_eq!(m, 3);
        assert!(d < 1e-12);
    }
}
