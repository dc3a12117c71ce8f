//! Contact counts of a requester/helper pair under the Poisson contact model.
//!
//! Slots are numbered from 1. The number of contacts during slots `k..=l`
//! is Poisson with mean `rate * (l - k + 1) * slot_duration`; an empty range
//! (`l < k`) holds zero contacts with certainty.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactPair {
    rate: f64,
    slot_duration: f64,
}

impl ContactPair {
    pub fn new(rate: f64, slot_duration: f64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::Domain(format!(
                "contact rate must be finite and >= 0, got {rate}"
            )));
        }
        if !(slot_duration.is_finite() && slot_duration > 0.0) {
            return Err(Error::Domain(format!(
                "slot duration must be finite and > 0, got {slot_duration}"
            )));
        }
        Ok(Self {
            rate,
            slot_duration,
        })
    }

    /// Contacts per unit time.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn slot_duration(&self) -> f64 {
        self.slot_duration
    }

    /// Expected number of contacts in a single slot.
    pub fn slot_mean(&self) -> f64 {
        self.rate * self.slot_duration
    }

    /// Expected number of contacts over slots `k..=l`, zero for an empty range.
    pub fn range_mean(&self, k: u32, l: u32) -> f64 {
        if l < k {
            0.0
        } else {
            self.slot_mean() * f64::from(l - k + 1)
        }
    }

    /// `P(M[k,l] = n)`.
    pub fn prob_exactly(&self, k: u32, l: u32, n: u32) -> Result<f64> {
        check_start(k)?;
        Ok(poisson_pmf(self.range_mean(k, l), n))
    }

    /// `P(M[k,l] >= n)`.
    pub fn prob_at_least(&self, k: u32, l: u32, n: u32) -> Result<f64> {
        check_start(k)?;
        Ok(poisson_at_least(self.range_mean(k, l), n))
    }
}

fn check_start(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::Domain("slot ranges start at slot 1".into()))
    } else {
        Ok(())
    }
}

/// Poisson mass at `n`, evaluated in log space and clamped to `[0, 1]`.
pub fn poisson_pmf(mean: f64, n: u32) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let n = f64::from(n);
    let log_p = n * mean.ln() - mean - ln_gamma(n + 1.0);
    log_p.exp().clamp(0.0, 1.0)
}

/// `P(X >= n)` for `X ~ Poisson(mean)`, as one minus the lower mass.
pub fn poisson_at_least(mean: f64, n: u32) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let below: f64 = (0..n).map(|i| poisson_pmf(mean, i)).sum();
    (1.0 - below).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Independent scalar routine: e^{-mu} mu^n / n! with an explicit factorial.
    fn pmf_direct(mu: f64, n: u32) -> f64 {
        let fact: f64 = (1..=n).map(f64::from).product();
        (-mu).exp() * mu.powi(n as i32) / fact
    }

    #[test]
    fn unit_mean_single_contact() {
        let pair = ContactPair::new(0.25, 1.0).unwrap();
        // slots 1..=4 at 0.25 per slot: mean 1
        let p = pair.prob_exactly(1, 4, 1).unwrap();
        assert!((p - pmf_direct(1.0, 1)).abs() < 1e-15);
        assert!((p - 0.367_879_4).abs() < 1e-7);
    }

    #[test]
    fn empty_range_is_certain_zero() {
        let pair = ContactPair::new(3.0, 1.0).unwrap();
        assert_eq!(pair.prob_exactly(5, 4, 0).unwrap(), 1.0);
        assert_eq!(pair.prob_exactly(5, 4, 2).unwrap(), 0.0);
        assert_eq!(pair.prob_at_least(3, 2, 1).unwrap(), 0.0);
        assert_eq!(pair.prob_at_least(3, 2, 0).unwrap(), 1.0);
    }

    #[test]
    fn zero_rate_never_fires() {
        let pair = ContactPair::new(0.0, 2.0).unwrap();
        assert_eq!(pair.prob_exactly(1, 10, 0).unwrap(), 1.0);
        assert_eq!(pair.prob_at_least(1, 10, 1).unwrap(), 0.0);
    }

    #[test]
    fn at_least_two_at_unit_mean() {
        let pair = ContactPair::new(1.0, 0.5).unwrap();
        let p = pair.prob_at_least(1, 2, 2).unwrap();
        let oracle = 1.0 - pmf_direct(1.0, 0) - pmf_direct(1.0, 1);
        assert!((p - oracle).abs() < 1e-15);
        assert!((p - 0.264_241_1).abs() < 1e-7);
    }

    #[test]
    fn slot_zero_is_rejected() {
        let pair = ContactPair::new(1.0, 1.0).unwrap();
        assert!(matches!(pair.prob_exactly(0, 3, 1), Err(Error::Domain(_))));
        assert!(matches!(pair.prob_at_least(0, 3, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_pairs_are_rejected() {
        assert!(ContactPair::new(-0.1, 1.0).is_err());
        assert!(ContactPair::new(f64::NAN, 1.0).is_err());
        assert!(ContactPair::new(1.0, 0.0).is_err());
    }

    #[test]
    fn large_counts_do_not_overflow() {
        let p = poisson_pmf(500.0, 500);
        let expected = 1.0 / (2.0 * std::f64::consts::PI * 500.0).sqrt();
        assert!((p - expected).abs() / expected < 1e-3);
        assert_eq!(poisson_pmf(1.0, 400), 0.0);
    }

    proptest! {
        #[test]
        fn pmf_matches_direct_formula(mu in 0.0f64..20.0, n in 0u32..40) {
            let p = poisson_pmf(mu, n);
            prop_assert!((p - pmf_direct(mu, n)).abs() < 1e-12);
        }

        #[test]
        fn partial_sums_approach_one(rate in 0.0f64..5.0, k in 1u32..10, len in 0u32..10) {
            let pair = ContactPair::new(rate, 1.0).unwrap();
            let l = k + len;
            let mut total = 0.0;
            for n in 0..400 {
                total += pair.prob_exactly(k, l, n).unwrap();
                prop_assert!(total <= 1.0 + 1e-12);
            }
            prop_assert!((total - 1.0).abs() < 1e-9);
        }

        #[test]
        fn at_least_is_monotone(rate in 0.0f64..5.0, l in 1u32..24, n in 0u32..20) {
            let pair = ContactPair::new(rate, 1.0).unwrap();
            let here = pair.prob_at_least(1, l, n).unwrap();
            prop_assert!(pair.prob_at_least(1, l, n + 1).unwrap() <= here + 1e-12);
            prop_assert!(pair.prob_at_least(1, l + 1, n).unwrap() >= here - 1e-12);
        }

        #[test]
        fn at_least_differences_give_mass(rate in 0.0f64..5.0, k in 1u32..8, l in 0u32..24, n in 0u32..30) {
            let pair = ContactPair::new(rate, 1.0).unwrap();
            let diff = pair.prob_at_least(k, l, n).unwrap() - pair.prob_at_least(k, l, n + 1).unwrap();
            prop_assert!((diff - pair.prob_exactly(k, l, n).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn disjoint_ranges_convolve(rate in 0.0f64..3.0, k in 1u32..5, a in 0u32..6, b in 1u32..6, n in 0u32..15) {
            let pair = ContactPair::new(rate, 0.7).unwrap();
            let m = k + a;
            let l = m + b;
            let whole = pair.prob_exactly(k, l, n).unwrap();
            let conv: f64 = (0..=n)
                .map(|j| pair.prob_exactly(k, m, j).unwrap() * pair.prob_exactly(m + 1, l, n - j).unwrap())
                .sum();
            prop_assert!((whole - conv).abs() < 1e-10);
        }
    }
}
