//! Heart-rate and HRV features computed from RR intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Artifact rejection bounds for RR series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrPolicy {
    pub min_rr_ms: f64,
    pub max_rr_ms: f64,
    /// Largest allowed relative change against the last accepted interval.
    pub max_successive_change: f64,
}

impl Default for RrPolicy {
    fn default() -> Self {
        RrPolicy {
            min_rr_ms: 300.0,
            max_rr_ms: 2000.0,
            max_successive_change: 0.25,
        }
    }
}

impl RrPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_rr_ms > 0.0 && self.min_rr_ms < self.max_rr_ms) {
            return Err(Error::input("RR policy needs 0 < min_rr_ms < max_rr_ms"));
        }
        if !(self.max_successive_change > 0.0 && self.max_successive_change < 1.0) {
            return Err(Error::input("RR policy needs 0 < max_successive_change < 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CardiacFeatures {
    pub hr_mean: f64,
    pub hr_min: f64,
    pub hr_max: f64,
    pub hr_std: f64,
    /// `None` when fewer than two beats survive cleaning.
    pub rmssd: Option<f64>,
    pub n_beats_used: usize,
}

/// Drops out-of-range intervals and intervals that jump too far from the
/// previously accepted one. Order is preserved.
pub fn clean_rr(rr: &[f64], policy: &RrPolicy) -> Result<Vec<f64>> {
    policy.validate()?;
    if rr.is_empty() {
        return Err(Error::input("no RR intervals"));
    }
    let mut out: Vec<f64> = Vec::with_capacity(rr.len());
    for &v in rr {
        if !(v >= policy.min_rr_ms && v <= policy.max_rr_ms) {
            continue;
        }
        if let Some(&prev) = out.last() {
            if ((v - prev) / prev).abs() > policy.max_successive_change {
                continue;
            }
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::input("no valid RR intervals"));
    }
    Ok(out)
}

/// Mean, minimum, maximum and sample standard deviation of the
/// instantaneous heart rate `60000 / rr` (beats per minute).
pub fn hr_stats(rr: &[f64]) -> Result<(f64, f64, f64, f64)> {
    if rr.is_empty() {
        return Err(Error::input("heart-rate statistics need at least one RR interval"));
    }
    if rr.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::input("RR intervals must be positive"));
    }
    let hr: Vec<f64> = rr.iter().map(|&v| 60_000.0 / v).collect();
    let n = hr.len() as f64;
    let mean = hr.iter().sum::<f64>() / n;
    let min = hr.iter().copied().fold(f64::INFINITY, f64::min);
    let max = hr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let std = if hr.len() > 1 {
        (hr.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    // float rounding can put the mean a hair outside [min, max]
    Ok((mean.clamp(min, max), min, max, std))
}

/// Root mean square of successive RR differences, in milliseconds.
pub fn rmssd(rr: &[f64]) -> Result<f64> {
    if rr.len() < 2 {
        return Err(Error::input("RMSSD undefined for fewer than 2 intervals"));
    }
    let sum_sq: f64 = rr.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok((sum_sq / (rr.len() - 1) as f64).sqrt())
}

/// Cleans `rr` and computes all cardiac features.
pub fn cardiac_features(rr: &[f64], policy: &RrPolicy) -> Result<CardiacFeatures> {
    let clean = clean_rr(rr, policy)?;
    let (hr_mean, hr_min, hr_max, hr_std) = hr_stats(&clean)?;
    Ok(CardiacFeatures {
        hr_mean,
        hr_min,
        hr_max,
        hr_std,
        rmssd: rmssd(&clean).ok(),
        n_beats_used: clean.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Keeps index i iff it passes the bounds and the jump test against the
    /// nearest earlier kept index, found by rescanning the whole prefix.
    fn brute_clean(rr: &[f64], p: &RrPolicy) -> Vec<f64> {
        let mut keep = vec![false; rr.len()];
        for i in 0..rr.len() {
            let in_bounds = rr[i] >= p.min_rr_ms && rr[i] <= p.max_rr_ms;
            let prev = (0..i).rev().find(|&j| keep[j]);
            let jump_ok = prev.is_none_or(|j| ((rr[i] - rr[j]) / rr[j]).abs() <= p.max_successive_change);
            keep[i] = in_bounds && jump_ok;
        }
        rr.iter().zip(keep).filter(|(_, k)| *k).map(|(v, _)| *v).collect()
    }

    #[test]
    fn clean_examples() {
        let p = RrPolicy::default();
        assert_eq!(clean_rr(&[1000.0, 1000.0, 1000.0], &p).unwrap(), vec![1000.0; 3]);
        assert_eq!(clean_rr(&[1000.0, 50.0, 1000.0], &p).unwrap(), vec![1000.0, 1000.0]);
        let jumpy = [800.0, 1300.0, 810.0];
        assert_eq!(brute_clean(&jumpy, &p), vec![800.0, 810.0]);
        assert_eq!(clean_rr(&jumpy, &p).unwrap(), vec![800.0, 810.0]);
        let err = clean_rr(&[10.0, 5000.0], &p).unwrap_err();
        assert!(err.to_string().contains("no valid RR intervals"));
    }

    #[test]
    fn hr_stats_examples() {
        assert_eq!(hr_stats(&[1000.0; 3]).unwrap(), (60.0, 60.0, 60.0, 0.0));
        let (mean, min, max, std) = hr_stats(&[800.0, 1000.0]).unwrap();
        assert!((mean - 67.5).abs() < 1e-12);
        assert_eq!((min, max), (60.0, 75.0));
        assert!((std - (2.0f64 * 7.5 * 7.5).sqrt()).abs() < 1e-12);
        assert!((std - 10.6066).abs() < 1e-4);
        assert_eq!(hr_stats(&[800.0]).unwrap(), (75.0, 75.0, 75.0, 0.0));
        assert!(hr_stats(&[]).is_err());
    }

    #[test]
    fn rmssd_examples() {
        assert_eq!(rmssd(&[1000.0; 3]).unwrap(), 0.0);
        let v = rmssd(&[1000.0, 1010.0, 990.0]).unwrap();
        assert!((v - 250f64.sqrt()).abs() < 1e-12);
        assert!((v - 15.8114).abs() < 1e-4);
        assert!(rmssd(&[1000.0]).is_err());
    }

    proptest! {
        #[test]
        fn clean_matches_brute_force(rr in prop::collection::vec(100.0f64..2500.0, 1..60)) {
            let p = RrPolicy::default();
            let brute = brute_clean(&rr, &p);
            match clean_rr(&rr, &p) {
                Ok(v) => prop_assert_eq!(v, brute),
                Err(_) => prop_assert!(brute.is_empty()),
            }
        }

        #[test]
        fn rmssd_translation_and_scale(rr in prop::collection::vec(400.0f64..1500.0, 2..80),
                                       c in -300.0f64..300.0, k in 0.1f64..10.0) {
            let base = rmssd(&rr).unwrap();
            let shifted: Vec<f64> = rr.iter().map(|v| v + c).collect();
            prop_assert!((rmssd(&shifted).unwrap() - base).abs() <= 1e-9);
            let scaled: Vec<f64> = rr.iter().map(|v| v * k).collect();
            prop_assert!((rmssd(&scaled).unwrap() - k * base).abs() <= 1e-9 * (k * base).max(1.0));
            let reversed: Vec<f64> = rr.iter().rev().copied().collect();
            prop_assert!((rmssd(&reversed).unwrap() - base).abs() <= 1e-9);
        }

        #[test]
        fn hr_stats_ordering_and_permutation(mut rr in prop::collection::vec(300.0f64..2000.0, 1..80)) {
            let (mean, min, max, std) = hr_stats(&rr).unwrap();
            prop_assert!(min <= mean && mean <= max);
            prop_assert!(std >= 0.0);
            rr.reverse();
            let (m2, lo2, hi2, s2) = hr_stats(&rr).unwrap();
            prop_assert!((m2 - mean).abs() < 1e-9 && lo2 == min && hi2 == max && (s2 - std).abs() < 1e-9);
        }
    }
}
