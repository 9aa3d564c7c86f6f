//! Low/High Index of Pupillary Activity.
//!
//! The pupil signal is decomposed at a high-frequency level (1) and a
//! low-frequency level (`floor(max_level / 2)`). The ratio of the two detail
//! bands is reduced to its modulus maxima, large maxima are removed with a
//! universal threshold, and the surviving maxima are counted per second.

use crate::error::{Error, Result};
use crate::pupil::preprocess::UniformPupilSignal;
use crate::pupil::wavelet::{dwt_detail, WaveletSpec};

/// Ratio denominators below this magnitude yield a zero ratio.
pub const RATIO_EPS: f64 = 1e-12;

/// Keeps `x[i]` where `|x[i]|` strictly exceeds its left neighbor and is at
/// least its right neighbor; everything else, including both endpoints,
/// becomes 0.
pub fn modulus_maxima(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    if x.len() < 3 {
        return out;
    }
    for i in 1..x.len() - 1 {
        let m = x[i].abs();
        if m > x[i - 1].abs() && m >= x[i + 1].abs() {
            out[i] = x[i];
        }
    }
    out
}

/// Population standard deviation.
fn population_std(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LhipaOutcome {
    /// Surviving maxima per second of signal.
    pub value: f64,
    pub high_level: usize,
    pub low_level: usize,
    /// Nonzero modulus maxima before thresholding.
    pub maxima: usize,
    /// Maxima left after thresholding.
    pub kept: usize,
    pub threshold: f64,
    /// The high-frequency band vanished while the low band did not; the
    /// value is 0 and should be treated with suspicion.
    pub degenerate_high_band: bool,
}

pub fn lhipa(signal: &UniformPupilSignal, spec: &WaveletSpec) -> Result<LhipaOutcome> {
    let d = &signal.samples;
    let max_level = spec.max_level(d.len());
    if max_level < 2 {
        return Err(Error::input(format!(
            "pupil signal of {} samples too short for LHIPA",
            d.len()
        )));
    }
    if !(signal.rate_hz > 0.0) {
        return Err(Error::input("pupil sample rate must be positive"));
    }
    let high_level = 1;
    let low_level = max_level / 2;

    let high_scale = (2f64.powi(high_level as i32)).sqrt();
    let low_scale = (2f64.powi(low_level as i32)).sqrt();
    let high: Vec<f64> = dwt_detail(d, high_level, spec)?
        .into_iter()
        .map(|c| c / high_scale)
        .collect();
    let low: Vec<f64> = dwt_detail(d, low_level, spec)?
        .into_iter()
        .map(|c| c / low_scale)
        .collect();

    let stride = 1usize << (low_level - high_level);
    let ratio: Vec<f64> = low
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let h = high[i * stride];
            if h.abs() < RATIO_EPS {
                0.0
            } else {
                l / h
            }
        })
        .collect();

    let mut maxima = modulus_maxima(&ratio);
    let n_maxima = maxima.iter().filter(|v| **v != 0.0).count();
    let threshold = population_std(&maxima) * (2.0 * (maxima.len() as f64).log2()).sqrt();
    for m in maxima.iter_mut() {
        if m.abs() > threshold {
            *m = 0.0;
        }
    }
    let kept = maxima.iter().filter(|v| **v != 0.0).count();

    let degenerate_high_band =
        high.iter().all(|h| h.abs() < RATIO_EPS) && low.iter().any(|l| l.abs() >= RATIO_EPS);
    let duration = signal.duration_s();
    Ok(LhipaOutcome {
        value: kept as f64 / duration,
        high_level,
        low_level,
        maxima: n_maxima,
        kept,
        threshold,
        degenerate_high_band,
    })
}
