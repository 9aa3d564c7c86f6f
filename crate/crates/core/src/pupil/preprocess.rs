use std::fmt;

use crate::model::PupilSample;
use crate::validate::{pupil_gap_fraction, MAX_PUPIL_GAP_FRACTION, PUPIL_CONFIDENCE_THRESHOLD};

pub const DEFAULT_PUPIL_RATE_HZ: f64 = 120.0;
/// Longest gap bridged by linear interpolation.
pub const MAX_INTERPOLATED_GAP_S: f64 = 0.5;
pub const MIN_USABLE_S: f64 = 2.0;

/// Pupil diameter on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformPupilSignal {
    pub start_s: f64,
    pub rate_hz: f64,
    pub samples: Vec<f64>,
}

impl UniformPupilSignal {
    /// Time spanned from the first to the last sample.
    pub fn duration_s(&self) -> f64 {
        if self.samples.len() < 2 {
            0.0
        } else {
            (self.samples.len() - 1) as f64 / self.rate_hz
        }
    }
}

/// Why a pupil channel produced no usable signal. The corresponding
/// feature is reported as missing.
#[derive(Debug, Clone, PartialEq)]
pub enum PupilUnusable {
    Empty,
    TooManyGaps(f64),
    TooShort(f64),
}

impl fmt::Display for PupilUnusable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PupilUnusable::Empty => write!(f, "no usable pupil samples"),
            PupilUnusable::TooManyGaps(g) => {
                write!(f, "pupil gap fraction {g:.2} > {MAX_PUPIL_GAP_FRACTION:.2}")
            }
            PupilUnusable::TooShort(s) => {
                write!(f, "only {s:.2} s of contiguous pupil signal (< {MIN_USABLE_S} s)")
            }
        }
    }
}

impl std::error::Error for PupilUnusable {}

fn usable(s: &PupilSample) -> bool {
    s.confidence >= PUPIL_CONFIDENCE_THRESHOLD && s.diameter_mm > 0.0 && s.diameter_mm.is_finite()
}

/// Turns raw samples into a uniform signal at `target_rate_hz`.
///
/// Low-confidence samples are gaps. Gaps up to [`MAX_INTERPOLATED_GAP_S`]
/// are bridged linearly; the longest stretch without a longer gap is kept,
/// which also trims leading and trailing gaps.
pub fn preprocess_pupil(
    raw: &[PupilSample],
    target_rate_hz: f64,
) -> Result<UniformPupilSignal, PupilUnusable> {
    assert!(target_rate_hz > 0.0, "target rate must be positive");
    if raw.is_empty() {
        return Err(PupilUnusable::Empty);
    }
    let gap = pupil_gap_fraction(raw);
    if gap > MAX_PUPIL_GAP_FRACTION {
        return Err(PupilUnusable::TooManyGaps(gap));
    }
    let valid: Vec<(f64, f64)> = raw
        .iter()
        .filter(|s| usable(s))
        .map(|s| (s.t_s, s.diameter_mm))
        .collect();
    if valid.is_empty() {
        return Err(PupilUnusable::Empty);
    }

    // longest run whose internal gaps are all bridgeable
    let (mut best, mut run_start) = ((0, 0), 0);
    for i in 1..=valid.len() {
        let breaks = i == valid.len() || valid[i].0 - valid[i - 1].0 > MAX_INTERPOLATED_GAP_S + 1e-9;
        if breaks {
            let span = valid[i - 1].0 - valid[run_start].0;
            if span > valid[best.1].0 - valid[best.0].0 {
                best = (run_start, i - 1);
            }
            run_start = i;
        }
    }
    let run = &valid[best.0..=best.1];
    let span = run[run.len() - 1].0 - run[0].0;
    if span < MIN_USABLE_S {
        return Err(PupilUnusable::TooShort(span));
    }

    let step = 1.0 / target_rate_hz;
    let already_uniform = run
        .windows(2)
        .all(|w| ((w[1].0 - w[0].0) - step).abs() < 1e-9);
    let start = run[0].0;
    if already_uniform {
        return Ok(UniformPupilSignal {
            start_s: start,
            rate_hz: target_rate_hz,
            samples: run.iter().map(|p| p.1).collect(),
        });
    }

    let n = (span * target_rate_hz + 1e-9).floor() as usize + 1;
    let mut samples = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let t = start + i as f64 / target_rate_hz;
        while j + 2 < run.len() && run[j + 1].0 <= t {
            j += 1;
        }
        let (t0, v0) = run[j];
        let (t1, v1) = run[(j + 1).min(run.len() - 1)];
        let v = if t1 > t0 {
            let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
            v0 + w * (v1 - v0)
        } else {
            v0
        };
        samples.push(v);
    }
    Ok(UniformPupilSignal {
        start_s: start,
        rate_hz: target_rate_hz,
        samples,
    })
}
